#include "dexparse/pos_tagger.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "dexparse/errors.hpp"
#include "dexparse/random.hpp"

namespace dexparse {

namespace {

constexpr std::string_view kHeader = "# dexparse tagger v";
constexpr std::string_view kInventoryFeature = "<inventory>";
constexpr std::string_view kStart = "<s>";
constexpr std::string_view kEnd = "</s>";

/// Byte offsets of UTF-8 character starts, plus the end offset.
std::vector<std::size_t> char_offsets(const std::string& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
  out.push_back(s.size());
  return out;
}

// Weight with lazy averaging bookkeeping.
struct Accumulator {
  double weight = 0.0;
  double total = 0.0;
  long long stamp = 0;
};

}  // namespace

std::vector<std::string> tagger_features(const std::vector<std::string>& tokens, std::size_t i,
                                         const std::string& previous_tag) {
  const std::string& w = tokens[i];
  std::vector<std::string> f;
  f.reserve(16);
  f.emplace_back("b");
  f.push_back("w=" + w);
  f.push_back("w-1=" + (i > 0 ? tokens[i - 1] : std::string(kStart)));
  f.push_back("w+1=" + (i + 1 < tokens.size() ? tokens[i + 1] : std::string(kEnd)));
  const auto offs = char_offsets(w);
  const std::size_t chars = offs.size() - 1;
  for (std::size_t k = 1; k <= 4 && k <= chars; ++k) {
    f.push_back(fmt::format("p{}={}", k, w.substr(0, offs[k])));
    f.push_back(fmt::format("s{}={}", k, w.substr(offs[chars - k])));
  }
  f.push_back("t-1=" + previous_tag);
  if (std::any_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; }))
    f.emplace_back("digit");
  if (!w.empty() && w[0] >= 'A' && w[0] <= 'Z') f.emplace_back("cap");
  return f;
}

std::size_t TaggerModel::predict(const std::vector<std::string>& features) const {
  std::vector<double> scores(tags_.size(), 0.0);
  for (const auto& feat : features) {
    auto it = weights_.find(feat);
    if (it == weights_.end()) continue;
    for (const auto& [t, w] : it->second) scores[static_cast<std::size_t>(t)] += w;
  }
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

TaggedSentence TaggerModel::tag(const std::vector<std::string>& tokens) const {
  if (tags_.empty()) throw Error("tagger model has an empty tag inventory");
  TaggedSentence out;
  out.tokens = tokens;
  std::string prev(kStart);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& guess = tags_[predict(tagger_features(tokens, i, prev))];
    out.tags.push_back(ExtendedTag::parse(guess));
    prev = guess;
  }
  return out;
}

double TaggerModel::weight(const std::string& feature, const std::string& tag) const {
  auto it = weights_.find(feature);
  if (it == weights_.end()) return 0.0;
  auto t = std::lower_bound(tags_.begin(), tags_.end(), tag);
  if (t == tags_.end() || *t != tag) return 0.0;
  const int idx = static_cast<int>(t - tags_.begin());
  for (const auto& [k, w] : it->second)
    if (k == idx) return w;
  return 0.0;
}

std::string TaggerModel::save() const {
  std::string out = fmt::format("{}{}\n", kHeader, kVersion);
  // Rows ordered by feature, then tag.
  std::map<std::string, std::string> lines;
  std::string inv;
  for (const auto& t : tags_) inv += fmt::format("{}\t{}\t0\n", kInventoryFeature, t);
  lines.emplace(std::string(kInventoryFeature), std::move(inv));
  for (const auto& [f, weights] : weights_) {
    std::vector<std::pair<const std::string*, double>> row;
    for (const auto& [t, w] : weights) row.emplace_back(&tags_[static_cast<std::size_t>(t)], w);
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return *a.first < *b.first; });
    std::string block;
    for (const auto& [t, w] : row) block += fmt::format("{}\t{}\t{:.17g}\n", f, *t, w);
    lines.emplace(f, std::move(block));
  }
  for (const auto& [_, block] : lines) out += block;
  return out;
}

TaggerModel TaggerModel::load(std::string_view text) {
  TaggerModel m;
  std::size_t pos = 0, line_no = 0;
  std::vector<std::tuple<std::string, std::string, double>> rows;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (!line.starts_with(kHeader)) throw FormatError("not a tagger checkpoint", 1);
      int version = std::atoi(std::string(line.substr(kHeader.size())).c_str());
      if (version != kVersion)
        throw FormatError("unsupported tagger version " + std::to_string(version), 1);
      continue;
    }
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw FormatError("expected feature<TAB>tag<TAB>weight", line_no);
    std::string feat(line.substr(0, t1));
    std::string tag(line.substr(t1 + 1, t2 - t1 - 1));
    std::string wtext(line.substr(t2 + 1));
    char* stop = nullptr;
    double w = std::strtod(wtext.c_str(), &stop);
    if (stop == wtext.c_str() || *stop != '\0' || !std::isfinite(w))
      throw FormatError("bad weight '" + wtext + "'", line_no);
    if (feat == kInventoryFeature)
      m.tags_.push_back(tag);
    else
      rows.emplace_back(std::move(feat), std::move(tag), w);
  }
  if (line_no == 0) throw FormatError("not a tagger checkpoint", 1);
  std::sort(m.tags_.begin(), m.tags_.end());
  m.tags_.erase(std::unique(m.tags_.begin(), m.tags_.end()), m.tags_.end());
  if (m.tags_.empty()) throw Error("tagger checkpoint has an empty tag inventory");
  for (auto& [feat, tag, w] : rows) {
    auto t = std::lower_bound(m.tags_.begin(), m.tags_.end(), tag);
    if (t == m.tags_.end() || *t != tag) throw Error("weight for tag '" + tag + "' outside the inventory");
    m.weights_[feat].emplace_back(static_cast<int>(t - m.tags_.begin()), w);
  }
  for (auto& [_, row] : m.weights_) std::sort(row.begin(), row.end());
  return m;
}

TaggerModel train_tagger(const std::vector<TaggedSentence>& corpus, int epochs, std::uint64_t seed) {
  if (corpus.empty()) throw Error("cannot train a tagger on an empty corpus");
  if (epochs < 1) throw Error("tagger epochs must be >= 1");

  TaggerModel model;
  for (const auto& s : corpus)
    for (const auto& t : s.tags) model.tags_.push_back(t.str());
  std::sort(model.tags_.begin(), model.tags_.end());
  model.tags_.erase(std::unique(model.tags_.begin(), model.tags_.end()), model.tags_.end());

  std::map<std::string, int> tag_index;
  for (std::size_t i = 0; i < model.tags_.size(); ++i) tag_index[model.tags_[i]] = static_cast<int>(i);

  // feature -> tag -> accumulator; std::map keeps iteration order fixed.
  std::unordered_map<std::string, std::map<int, Accumulator>> acc;
  long long now = 0;

  auto current_scores = [&](const std::vector<std::string>& feats) {
    std::vector<double> scores(model.tags_.size(), 0.0);
    for (const auto& f : feats) {
      auto it = acc.find(f);
      if (it == acc.end()) continue;
      for (const auto& [t, a] : it->second) scores[static_cast<std::size_t>(t)] += a.weight;
    }
    return scores;
  };
  auto update = [&](const std::string& f, int tag, double delta) {
    Accumulator& a = acc[f][tag];
    a.total += static_cast<double>(now - a.stamp) * a.weight;
    a.stamp = now;
    a.weight += delta;
  };

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& s = corpus[idx];
      if (s.tokens.size() != s.tags.size()) throw Error("tokens and tags differ in length");
      std::string prev(kStart);
      for (std::size_t i = 0; i < s.size(); ++i) {
        ++now;
        auto feats = tagger_features(s.tokens, i, prev);
        auto scores = current_scores(feats);
        const int guess = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
        const int truth = tag_index.at(s.tags[i].str());
        if (guess != truth) {
          for (const auto& f : feats) {
            update(f, truth, 1.0);
            update(f, guess, -1.0);
          }
        }
        prev = model.tags_[static_cast<std::size_t>(guess)];
      }
    }
  }

  for (auto& [feat, per_tag] : acc) {
    std::vector<std::pair<int, double>> row;
    for (auto& [t, a] : per_tag) {
      const double total = a.total + static_cast<double>(now - a.stamp) * a.weight;
      const double avg = total / static_cast<double>(now);
      if (avg != 0.0) row.emplace_back(t, avg);
    }
    if (!row.empty()) model.weights_.emplace(feat, std::move(row));
  }
  return model;
}

double tagger_accuracy(const std::vector<TaggedSentence>& gold, const std::vector<TaggedSentence>& pred) {
  if (gold.size() != pred.size()) throw Error("tagger_accuracy: sentence counts differ");
  std::size_t total = 0, correct = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold[k].tags.size() != pred[k].tags.size())
      throw Error("tagger_accuracy: sentence " + std::to_string(k + 1) + " lengths differ");
    for (std::size_t i = 0; i < gold[k].tags.size(); ++i) {
      ++total;
      if (gold[k].tags[i] == pred[k].tags[i]) ++correct;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace dexparse
