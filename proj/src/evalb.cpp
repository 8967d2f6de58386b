#include "dexparse/evalb.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "dexparse/errors.hpp"

namespace dexparse {

namespace {

bool is_punctuation(const Tree& preterminal, const EvalConfig& cfg) {
  const std::string& label = preterminal.label;
  if (cfg.punctuation_tags.count(label)) return true;
  // Extended labels such as "$.": compare the POS part only.
  std::size_t cut = label.starts_with('$') ? 2 : label.find('.');
  return cut != std::string::npos && cut < label.size() &&
         cfg.punctuation_tags.count(label.substr(0, cut)) > 0;
}

int collect(const Tree& t, int position, bool is_root, const EvalConfig& cfg,
            std::vector<LabeledSpan>& out) {
  if (t.is_leaf()) return position + 1;
  if (t.is_preterminal()) return is_punctuation(t, cfg) ? position : position + static_cast<int>(t.children.size());
  int end = position;
  for (const auto& c : t.children) end = collect(c, end, false, cfg, out);
  if (end > position && (cfg.include_root || !is_root)) {
    std::string label = t.label;
    if (auto it = cfg.label_equivalences.find(label); it != cfg.label_equivalences.end())
      label = it->second;
    if (!cfg.ignore_labels.count(label)) out.push_back({position, end, std::move(label)});
  }
  return end;
}

int word_count(const Tree& t, const EvalConfig& cfg) {
  std::vector<LabeledSpan> ignored;
  return collect(t, 0, true, cfg, ignored);
}

double ratio(std::size_t num, std::size_t den, std::size_t other) {
  if (den == 0) return other == 0 ? 100.0 : 0.0;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void EvalResult::finalize() {
  precision = ratio(matched, pred_total, gold_total);
  recall = ratio(matched, gold_total, pred_total);
  fscore = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  complete_match =
      total_trees == 0 ? 0.0 : 100.0 * static_cast<double>(exact_trees) / static_cast<double>(total_trees);
}

std::vector<LabeledSpan> extract_eval_spans(const Tree& tree, const EvalConfig& cfg) {
  std::vector<LabeledSpan> spans;
  collect(tree, 0, true, cfg, spans);
  std::sort(spans.begin(), spans.end());
  return spans;
}

EvalResult score_corpus(const std::vector<Tree>& gold, const std::vector<Tree>& pred,
                        const EvalConfig& cfg) {
  if (gold.size() != pred.size())
    throw Error("corpus length mismatch: gold has " + std::to_string(gold.size()) +
                " trees, predicted has " + std::to_string(pred.size()));
  EvalResult r;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    SentenceScore s;
    s.index = k + 1;
    int gw = word_count(gold[k], cfg);
    int pw = word_count(pred[k], cfg);
    if (gw != pw) {
      s.error = "length mismatch: gold " + std::to_string(gw) + " words, predicted " +
                std::to_string(pw);
      ++r.skipped;
      r.sentences.push_back(std::move(s));
      continue;
    }
    auto g = extract_eval_spans(gold[k], cfg);
    auto p = extract_eval_spans(pred[k], cfg);
    std::vector<LabeledSpan> common;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
    s.gold_spans = g.size();
    s.pred_spans = p.size();
    s.matched = common.size();
    s.exact = g == p;
    r.gold_total += s.gold_spans;
    r.pred_total += s.pred_spans;
    r.matched += s.matched;
    r.exact_trees += s.exact ? 1 : 0;
    ++r.total_trees;
    r.sentences.push_back(std::move(s));
  }
  r.finalize();
  return r;
}

std::string format_summary(const EvalResult& r) {
  return fmt::format("{:.2f} {:.2f} {:.2f} {:.2f}", r.recall, r.precision, r.fscore,
                     r.complete_match);
}

std::string format_report(const EvalResult& r) {
  std::string out;
  out += fmt::format("# recall\t{:.2f}\n", r.recall);
  out += fmt::format("# precision\t{:.2f}\n", r.precision);
  out += fmt::format("# fscore\t{:.2f}\n", r.fscore);
  out += fmt::format("# complete_match\t{:.2f}\n", r.complete_match);
  out += fmt::format("# matched\t{}\n# gold_total\t{}\n# pred_total\t{}\n", r.matched,
                     r.gold_total, r.pred_total);
  out += fmt::format("# exact_trees\t{}\n# total_trees\t{}\n# skipped\t{}\n", r.exact_trees,
                     r.total_trees, r.skipped);
  out += "index\tgold\tpred\tmatched\texact\n";
  for (const auto& s : r.sentences) {
    if (!s.error.empty())
      out += fmt::format("{}\tERROR\t{}\n", s.index, s.error);
    else
      out += fmt::format("{}\t{}\t{}\t{}\t{}\n", s.index, s.gold_spans, s.pred_spans, s.matched,
                         s.exact ? 1 : 0);
  }
  return out;
}

}  // namespace dexparse
