#include "dexparse/chart_parser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dexparse/errors.hpp"
#include "dexparse/evalb.hpp"
#include "dexparse/random.hpp"
#include "dexparse/tree_transform.hpp"

namespace dexparse {

namespace {

int chart_label(const Tree& node, const Vocabulary& labels) {
  if (node.label == kEmptyLabel) return 0;
  const int id = labels.find(node.label);
  if (id <= 0) throw Error("label '" + node.label + "' is not in the label inventory");
  return id;
}

int collect_spans(const Tree& node, int pos, const Vocabulary& labels, std::vector<ChartSpan>& out) {
  if (node.is_leaf()) throw Error("bare leaf '" + *node.token + "' in a binarized tree");
  if (node.is_preterminal()) {
    if (node.children.size() != 1) throw Error("preterminal '" + node.label + "' has several leaves");
    out.push_back({pos, pos + 1, 0});
    return pos + 1;
  }
  if (node.children.size() == 1) {
    if (!node.children[0].is_preterminal())
      throw Error("unary node '" + node.label + "' above a phrase; binarize the tree first");
    out.push_back({pos, pos + 1, chart_label(node, labels)});
    return pos + 1;
  }
  if (node.children.size() != 2)
    throw Error("node '" + node.label + "' has " + std::to_string(node.children.size()) +
                " children; binarize the tree first");
  const std::size_t slot = out.size();
  out.push_back({pos, pos, chart_label(node, labels)});
  int mid = collect_spans(node.children[0], pos, labels, out);
  int end = collect_spans(node.children[1], mid, labels, out);
  out[slot].end = end;
  return end;
}

Tree build_tree(const Chart& chart, const Vocabulary& labels, const std::vector<ExtendedTag>& tags, int i,
                int j) {
  const int label = chart.best_label(i, j);
  if (j - i == 1) {
    Tree pre = Tree::preterminal(tags[static_cast<std::size_t>(i)].pos, tags[static_cast<std::size_t>(i)].str());
    if (label == 0) return pre;
    std::vector<Tree> kids;
    kids.push_back(std::move(pre));
    return Tree::node(labels.at(label), std::move(kids));
  }
  const int k = chart.best_split(i, j);
  std::vector<Tree> kids;
  kids.push_back(build_tree(chart, labels, tags, i, k));
  kids.push_back(build_tree(chart, labels, tags, k, j));
  return Tree::node(label == 0 ? std::string(kEmptyLabel) : labels.at(label), std::move(kids));
}

/// Gold label of every span; spans outside the gold bracketing are empty.
Triangular<int> gold_table(const Tree& gold, const Vocabulary& labels, int n) {
  Triangular<int> table(n, 0);
  const auto spans = tree_chart_spans(gold, labels);
  if (spans.empty() || spans.front().end != n)
    throw Error("gold tree covers " + std::to_string(spans.empty() ? 0 : spans.front().end) +
                " tokens but the sentence has " + std::to_string(n));
  for (const auto& s : spans) table(s.start, s.end) = s.label;
  return table;
}

}  // namespace

std::vector<ChartSpan> tree_chart_spans(const Tree& binarized, const Vocabulary& labels) {
  if (binarized.is_preterminal() || binarized.label == kEmptyLabel)
    throw Error("the root of a chart tree must carry a label");
  std::vector<ChartSpan> out;
  collect_spans(binarized, 0, labels, out);
  return out;
}

double tree_score(const SpanScores& scores, const Tree& binarized, const Vocabulary& labels) {
  double total = 0.0;
  for (const auto& s : tree_chart_spans(binarized, labels)) total += scores(s.start, s.end, s.label);
  return total;
}

Chart build_chart(const SpanScores& scores, const Triangular<int>* gold) {
  const int n = scores.length();
  const int labels = scores.label_count();
  Chart chart{Triangular<double>(n, 0.0), Triangular<int>(n, 0), Triangular<int>(n, -1)};
  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      const int first = (i == 0 && j == n) ? 1 : 0;
      int best_l = first;
      double best = -std::numeric_limits<double>::infinity();
      for (int l = first; l < labels; ++l) {
        double s = scores(i, j, l);
        if (gold && (*gold)(i, j) != l) s += 1.0;
        if (s > best) {
          best = s;
          best_l = l;
        }
      }
      if (len >= 2) {
        int best_k = i + 1;
        double best_split = -std::numeric_limits<double>::infinity();
        for (int k = i + 1; k < j; ++k) {
          const double s = chart.best_score(i, k) + chart.best_score(k, j);
          if (s > best_split) {
            best_split = s;
            best_k = k;
          }
        }
        best += best_split;
        chart.best_split(i, j) = best_k;
      }
      chart.best_score(i, j) = best;
      chart.best_label(i, j) = best_l;
    }
  }
  return chart;
}

Tree chart_tree(const Chart& chart, const Vocabulary& labels, const std::vector<ExtendedTag>& tags) {
  return build_tree(chart, labels, tags, 0, chart.best_score.length());
}

Tree cky_decode(const SpanScores& scores, const Vocabulary& labels, const std::vector<ExtendedTag>& tags,
                std::size_t max_len) {
  const int n = scores.length();
  if (n == 0) throw Error("cannot decode an empty sentence");
  if (static_cast<std::size_t>(n) > max_len)
    throw Error("sentence length " + std::to_string(n) + " exceeds max_len " + std::to_string(max_len));
  if (tags.size() != static_cast<std::size_t>(n)) throw Error("tag count does not match the score table");
  if (scores.label_count() != labels.size()) throw Error("score table and label inventory disagree");
  if (labels.size() < 2) throw Error("label inventory has no non-empty label");
  return chart_tree(build_chart(scores), labels, tags);
}

Tree loss_augmented_decode(const SpanScores& scores, const Tree& gold, const Vocabulary& labels,
                           const std::vector<ExtendedTag>& tags) {
  const int n = scores.length();
  if (n == 0) throw Error("cannot decode an empty sentence");
  if (tags.size() != static_cast<std::size_t>(n)) throw Error("tag count does not match the score table");
  if (scores.label_count() != labels.size()) throw Error("score table and label inventory disagree");
  const auto table = gold_table(gold, labels, n);
  return chart_tree(build_chart(scores, &table), labels, tags);
}

// Loss -----------------------------------------------------------------------

namespace {

/// Adds the hinge subgradient for one sentence into `grads`; returns the loss.
double accumulate_loss(const ParserModel& model, const std::vector<ExtendedTag>& tags, const Tree& gold,
                       ModelParams* grads, Tree* predicted) {
  const int n = static_cast<int>(tags.size());
  if (static_cast<int>(gold.leaf_count()) != n)
    throw Error("gold tree has " + std::to_string(gold.leaf_count()) + " leaves but the sentence has " +
                std::to_string(n) + " tags");
  ForwardPass pass(model, tags);
  const SpanScores& scores = pass.scores();
  const auto table = gold_table(gold, model.labels, n);
  const Chart chart = build_chart(scores, &table);
  Tree best = chart_tree(chart, model.labels, tags);

  const auto gold_spans = tree_chart_spans(gold, model.labels);
  const auto pred_spans = tree_chart_spans(best, model.labels);
  double gold_score = 0.0;
  for (const auto& s : gold_spans) gold_score += scores(s.start, s.end, s.label);
  const double loss = chart.best_score(0, n) - gold_score;
  if (predicted) *predicted = std::move(best);
  if (loss <= 0.0) return 0.0;
  if (grads) {
    Matrix d_scores = Matrix::Zero(scores.data().rows(), scores.data().cols());
    for (const auto& s : pred_spans) d_scores(SpanScores::index(n, s.start, s.end), s.label) += 1.0;
    for (const auto& s : gold_spans) d_scores(SpanScores::index(n, s.start, s.end), s.label) -= 1.0;
    pass.backward(d_scores, *grads);
  }
  return loss;
}

}  // namespace

LossResult loss_and_gradients(const ParserModel& model, const std::vector<ExtendedTag>& tags, const Tree& gold) {
  LossResult r;
  r.grads = model.params.zeros_like();
  r.loss = accumulate_loss(model, tags, gold, &r.grads, &r.predicted);
  return r;
}

double hinge_loss(const ParserModel& model, const std::vector<ExtendedTag>& tags, const Tree& gold) {
  return accumulate_loss(model, tags, gold, nullptr, nullptr);
}

// Training -------------------------------------------------------------------

TrainConfig TrainConfig::paper() {
  TrainConfig c;
  c.batch_size = 32;
  c.learning_rate = 5e-5;
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (batch_size <= 0) throw Error("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error("learning_rate must be positive and finite");
  if (checkpoint_every < 0) throw Error("checkpoint_every must be >= 0");
  if (threads <= 0) throw Error("threads must be positive");
}

std::vector<ExtendedTag> leaf_inputs(const Tree& tree, bool lexicalized) {
  std::vector<ExtendedTag> out;
  for (auto& tok : tree.tokens()) {
    if (lexicalized)
      out.push_back(ExtendedTag{tok, {}});
    else
      out.push_back(ExtendedTag::parse(tok));
  }
  return out;
}

std::vector<ParseOutcome> parse_corpus(const ParserModel& model,
                                       const std::vector<std::vector<ExtendedTag>>& sentences) {
  std::vector<ParseOutcome> out;
  out.reserve(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    ParseOutcome o;
    try {
      const auto& tags = sentences[k];
      if (tags.empty()) throw Error("empty sentence");
      const Matrix fence = encode(model, embed_sequence(model, tags));
      o.tree = debinarize(cky_decode(span_scores(model, fence), model.labels, tags,
                                     static_cast<std::size_t>(model.config.max_len)));
    } catch (const Error& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::string format_train_log(const std::vector<EpochLog>& log) {
  std::string out;
  for (const auto& e : log) out += fmt::format("{}\t{:.6f}\t{:.2f}\n", e.epoch, e.train_loss, e.dev_f1);
  return out;
}

namespace {

double dev_f1(const ParserModel& model, const std::vector<std::vector<ExtendedTag>>& inputs,
              const std::vector<Tree>& gold) {
  auto parsed = parse_corpus(model, inputs);
  std::vector<Tree> g, p;
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    g.push_back(gold[k]);
    if (parsed[k].tree) {
      p.push_back(*parsed[k].tree);
    } else {
      // Flat stand-in so a failed sentence still counts against recall.
      std::vector<Tree> kids;
      for (const Tree* pre : gold[k].preterminals()) kids.push_back(*pre);
      p.push_back(Tree::node("<failed>", std::move(kids)));
    }
  }
  return score_corpus(g, p).fscore;
}

class AdamState {
 public:
  AdamState(const ModelParams& params, const TrainConfig& cfg) : cfg_(cfg) {
    params.visit([&](const std::string&, const Matrix& m) {
      m_.push_back(Matrix::Zero(m.rows(), m.cols()));
      v_.push_back(Matrix::Zero(m.rows(), m.cols()));
    });
  }

  void step(ModelParams& params, const ModelParams& grads) {
    ++t_;
    std::vector<const Matrix*> g;
    grads.visit([&](const std::string&, const Matrix& m) { g.push_back(&m); });
    std::size_t k = 0;
    const double lr = cfg_.learning_rate;
    if (cfg_.optimizer == Optimizer::Sgd) {
      params.visit([&](const std::string&, Matrix& p) { p -= lr * *g[k++]; });
      return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    params.visit([&](const std::string&, Matrix& p) {
      Matrix& m = m_[k];
      Matrix& v = v_[k];
      const Matrix& gk = *g[k];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * gk;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * gk.cwiseProduct(gk);
      p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.epsilon);
      ++k;
    });
  }

 private:
  const TrainConfig& cfg_;
  std::vector<Matrix> m_, v_;
  int t_ = 0;
};

}  // namespace

TrainResult train(const std::vector<Tree>& train_trees, const std::vector<Tree>& dev_trees,
                  const ModelConfig& mconfig, const TrainConfig& tconfig, bool lexicalized) {
  if (train_trees.empty()) throw Error("empty training set");
  tconfig.validate();
  mconfig.validate();

  // Vocabularies and labels come from the training trees only.
  std::set<std::string> pos_set, feature_set, label_set;
  std::vector<std::vector<ExtendedTag>> train_inputs;
  for (const auto& t : train_trees) {
    train_inputs.push_back(leaf_inputs(t, lexicalized));
    for (const auto& tag : train_inputs.back()) {
      pos_set.insert(tag.pos);
      feature_set.insert(tag.features.begin(), tag.features.end());
    }
    std::vector<const Tree*> stack{&t};
    while (!stack.empty()) {
      const Tree* node = stack.back();
      stack.pop_back();
      if (node->is_leaf() || node->is_preterminal()) continue;
      if (node->label != kEmptyLabel) label_set.insert(node->label);
      for (const auto& c : node->children) stack.push_back(&c);
    }
    if (static_cast<int>(train_inputs.back().size()) > mconfig.max_len)
      throw Error("training sentence longer than max_len " + std::to_string(mconfig.max_len));
  }
  Vocabulary pos_vocab("<unk>"), feature_vocab("<unk>"), labels(kEmptyLabel);
  for (const auto& s : pos_set) pos_vocab.add(s);
  for (const auto& s : feature_set) feature_vocab.add(s);
  for (const auto& s : label_set) labels.add(s);

  TrainResult result;
  result.model = init_model(mconfig, std::move(pos_vocab), std::move(feature_vocab), std::move(labels), lexicalized);
  ParserModel& model = result.model;

  // Validate every gold tree up front so bad input fails before training.
  for (const auto& t : train_trees) (void)tree_chart_spans(t, model.labels);

  std::vector<std::vector<ExtendedTag>> dev_inputs;
  std::vector<Tree> dev_gold;
  for (const auto& t : dev_trees) {
    dev_inputs.push_back(leaf_inputs(t, lexicalized));
    dev_gold.push_back(debinarize(t));
  }

  std::string log_text;
  auto record = [&](int epoch, double loss) {
    EpochLog e{epoch, loss, dev_inputs.empty() ? 0.0 : dev_f1(model, dev_inputs, dev_gold)};
    result.log.push_back(e);
    log_text += format_train_log({e});
    if (!tconfig.log_path.empty()) write_file(tconfig.log_path, log_text);
    spdlog::info("epoch {} train_loss {:.4f} dev_F1 {:.2f}", e.epoch, e.train_loss, e.dev_f1);
    return e.dev_f1;
  };

  double init_loss = 0.0;
  for (std::size_t k = 0; k < train_trees.size(); ++k) init_loss += hinge_loss(model, train_inputs[k], train_trees[k]);
  double best_f1 = record(0, init_loss);
  ModelParams best_params = model.params;
  result.best_epoch = 0;

  AdamState optimizer(model.params, tconfig);
  Rng rng(tconfig.seed);
  std::vector<std::size_t> order(train_trees.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(tconfig.batch_size);
  std::vector<ModelParams> slot_grads(std::min(batch, order.size()), model.params.zeros_like());
  std::vector<double> slot_loss(slot_grads.size());
  ModelParams total = model.params.zeros_like();

  for (int epoch = 1; epoch <= tconfig.epochs; ++epoch) {
    if (tconfig.shuffle) rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      auto work = [&](std::size_t slot) {
        slot_grads[slot].visit([](const std::string&, Matrix& m) { m.setZero(); });
        const std::size_t idx = order[start + slot];
        slot_loss[slot] = accumulate_loss(model, train_inputs[idx], train_trees[idx], &slot_grads[slot], nullptr);
      };
      const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(tconfig.threads), count);
      if (workers <= 1) {
        for (std::size_t s = 0; s < count; ++s) work(s);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
          pool.emplace_back([&, w] {
            for (std::size_t s = w; s < count; s += workers) work(s);
          });
        for (auto& th : pool) th.join();
      }
      total.visit([](const std::string&, Matrix& m) { m.setZero(); });
      for (std::size_t s = 0; s < count; ++s) {
        total.add(slot_grads[s]);
        epoch_loss += slot_loss[s];
      }
      optimizer.step(model.params, total);
    }
    if (!model.params.all_finite()) throw Error("parameters became non-finite in epoch " + std::to_string(epoch));
    const double f1 = record(epoch, epoch_loss);
    if (!dev_inputs.empty() && f1 > best_f1) {
      best_f1 = f1;
      best_params = model.params;
      result.best_epoch = epoch;
    }
    if (tconfig.checkpoint_every > 0 && !tconfig.checkpoint_path.empty() && epoch % tconfig.checkpoint_every == 0)
      write_file(tconfig.checkpoint_path + ".epoch" + std::to_string(epoch), save_model(model));
  }
  if (dev_inputs.empty()) {
    result.best_epoch = tconfig.epochs;
  } else {
    model.params = std::move(best_params);
  }
  return result;
}

}  // namespace dexparse
