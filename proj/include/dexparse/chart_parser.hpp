#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dexparse/encoder_model.hpp"
#include "dexparse/tree.hpp"
#include "dexparse/treebank_io.hpp"

namespace dexparse {

/// Upper-triangular table over fencepost pairs 0 <= i < j <= n.
template <typename T>
class Triangular {
 public:
  Triangular() = default;
  Triangular(int n, T fill) : n_(n), cells_(static_cast<std::size_t>(SpanScores::span_count(n)), fill) {}
  T& operator()(int i, int j) { return cells_[static_cast<std::size_t>(SpanScores::index(n_, i, j))]; }
  const T& operator()(int i, int j) const {
    return cells_[static_cast<std::size_t>(SpanScores::index(n_, i, j))];
  }
  int length() const { return n_; }

 private:
  int n_ = 0;
  std::vector<T> cells_;
};

struct Chart {
  Triangular<double> best_score;
  Triangular<int> best_label;
  Triangular<int> best_split;  // -1 for single-token spans
};

struct ChartSpan {
  int start = 0;
  int end = 0;
  int label = 0;  // index into the label vocabulary, 0 = empty
};

/// Full bracketing of a binarized tree in pre-order, one entry per span.
/// Single-token spans without a phrasal node carry the empty label. Throws
/// Error when the tree is not binary, the root has no label, or a label is
/// missing from `labels`.
std::vector<ChartSpan> tree_chart_spans(const Tree& binarized, const Vocabulary& labels);

/// Sum of span scores over a binarized tree.
double tree_score(const SpanScores& scores, const Tree& binarized, const Vocabulary& labels);

/// Exact CKY. With `gold` set (the gold label of every span, 0 where the
/// gold tree has no constituent), every (i, j, l) with l != gold(i, j) gets
/// +1 (Hamming cost). The root takes a non-empty label;
/// ties go to the lowest label index, then the smallest split point.
Chart build_chart(const SpanScores& scores, const Triangular<int>* gold = nullptr);

/// Binarized tree read off a chart; preterminals come from `tags`.
Tree chart_tree(const Chart& chart, const Vocabulary& labels, const std::vector<ExtendedTag>& tags);

Tree cky_decode(const SpanScores& scores, const Vocabulary& labels, const std::vector<ExtendedTag>& tags,
                std::size_t max_len = std::numeric_limits<std::size_t>::max());

Tree loss_augmented_decode(const SpanScores& scores, const Tree& gold, const Vocabulary& labels,
                           const std::vector<ExtendedTag>& tags);

// Training -------------------------------------------------------------------

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  int epochs = 200;
  int batch_size = 8;
  double learning_rate = 1e-3;
  std::uint64_t seed = 10;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool shuffle = true;
  /// Write an intermediate checkpoint every N epochs (0 = never).
  int checkpoint_every = 0;
  std::string checkpoint_path;
  /// "epoch<TAB>train_loss<TAB>dev_F1" per epoch; empty = no file.
  std::string log_path;
  /// Worker threads for per-sentence gradients; reduction order is fixed.
  int threads = 1;

  static TrainConfig desk() { return {}; }
  /// Batch 32, learning rate 5e-5.
  static TrainConfig paper();
  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_f1 = 0.0;
};

struct TrainResult {
  ParserModel model;
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

/// Model inputs read off the leaves of a (delexicalized) tree.
std::vector<ExtendedTag> leaf_inputs(const Tree& tree, bool lexicalized);

/// Mini-batch subgradient training of the hinge loss on binarized trees.
/// Epoch 0 is the untrained model. Returns the epoch with the best dev F1
/// (the last epoch when `dev` is empty).
TrainResult train(const std::vector<Tree>& train_trees, const std::vector<Tree>& dev_trees,
                  const ModelConfig& mconfig, const TrainConfig& tconfig, bool lexicalized = false);

struct ParseOutcome {
  std::optional<Tree> tree;  // debinarized
  std::string error;
};

/// embed -> encode -> score -> CKY -> debinarize, one entry per sentence.
std::vector<ParseOutcome> parse_corpus(const ParserModel& model,
                                       const std::vector<std::vector<ExtendedTag>>& sentences);

std::string format_train_log(const std::vector<EpochLog>& log);

}  // namespace dexparse
