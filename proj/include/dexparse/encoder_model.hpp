#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "dexparse/tree.hpp"
#include "dexparse/treebank_io.hpp"

namespace dexparse {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  int model_dim = 128;
  int num_layers = 2;
  int num_heads = 4;
  int head_dim = 32;
  int ff_dim = 256;
  int label_hidden_dim = 128;
  int max_len = 128;
  std::uint64_t seed = 10;

  /// Laptop-sized defaults.
  static ModelConfig desk() { return {}; }
  /// 1024-dim, 8 layers of 8 heads x 64, feedforward 2048, max length 512.
  static ModelConfig paper();

  int attention_dim() const { return num_heads * head_dim; }
  /// Throws Error on inconsistent sizes.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// String <-> index table. Index 0 is reserved (UNK for inputs, the empty
/// label for the label set).
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::string reserved) { add(std::move(reserved)); }

  int add(std::string item);
  /// -1 when absent.
  int find(const std::string& item) const;
  /// Index, or 0 (the reserved entry) when absent.
  int lookup(const std::string& item) const;
  const std::string& at(int index) const { return items_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(items_.size()); }
  const std::vector<std::string>& items() const { return items_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.items_ == b.items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> index_;
};

struct LayerParams {
  Matrix ln1_gain, ln1_bias;
  Matrix w_query, w_key, w_value;  // model_dim x attention_dim
  Matrix w_out;                    // attention_dim x model_dim
  Matrix b_out;
  Matrix ln2_gain, ln2_bias;
  Matrix ff_in;  // model_dim x ff_dim
  Matrix ff_in_bias;
  Matrix ff_out;  // ff_dim x model_dim
  Matrix ff_out_bias;
};

/// Trainable tensors. Gradients use the same type.
struct ModelParams {
  Matrix pos_embedding;      // (|pos| + 1) x model_dim, row 0 = UNK
  Matrix feature_embedding;  // (|features| + 1) x model_dim, row 0 = UNK
  Matrix position_encoding;  // max_len x model_dim
  std::vector<LayerParams> layers;
  Matrix fence_start;  // model_dim / 2
  Matrix fence_end;    // model_dim / 2
  Matrix label_w1;        // model_dim x label_hidden_dim
  Matrix label_b1;
  Matrix label_ln_gain, label_ln_bias;
  Matrix label_w2;  // label_hidden_dim x (labels - 1); the empty label has no row
  Matrix label_b2;

  /// Calls fn(name, tensor) for every tensor in a fixed order.
  template <typename Fn>
  void visit(Fn&& fn);
  template <typename Fn>
  void visit(Fn&& fn) const;

  ModelParams zeros_like() const;
  /// this += other, tensor by tensor.
  void add(const ModelParams& other);
  bool all_finite() const;
  std::size_t parameter_count() const;
};

/// Everything needed to score a sentence: configuration, vocabularies and
/// weights.
struct ParserModel {
  ModelConfig config;
  bool lexicalized = false;
  Vocabulary pos_vocab{"<unk>"};
  Vocabulary feature_vocab{"<unk>"};
  Vocabulary labels;  // index 0 is the empty label
  ModelParams params;

  int label_count() const { return labels.size(); }
};

/// Builds a model with vocabularies fixed and weights drawn from `config.seed`:
/// uniform(-0.1, 0.1) embeddings, N(0, 1/fan_in) matrices, unit gains, zero biases.
ParserModel init_model(const ModelConfig& config, Vocabulary pos_vocab, Vocabulary feature_vocab,
                       Vocabulary labels, bool lexicalized = false);

/// Span scores for one sentence over all 0 <= i < j <= n, with label
/// column 0 (the empty label) fixed at zero.
class SpanScores {
 public:
  SpanScores() = default;
  SpanScores(int n, int labels) : n_(n), labels_(labels), data_(Matrix::Zero(span_count(n), labels)) {}

  static int span_count(int n) { return n * (n + 1) / 2; }
  /// Row of span (i, j) in the triangular layout.
  static int index(int n, int i, int j) { return i * (n + 1) - i * (i + 1) / 2 + (j - i - 1); }

  int length() const { return n_; }
  int label_count() const { return labels_; }
  double operator()(int i, int j, int label) const { return data_(index(n_, i, j), label); }
  double& operator()(int i, int j, int label) { return data_(index(n_, i, j), label); }
  const Matrix& data() const { return data_; }
  Matrix& data() { return data_; }

 private:
  int n_ = 0;
  int labels_ = 0;
  Matrix data_;
};

/// Row i = pos row + sum of feature rows + position row i. Unknown symbols
/// use row 0. Throws Error when the sentence is longer than max_len.
Matrix embed_sequence(const ParserModel& model, const std::vector<ExtendedTag>& tags);

/// Self-attention stack followed by fencepost construction: (n+1) x model_dim.
Matrix encode(const ParserModel& model, const Matrix& embedded);

SpanScores span_scores(const ParserModel& model, const Matrix& fenceposts);

/// Forward pass with everything kept for backpropagation.
class ForwardPass {
 public:
  ForwardPass(const ParserModel& model, const std::vector<ExtendedTag>& tags);

  const SpanScores& scores() const { return scores_; }
  const Matrix& fenceposts() const { return fence_; }

  /// Accumulates d(objective)/d(params) into `grads` given d(objective)/d(scores).
  /// Column 0 of `d_scores` is ignored.
  void backward(const Matrix& d_scores, ModelParams& grads) const;

  /// Which ReLU inputs are positive, over every layer and the label scorer.
  std::vector<bool> activation_pattern() const;

  struct LayerCache {
    Matrix xhat1, normed1, query, key, value, attended, mid, xhat2, normed2, hidden_pre;
    Eigen::VectorXd rstd1, rstd2;
    std::vector<Matrix> probs;
  };
  struct LabelCache {
    Matrix span_vec, xhat, hidden;
    Eigen::VectorXd rstd;
  };

 private:

  const ParserModel& model_;
  std::vector<int> pos_ids_;
  std::vector<std::vector<int>> feature_ids_;
  std::vector<LayerCache> layers_;
  Matrix fence_;
  LabelCache label_;
  SpanScores scores_;
};

struct LossResult {
  double loss = 0.0;
  ModelParams grads;
  /// Loss-augmented prediction (binarized).
  Tree predicted;
};

/// Structured hinge loss with Hamming span cost and its exact subgradient.
/// `gold` must be binarized with the same leaf count as `tags`.
LossResult loss_and_gradients(const ParserModel& model, const std::vector<ExtendedTag>& tags,
                              const Tree& gold);

/// Hinge loss value only.
double hinge_loss(const ParserModel& model, const std::vector<ExtendedTag>& tags, const Tree& gold);

/// Versioned little-endian container; see README for the layout.
std::string save_model(const ParserModel& model);
ParserModel load_model(std::string_view bytes);

// ---------------------------------------------------------------------------

template <typename Fn>
void ModelParams::visit(Fn&& fn) {
  fn(std::string("pos_embedding"), pos_embedding);
  fn(std::string("feature_embedding"), feature_embedding);
  fn(std::string("position_encoding"), position_encoding);
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& L = layers[k];
    const std::string p = "layers." + std::to_string(k) + ".";
    fn(p + "ln1_gain", L.ln1_gain);
    fn(p + "ln1_bias", L.ln1_bias);
    fn(p + "w_query", L.w_query);
    fn(p + "w_key", L.w_key);
    fn(p + "w_value", L.w_value);
    fn(p + "w_out", L.w_out);
    fn(p + "b_out", L.b_out);
    fn(p + "ln2_gain", L.ln2_gain);
    fn(p + "ln2_bias", L.ln2_bias);
    fn(p + "ff_in", L.ff_in);
    fn(p + "ff_in_bias", L.ff_in_bias);
    fn(p + "ff_out", L.ff_out);
    fn(p + "ff_out_bias", L.ff_out_bias);
  }
  fn(std::string("fence_start"), fence_start);
  fn(std::string("fence_end"), fence_end);
  fn(std::string("label_w1"), label_w1);
  fn(std::string("label_b1"), label_b1);
  fn(std::string("label_ln_gain"), label_ln_gain);
  fn(std::string("label_ln_bias"), label_ln_bias);
  fn(std::string("label_w2"), label_w2);
  fn(std::string("label_b2"), label_b2);
}

template <typename Fn>
void ModelParams::visit(Fn&& fn) const {
  const_cast<ModelParams*>(this)->visit(
      [&fn](const std::string& name, const Matrix& m) { fn(name, m); });
}

}  // namespace dexparse
