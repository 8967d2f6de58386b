#include "dexparse/encoder_model.hpp"

#include <cmath>

#include "dexparse/errors.hpp"
#include "dexparse/random.hpp"

namespace dexparse {

namespace {

constexpr double kLayerNormEps = 1e-5;

/// Row-wise layer norm. Writes the normalized rows to `xhat` and the
/// reciprocal standard deviations to `rstd`.
Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, Matrix& xhat,
                  Eigen::VectorXd& rstd) {
  const Eigen::Index rows = x.rows();
  const double width = static_cast<double>(x.cols());
  xhat.resize(x.rows(), x.cols());
  rstd.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).sum() / width;
    const auto centered = x.row(r).array() - mean;
    const double var = centered.square().sum() / width;
    rstd(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = centered * rstd(r);
  }
  Matrix y = xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat, const Eigen::VectorXd& rstd,
                           const Matrix& gain, Matrix& dgain, Matrix& dbias) {
  dgain.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  const double width = static_cast<double>(dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / width;
    const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / width;
    dx.row(r) = rstd(r) * (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx);
  }
  return dx;
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

void check_finite(const Matrix& m, const std::string& where) {
  if (!m.allFinite()) throw Error("non-finite activation in " + where);
}

Matrix gaussian(Rng& rng, int rows, int cols, int fan_in) {
  Matrix m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * scale;
  return m;
}

Matrix uniform(Rng& rng, int rows, int cols, double bound) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

// Config and vocabulary ------------------------------------------------------

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.model_dim = 1024;
  c.num_layers = 8;
  c.num_heads = 8;
  c.head_dim = 64;
  c.ff_dim = 2048;
  c.label_hidden_dim = 250;
  c.max_len = 512;
  return c;
}

void ModelConfig::validate() const {
  if (model_dim <= 0 || model_dim % 2 != 0) throw Error("model_dim must be a positive even number");
  if (num_layers < 0) throw Error("num_layers must be >= 0");
  if (num_layers > 0 && (num_heads <= 0 || head_dim <= 0))
    throw Error("num_heads and head_dim must be positive");
  if (num_layers > 0 && ff_dim <= 0) throw Error("ff_dim must be positive");
  if (label_hidden_dim <= 0) throw Error("label_hidden_dim must be positive");
  if (max_len <= 0) throw Error("max_len must be positive");
}

int Vocabulary::add(std::string item) {
  if (auto it = index_.find(item); it != index_.end()) return it->second;
  const int id = static_cast<int>(items_.size());
  index_.emplace(item, id);
  items_.push_back(std::move(item));
  return id;
}

int Vocabulary::find(const std::string& item) const {
  auto it = index_.find(item);
  return it == index_.end() ? -1 : it->second;
}

int Vocabulary::lookup(const std::string& item) const {
  const int id = find(item);
  return id < 0 ? 0 : id;
}

// Parameters -----------------------------------------------------------------

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.visit([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

void ModelParams::add(const ModelParams& other) {
  std::vector<const Matrix*> src;
  other.visit([&](const std::string&, const Matrix& m) { src.push_back(&m); });
  std::size_t k = 0;
  visit([&](const std::string&, Matrix& m) { m += *src[k++]; });
}

bool ModelParams::all_finite() const {
  bool ok = true;
  visit([&](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

ParserModel init_model(const ModelConfig& config, Vocabulary pos_vocab, Vocabulary feature_vocab,
                       Vocabulary labels, bool lexicalized) {
  config.validate();
  if (labels.size() < 2) throw Error("label set needs at least one non-empty label");
  ParserModel m;
  m.config = config;
  m.lexicalized = lexicalized;
  m.pos_vocab = std::move(pos_vocab);
  m.feature_vocab = std::move(feature_vocab);
  m.labels = std::move(labels);

  Rng rng(config.seed);
  const int d = config.model_dim;
  const int a = config.attention_dim();
  auto& p = m.params;
  p.pos_embedding = uniform(rng, m.pos_vocab.size(), d, 0.1);
  p.feature_embedding = uniform(rng, m.feature_vocab.size(), d, 0.1);
  p.position_encoding = uniform(rng, config.max_len, d, 0.1);
  for (int k = 0; k < config.num_layers; ++k) {
    LayerParams L;
    L.ln1_gain = Matrix::Ones(1, d);
    L.ln1_bias = Matrix::Zero(1, d);
    L.w_query = gaussian(rng, d, a, d);
    L.w_key = gaussian(rng, d, a, d);
    L.w_value = gaussian(rng, d, a, d);
    L.w_out = gaussian(rng, a, d, a);
    L.b_out = Matrix::Zero(1, d);
    L.ln2_gain = Matrix::Ones(1, d);
    L.ln2_bias = Matrix::Zero(1, d);
    L.ff_in = gaussian(rng, d, config.ff_dim, d);
    L.ff_in_bias = Matrix::Zero(1, config.ff_dim);
    L.ff_out = gaussian(rng, config.ff_dim, d, config.ff_dim);
    L.ff_out_bias = Matrix::Zero(1, d);
    p.layers.push_back(std::move(L));
  }
  p.fence_start = uniform(rng, 1, d / 2, 0.1);
  p.fence_end = uniform(rng, 1, d / 2, 0.1);
  const int h = config.label_hidden_dim;
  p.label_w1 = gaussian(rng, d, h, d);
  p.label_b1 = Matrix::Zero(1, h);
  p.label_ln_gain = Matrix::Ones(1, h);
  p.label_ln_bias = Matrix::Zero(1, h);
  p.label_w2 = gaussian(rng, h, m.labels.size() - 1, h);
  p.label_b2 = Matrix::Zero(1, m.labels.size() - 1);
  return m;
}

// Forward --------------------------------------------------------------------

namespace {

Matrix encoder_layer(const LayerParams& L, const ModelConfig& cfg, const Matrix& x,
                     ForwardPass::LayerCache& c) {
  const auto n = x.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
  c.normed1 = layer_norm(x, L.ln1_gain, L.ln1_bias, c.xhat1, c.rstd1);
  c.query = c.normed1 * L.w_query;
  c.key = c.normed1 * L.w_key;
  c.value = c.normed1 * L.w_value;
  c.attended.resize(n, cfg.attention_dim());
  c.probs.resize(static_cast<std::size_t>(cfg.num_heads));
  for (int h = 0; h < cfg.num_heads; ++h) {
    const auto off = h * cfg.head_dim;
    Matrix s = c.query.middleCols(off, cfg.head_dim) * c.key.middleCols(off, cfg.head_dim).transpose() * scale;
    softmax_rows(s);
    c.attended.middleCols(off, cfg.head_dim) = s * c.value.middleCols(off, cfg.head_dim);
    c.probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  Matrix y = c.attended * L.w_out;
  y.rowwise() += L.b_out.row(0);
  c.mid = x + y;
  c.normed2 = layer_norm(c.mid, L.ln2_gain, L.ln2_bias, c.xhat2, c.rstd2);
  c.hidden_pre = c.normed2 * L.ff_in;
  c.hidden_pre.rowwise() += L.ff_in_bias.row(0);
  Matrix z = c.hidden_pre.cwiseMax(0.0) * L.ff_out;
  z.rowwise() += L.ff_out_bias.row(0);
  return c.mid + z;
}

/// Row k = [first half of row k-1 | second half of row k], with learned
/// boundary vectors past either end.
Matrix build_fenceposts(const ModelParams& p, const Matrix& x) {
  const auto n = x.rows();
  const auto half = x.cols() / 2;
  Matrix fence(n + 1, x.cols());
  for (Eigen::Index k = 0; k <= n; ++k) {
    if (k == 0)
      fence.row(k).head(half) = p.fence_start.row(0);
    else
      fence.row(k).head(half) = x.row(k - 1).head(half);
    if (k == n)
      fence.row(k).tail(half) = p.fence_end.row(0);
    else
      fence.row(k).tail(half) = x.row(k).tail(half);
  }
  return fence;
}

SpanScores label_scores(const ParserModel& model, const Matrix& fence, ForwardPass::LabelCache& c) {
  const int n = static_cast<int>(fence.rows()) - 1;
  const auto& p = model.params;
  c.span_vec.resize(SpanScores::span_count(n), fence.cols());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) c.span_vec.row(SpanScores::index(n, i, j)) = fence.row(j) - fence.row(i);
  Matrix hidden = c.span_vec * p.label_w1;
  hidden.rowwise() += p.label_b1.row(0);
  c.hidden = layer_norm(hidden, p.label_ln_gain, p.label_ln_bias, c.xhat, c.rstd);
  Matrix out = c.hidden.cwiseMax(0.0) * p.label_w2;
  out.rowwise() += p.label_b2.row(0);
  SpanScores scores(n, model.label_count());
  scores.data().rightCols(model.label_count() - 1) = out;
  return scores;
}

}  // namespace

Matrix embed_sequence(const ParserModel& model, const std::vector<ExtendedTag>& tags) {
  const int n = static_cast<int>(tags.size());
  if (n > model.config.max_len)
    throw Error("sentence length " + std::to_string(n) + " exceeds max_len " +
                std::to_string(model.config.max_len));
  const auto& p = model.params;
  Matrix x(n, model.config.model_dim);
  for (int i = 0; i < n; ++i) {
    x.row(i) = p.pos_embedding.row(model.pos_vocab.lookup(tags[i].pos)) + p.position_encoding.row(i);
    for (const auto& f : tags[i].features) x.row(i) += p.feature_embedding.row(model.feature_vocab.lookup(f));
  }
  return x;
}

Matrix encode(const ParserModel& model, const Matrix& embedded) {
  check_finite(embedded, "embedding");
  Matrix x = embedded;
  ForwardPass::LayerCache scratch;
  for (int k = 0; k < model.config.num_layers; ++k) {
    x = encoder_layer(model.params.layers[static_cast<std::size_t>(k)], model.config, x, scratch);
    check_finite(x, "layer " + std::to_string(k));
  }
  return build_fenceposts(model.params, x);
}

SpanScores span_scores(const ParserModel& model, const Matrix& fence) {
  ForwardPass::LabelCache scratch;
  return label_scores(model, fence, scratch);
}

ForwardPass::ForwardPass(const ParserModel& model, const std::vector<ExtendedTag>& tags) : model_(model) {
  if (tags.empty()) throw Error("cannot encode an empty sentence");
  Matrix x = embed_sequence(model, tags);
  check_finite(x, "embedding");
  for (const auto& t : tags) {
    pos_ids_.push_back(model.pos_vocab.lookup(t.pos));
    std::vector<int> f;
    for (const auto& feat : t.features) f.push_back(model.feature_vocab.lookup(feat));
    feature_ids_.push_back(std::move(f));
  }
  layers_.resize(static_cast<std::size_t>(model.config.num_layers));
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    x = encoder_layer(model.params.layers[k], model.config, x, layers_[k]);
    check_finite(x, "layer " + std::to_string(k));
  }
  fence_ = build_fenceposts(model.params, x);
  scores_ = label_scores(model, fence_, label_);
  check_finite(scores_.data(), "span scores");
}

std::vector<bool> ForwardPass::activation_pattern() const {
  std::vector<bool> out;
  auto add = [&out](const Matrix& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) out.push_back(m.data()[k] > 0.0);
  };
  for (const auto& c : layers_) add(c.hidden_pre);
  add(label_.hidden);
  return out;
}

void ForwardPass::backward(const Matrix& d_scores, ModelParams& g) const {
  const auto& cfg = model_.config;
  const auto& p = model_.params;
  const int n = scores_.length();
  const int half = cfg.model_dim / 2;

  // Label scorer.
  const Matrix d_out = d_scores.rightCols(model_.label_count() - 1);
  const Matrix relu = label_.hidden.cwiseMax(0.0);
  g.label_w2 += relu.transpose() * d_out;
  g.label_b2.row(0) += d_out.colwise().sum();
  Matrix d_hidden = (d_out * p.label_w2.transpose()).array() * (label_.hidden.array() > 0.0).cast<double>();
  Matrix d_pre = layer_norm_backward(d_hidden, label_.xhat, label_.rstd, p.label_ln_gain, g.label_ln_gain,
                                     g.label_ln_bias);
  g.label_w1 += label_.span_vec.transpose() * d_pre;
  g.label_b1.row(0) += d_pre.colwise().sum();
  const Matrix d_vec = d_pre * p.label_w1.transpose();

  Matrix d_fence = Matrix::Zero(n + 1, cfg.model_dim);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      const auto row = d_vec.row(SpanScores::index(n, i, j));
      d_fence.row(j) += row;
      d_fence.row(i) -= row;
    }

  // Fenceposts.
  Matrix dx = Matrix::Zero(n, cfg.model_dim);
  for (int k = 0; k <= n; ++k) {
    if (k == 0)
      g.fence_start.row(0) += d_fence.row(k).head(half);
    else
      dx.row(k - 1).head(half) += d_fence.row(k).head(half);
    if (k == n)
      g.fence_end.row(0) += d_fence.row(k).tail(half);
    else
      dx.row(k).tail(half) += d_fence.row(k).tail(half);
  }

  // Encoder layers, last to first.
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
  for (int k = cfg.num_layers - 1; k >= 0; --k) {
    const auto& L = p.layers[static_cast<std::size_t>(k)];
    auto& G = g.layers[static_cast<std::size_t>(k)];
    const auto& c = layers_[static_cast<std::size_t>(k)];

    // Feedforward block: x = mid + ff(ln2(mid)).
    const Matrix hidden = c.hidden_pre.cwiseMax(0.0);
    G.ff_out += hidden.transpose() * dx;
    G.ff_out_bias.row(0) += dx.colwise().sum();
    Matrix d_hpre = (dx * L.ff_out.transpose()).array() * (c.hidden_pre.array() > 0.0).cast<double>();
    G.ff_in += c.normed2.transpose() * d_hpre;
    G.ff_in_bias.row(0) += d_hpre.colwise().sum();
    Matrix d_mid = dx + layer_norm_backward(d_hpre * L.ff_in.transpose(), c.xhat2, c.rstd2, L.ln2_gain,
                                            G.ln2_gain, G.ln2_bias);

    // Attention block: mid = input + attn(ln1(input)).
    G.w_out += c.attended.transpose() * d_mid;
    G.b_out.row(0) += d_mid.colwise().sum();
    const Matrix d_att = d_mid * L.w_out.transpose();
    Matrix dq(n, cfg.attention_dim()), dk(n, cfg.attention_dim()), dv(n, cfg.attention_dim());
    for (int h = 0; h < cfg.num_heads; ++h) {
      const auto off = h * cfg.head_dim;
      const Matrix& P = c.probs[static_cast<std::size_t>(h)];
      const auto d_head = d_att.middleCols(off, cfg.head_dim);
      dv.middleCols(off, cfg.head_dim) = P.transpose() * d_head;
      Matrix dP = d_head * c.value.middleCols(off, cfg.head_dim).transpose();
      const Eigen::VectorXd row_dot = (dP.array() * P.array()).rowwise().sum();
      Matrix dS = P.array() * (dP.colwise() - row_dot).array();
      dq.middleCols(off, cfg.head_dim) = dS * c.key.middleCols(off, cfg.head_dim) * scale;
      dk.middleCols(off, cfg.head_dim) = dS.transpose() * c.query.middleCols(off, cfg.head_dim) * scale;
    }
    G.w_query += c.normed1.transpose() * dq;
    G.w_key += c.normed1.transpose() * dk;
    G.w_value += c.normed1.transpose() * dv;
    const Matrix d_normed = dq * L.w_query.transpose() + dk * L.w_key.transpose() + dv * L.w_value.transpose();
    dx = d_mid + layer_norm_backward(d_normed, c.xhat1, c.rstd1, L.ln1_gain, G.ln1_gain, G.ln1_bias);
  }

  // Embeddings.
  for (int i = 0; i < n; ++i) {
    g.pos_embedding.row(pos_ids_[static_cast<std::size_t>(i)]) += dx.row(i);
    g.position_encoding.row(i) += dx.row(i);
    for (int f : feature_ids_[static_cast<std::size_t>(i)]) g.feature_embedding.row(f) += dx.row(i);
  }
}

}  // namespace dexparse
