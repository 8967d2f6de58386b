#include <bit>
#include <cstring>
#include <map>

#include <zlib.h>

#include "dexparse/encoder_model.hpp"
#include "dexparse/errors.hpp"

namespace dexparse {

namespace {

constexpr std::string_view kMagic = "DEXPARSE";
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error("truncated model checkpoint at byte " + std::to_string(pos_));
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(const Matrix& m) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(m.data()), static_cast<uInt>(m.size() * sizeof(double))));
}

void write_vocab(Writer& w, const Vocabulary& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v.items()) w.str(s);
}

Vocabulary read_vocab(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n == 0) throw Error("model checkpoint has an empty vocabulary");
  Vocabulary v(r.str());
  for (std::uint32_t k = 1; k < n; ++k) {
    std::string item = r.str();
    if (v.find(item) >= 0) throw Error("duplicate vocabulary entry '" + item + "' in model checkpoint");
    v.add(std::move(item));
  }
  return v;
}

int to_int(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error("model checkpoint lacks config key '" + key + "'");
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw Error("bad value '" + it->second + "' for config key '" + key + "'");
  }
}

}  // namespace

std::string save_model(const ParserModel& model) {
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  const ModelConfig& c = model.config;
  const std::vector<std::pair<std::string, std::string>> config = {
      {"model_dim", std::to_string(c.model_dim)},
      {"num_layers", std::to_string(c.num_layers)},
      {"num_heads", std::to_string(c.num_heads)},
      {"head_dim", std::to_string(c.head_dim)},
      {"ff_dim", std::to_string(c.ff_dim)},
      {"label_hidden_dim", std::to_string(c.label_hidden_dim)},
      {"max_len", std::to_string(c.max_len)},
      {"seed", std::to_string(c.seed)},
      {"lexicalized", model.lexicalized ? "1" : "0"},
  };
  w.u32(static_cast<std::uint32_t>(config.size()));
  for (const auto& [k, v] : config) {
    w.str(k);
    w.str(v);
  }
  write_vocab(w, model.pos_vocab);
  write_vocab(w, model.feature_vocab);
  write_vocab(w, model.labels);
  std::uint32_t count = 0;
  model.params.visit([&](const std::string&, const Matrix&) { ++count; });
  w.u32(count);
  model.params.visit([&](const std::string& name, const Matrix& m) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    w.raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    w.u32(checksum(m));
  });
  return w.take();
}

ParserModel load_model(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic)
    throw Error("not a dexparse model checkpoint");
  Reader r(bytes.substr(kMagic.size()));
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw Error("unsupported model checkpoint version " + std::to_string(version));

  std::map<std::string, std::string> kv;
  const std::uint32_t nconfig = r.u32();
  for (std::uint32_t k = 0; k < nconfig; ++k) {
    std::string key = r.str();
    kv[key] = r.str();
  }
  ModelConfig c;
  c.model_dim = to_int(kv, "model_dim");
  c.num_layers = to_int(kv, "num_layers");
  c.num_heads = to_int(kv, "num_heads");
  c.head_dim = to_int(kv, "head_dim");
  c.ff_dim = to_int(kv, "ff_dim");
  c.label_hidden_dim = to_int(kv, "label_hidden_dim");
  c.max_len = to_int(kv, "max_len");
  if (auto it = kv.find("seed"); it != kv.end()) c.seed = std::stoull(it->second);
  const bool lexicalized = to_int(kv, "lexicalized") != 0;
  c.validate();

  Vocabulary pos = read_vocab(r);
  Vocabulary feats = read_vocab(r);
  Vocabulary labels = read_vocab(r);
  ParserModel model = init_model(c, std::move(pos), std::move(feats), std::move(labels), lexicalized);

  std::map<std::string, Matrix*> slots;
  model.params.visit([&](const std::string& name, Matrix& m) { slots[name] = &m; });
  const std::uint32_t count = r.u32();
  if (count != slots.size())
    throw Error("model checkpoint has " + std::to_string(count) + " tensors, expected " +
                std::to_string(slots.size()));
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = r.str();
    auto it = slots.find(name);
    if (it == slots.end()) throw Error("unexpected tensor '" + name + "' in model checkpoint");
    Matrix& m = *it->second;
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != m.rows() || cols != m.cols())
      throw Error("tensor '" + name + "' has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                  ", expected " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    r.raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    if (r.u32() != checksum(m)) throw Error("checksum mismatch in tensor '" + name + "'");
    slots.erase(it);
  }
  if (!r.done()) throw Error("trailing bytes after model checkpoint");
  return model;
}

}  // namespace dexparse
