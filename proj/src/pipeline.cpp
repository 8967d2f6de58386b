#include "dexparse/pipeline.hpp"

#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include "dexparse/pos_tagger.hpp"
#include "dexparse/tag_map.hpp"
#include "dexparse/treebank_io.hpp"

namespace dexparse {

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("expected a boolean, got '" + v + "'");
}

template <typename T>
T to_number(const std::string& v) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw Error("expected a number, got '" + v + "'");
  return out;
}

char to_char(const std::string& v) {
  if (v.size() != 1) throw Error("expected a single character, got '" + v + "'");
  return v[0];
}

std::vector<std::string> split_words(const std::string& v) {
  std::istringstream in(v);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_words(const auto& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

Field str_field(std::string s, std::string k, std::string& ref) {
  return {std::move(s), std::move(k), [&ref] { return ref; }, [&ref](const std::string& v) { ref = v; }};
}
Field int_field(std::string s, std::string k, int& ref) {
  return {std::move(s), std::move(k), [&ref] { return std::to_string(ref); },
          [&ref](const std::string& v) { ref = to_number<int>(v); }};
}
Field u64_field(std::string s, std::string k, std::uint64_t& ref) {
  return {std::move(s), std::move(k), [&ref] { return std::to_string(ref); },
          [&ref](const std::string& v) { ref = to_number<std::uint64_t>(v); }};
}
Field double_field(std::string s, std::string k, double& ref) {
  return {std::move(s), std::move(k), [&ref] { return fmt_double(ref); },
          [&ref](const std::string& v) { ref = to_number<double>(v); }};
}
Field bool_field(std::string s, std::string k, bool& ref) {
  return {std::move(s), std::move(k), [&ref] { return std::string(ref ? "true" : "false"); },
          [&ref](const std::string& v) { ref = to_bool(v); }};
}
Field char_field(std::string s, std::string k, char& ref) {
  return {std::move(s), std::move(k), [&ref] { return std::string(1, ref); },
          [&ref](const std::string& v) { ref = to_char(v); }};
}

std::vector<Field> fields(PipelineConfig& c) {
  std::vector<Field> f;
  f.push_back({"run", "mode", [&c] { return std::string(c.mode == Mode::Lexicalized ? "lexicalized" : "delexicalized"); },
               [&c](const std::string& v) {
                 if (v == "delexicalized")
                   c.mode = Mode::Delexicalized;
                 else if (v == "lexicalized")
                   c.mode = Mode::Lexicalized;
                 else
                   throw Error("mode must be delexicalized or lexicalized, got '" + v + "'");
               }});
  f.push_back(bool_field("run", "use_gold_tags", c.use_gold_tags));
  f.push_back(bool_field("run", "apply_mapping", c.apply_mapping));
  f.push_back(bool_field("run", "keep_morphology", c.transform.keep_morphology));
  f.push_back(int_field("run", "tagger_epochs", c.tagger_epochs));

  auto& p = c.paths;
  f.push_back(str_field("paths", "treebank", p.treebank));
  f.push_back(str_field("paths", "dev_treebank", p.dev_treebank));
  f.push_back(str_field("paths", "tagged", p.tagged));
  f.push_back(str_field("paths", "tokens", p.tokens));
  f.push_back(str_field("paths", "tag_map", p.tag_map));
  f.push_back(str_field("paths", "tagger", p.tagger));
  f.push_back(str_field("paths", "model", p.model));
  f.push_back(str_field("paths", "predicted", p.predicted));
  f.push_back(str_field("paths", "latin_lexicon", p.latin_lexicon));
  f.push_back(str_field("paths", "output", p.output));
  f.push_back(str_field("paths", "report", p.report));
  f.push_back(str_field("paths", "log", p.log));

  auto& m = c.model;
  f.push_back(int_field("model", "model_dim", m.model_dim));
  f.push_back(int_field("model", "num_layers", m.num_layers));
  f.push_back(int_field("model", "num_heads", m.num_heads));
  f.push_back(int_field("model", "head_dim", m.head_dim));
  f.push_back(int_field("model", "ff_dim", m.ff_dim));
  f.push_back(int_field("model", "label_hidden_dim", m.label_hidden_dim));
  f.push_back(int_field("model", "max_len", m.max_len));
  f.push_back(u64_field("model", "seed", m.seed));

  auto& t = c.train;
  f.push_back(int_field("train", "epochs", t.epochs));
  f.push_back(int_field("train", "batch_size", t.batch_size));
  f.push_back(double_field("train", "learning_rate", t.learning_rate));
  f.push_back(u64_field("train", "seed", t.seed));
  f.push_back({"train", "optimizer", [&t] { return std::string(t.optimizer == Optimizer::Adam ? "adam" : "sgd"); },
               [&t](const std::string& v) {
                 if (v == "adam")
                   t.optimizer = Optimizer::Adam;
                 else if (v == "sgd")
                   t.optimizer = Optimizer::Sgd;
                 else
                   throw Error("optimizer must be adam or sgd, got '" + v + "'");
               }});
  f.push_back(double_field("train", "beta1", t.beta1));
  f.push_back(double_field("train", "beta2", t.beta2));
  f.push_back(double_field("train", "epsilon", t.epsilon));
  f.push_back(bool_field("train", "shuffle", t.shuffle));
  f.push_back(int_field("train", "checkpoint_every", t.checkpoint_every));
  f.push_back(int_field("train", "threads", t.threads));

  auto& x = c.transform;
  f.push_back(char_field("transform", "edge_separator", x.edge_separator));
  f.push_back(str_field("transform", "trace_label", x.trace_label));
  f.push_back({"transform", "trace_token_patterns", [&x] { return join_words(x.trace_token_patterns); },
               [&x](const std::string& v) { x.trace_token_patterns = split_words(v); }});
  f.push_back(char_field("transform", "morph_separator", x.morph_separator));

  auto& e = c.eval;
  f.push_back({"eval", "punctuation_tags", [&e] { return join_words(e.punctuation_tags); },
               [&e](const std::string& v) {
                 auto w = split_words(v);
                 e.punctuation_tags = {w.begin(), w.end()};
               }});
  f.push_back({"eval", "ignore_labels", [&e] { return join_words(e.ignore_labels); },
               [&e](const std::string& v) {
                 auto w = split_words(v);
                 e.ignore_labels = {w.begin(), w.end()};
               }});
  f.push_back({"eval", "label_equivalences",
               [&e] {
                 std::vector<std::string> pairs;
                 for (const auto& [a, b] : e.label_equivalences) pairs.push_back(a + ":" + b);
                 return join_words(pairs);
               },
               [&e](const std::string& v) {
                 e.label_equivalences.clear();
                 for (const auto& w : split_words(v)) {
                   const auto colon = w.find(':');
                   if (colon == std::string::npos || colon == 0 || colon + 1 == w.size())
                     throw Error("label equivalence must look like FROM:TO, got '" + w + "'");
                   e.label_equivalences[w.substr(0, colon)] = w.substr(colon + 1);
                 }
               }});
  f.push_back(bool_field("eval", "include_root", e.include_root));
  return f;
}

std::size_t line_of(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::string load_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw StageError("load", "no " + what + " path given", 2);
  if (!std::filesystem::is_regular_file(path)) throw StageError("load", what + " '" + path + "' does not exist", 2);
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw StageError("load", e.what(), 2);
  }
}

std::vector<Tree> load_treebank(const std::string& path, const std::string& what) {
  const std::string text = load_input(path, what);
  std::vector<std::string> notes;
  try {
    auto trees = parse_bracketed(text, &notes);
    for (const auto& n : notes) spdlog::debug("{}: {}", path, n);
    return trees;
  } catch (const ParseError& e) {
    throw StageError("load", fmt::format("{}: line {}: {}", path, line_of(text, e.offset()), e.what()));
  } catch (const Error& e) {
    throw StageError("load", path + ": " + e.what());
  }
}

std::vector<Tree> strip_all(const std::vector<Tree>& trees, const TransformConfig& cfg, const std::string& source) {
  std::vector<Tree> out;
  out.reserve(trees.size());
  for (std::size_t k = 0; k < trees.size(); ++k) {
    try {
      out.push_back(strip_annotations(trees[k], cfg));
    } catch (const Error& e) {
      throw StageError("strip", fmt::format("{}: tree {}: {}", source, k + 1, e.what()));
    }
  }
  return out;
}

void write_output(const std::string& path, std::string_view contents) {
  try {
    write_file(path, contents);
  } catch (const Error& e) {
    throw StageError("write", e.what());
  }
}

std::string require_output(const std::string& path, const std::string& what) {
  if (path.empty()) throw StageError("config", "no " + what + " path given", 2);
  return path;
}

void write_manifest(const std::string& output, const std::string& command, const PipelineConfig& cfg,
                    const std::vector<std::string>& inputs) {
  std::string text = "# dexparse manifest\ncommand=" + command + "\n";
  text += cfg.snapshot();
  text += "\n[inputs]\n";
  for (const auto& path : inputs) {
    if (path.empty()) continue;
    const std::string bytes = read_file(path);
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    text += fmt::format("{}=crc32:{:08x} bytes:{}\n", path, crc, bytes.size());
  }
  write_output(output + ".manifest", text);
}

TagMapTable load_tag_map(const PipelineConfig& cfg) {
  if (cfg.paths.tag_map.empty()) return default_tag_map();
  const std::string text = load_input(cfg.paths.tag_map, "tag map");
  try {
    return read_tag_map(text);
  } catch (const Error& e) {
    throw StageError("load", cfg.paths.tag_map + ": " + e.what());
  }
}

std::vector<TaggedSentence> load_tagged(const std::string& path) {
  const std::string text = load_input(path, "tagged corpus");
  std::vector<std::string> notes;
  try {
    auto out = read_tagged_corpus(text, &notes);
    for (const auto& n : notes) spdlog::warn("{}: {}", path, n);
    return out;
  } catch (const Error& e) {
    throw StageError("load", path + ": " + e.what());
  }
}

TaggerModel load_tagger(const std::string& path) {
  const std::string text = load_input(path, "tagger model");
  try {
    return TaggerModel::load(text);
  } catch (const Error& e) {
    throw StageError("load", path + ": " + e.what());
  }
}

std::vector<TaggedSentence> tag_tokens(const PipelineConfig& cfg) {
  const std::string text = load_input(cfg.paths.tokens, "token corpus");
  const TaggerModel tagger = load_tagger(cfg.paths.tagger);
  std::vector<TaggedSentence> out;
  try {
    for (const auto& tokens : read_token_corpus(text)) out.push_back(tagger.tag(tokens));
  } catch (const Error& e) {
    throw StageError("tag", e.what());
  }
  return out;
}

/// Tokens and extended tags of a stripped gold tree.
TaggedSentence gold_sentence(const Tree& tree, std::size_t index) {
  TaggedSentence s;
  for (const Tree* pre : tree.preterminals()) {
    if (pre->children.size() != 1)
      throw StageError("load", fmt::format("gold tree {}: preterminal '{}' has several leaves", index + 1, pre->label));
    s.tokens.push_back(*pre->children[0].token);
    try {
      s.tags.push_back(ExtendedTag::parse(pre->label));
    } catch (const Error& e) {
      throw StageError("load", fmt::format("gold tree {}: {}", index + 1, e.what()));
    }
  }
  return s;
}

}  // namespace

// Config ----------------------------------------------------------------------

PipelineConfig PipelineConfig::preset(const std::string& name) {
  PipelineConfig c;
  if (name == "desk") return c;
  if (name == "paper") {
    c.model = ModelConfig::paper();
    c.train = TrainConfig::paper();
    return c;
  }
  throw Error("unknown preset '" + name + "' (expected desk or paper)");
}

void PipelineConfig::set_seed(std::uint64_t seed) {
  model.seed = seed;
  train.seed = seed;
}

std::string PipelineConfig::snapshot() const {
  PipelineConfig copy = *this;
  std::string out, section;
  for (const auto& f : fields(copy)) {
    if (f.section != section) {
      section = f.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += f.key + "=" + f.get() + "\n";
  }
  return out;
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError(e.message(), e.line());
  }
  auto registry = fields(base);
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error("config key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      auto it = std::find_if(registry.begin(), registry.end(),
                             [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == registry.end()) throw Error("unknown config key '" + section + "." + key + "'");
      try {
        it->set(value.get_value<std::string>());
      } catch (const Error& e) {
        throw Error("config key '" + section + "." + key + "': " + e.what());
      }
    }
  }
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  const std::string text = load_input(path, "config file");
  try {
    return parse_config(text, std::move(base));
  } catch (const Error& e) {
    throw StageError("config", path + ": " + e.what(), 2);
  }
}

// Shared steps -----------------------------------------------------------------

std::vector<Tree> prepare_training_trees(const std::string& text, const PipelineConfig& cfg,
                                         const std::string& source) {
  std::vector<Tree> parsed;
  try {
    parsed = parse_bracketed(text);
  } catch (const ParseError& e) {
    throw StageError("load", fmt::format("{}: line {}: {}", source, line_of(text, e.offset()), e.what()));
  }
  if (parsed.empty()) throw StageError("load", source + ": no trees");
  auto stripped = strip_all(parsed, cfg.transform, source);
  std::vector<Tree> out;
  out.reserve(stripped.size());
  for (std::size_t k = 0; k < stripped.size(); ++k) {
    Tree t = std::move(stripped[k]);
    std::vector<const Tree*> stack{&t};
    while (!stack.empty()) {
      const Tree* node = stack.back();
      stack.pop_back();
      if (node->is_leaf() || node->is_preterminal()) continue;
      if (is_reserved_label(node->label))
        throw StageError("binarize", fmt::format("{}: tree {}: label '{}' uses a reserved symbol", source, k + 1, node->label));
      for (const auto& c : node->children) stack.push_back(&c);
    }
    if (cfg.mode == Mode::Delexicalized) {
      try {
        t = delexicalize_tree(t, cfg.transform);
      } catch (const Error& e) {
        throw StageError("delexicalize", fmt::format("{}: tree {}: {}", source, k + 1, e.what()));
      }
    }
    try {
      out.push_back(binarize(t));
    } catch (const Error& e) {
      throw StageError("binarize", fmt::format("{}: tree {}: {}", source, k + 1, e.what()));
    }
  }
  return out;
}

std::vector<ExtendedTag> model_inputs(const TaggedSentence& sentence, const PipelineConfig& cfg,
                                      const TagMapTable& table) {
  const TaggedSentence mapped = cfg.apply_mapping ? map_sentence(sentence, table) : sentence;
  std::vector<ExtendedTag> out;
  for (const auto& s : delexicalize_sentence(mapped, cfg.transform))
    out.push_back(ExtendedTag::parse(s, cfg.transform.morph_separator));
  return out;
}

Tree relexicalize(const Tree& parsed, const TaggedSentence& sentence) {
  Tree out = parsed;
  auto pres = out.preterminals();
  if (pres.size() != sentence.size())
    throw Error("parse has " + std::to_string(pres.size()) + " leaves but the sentence has " +
                std::to_string(sentence.size()) + " tokens");
  for (std::size_t i = 0; i < pres.size(); ++i) {
    pres[i]->label = sentence.tags[i].str();
    pres[i]->children.assign(1, Tree::leaf(sentence.tokens[i]));
  }
  return out;
}

// Commands ---------------------------------------------------------------------

std::string cmd_train(const PipelineConfig& cfg) {
  const std::string text = load_input(cfg.paths.treebank, "treebank");
  std::string dev_text;
  if (!cfg.paths.dev_treebank.empty()) dev_text = load_input(cfg.paths.dev_treebank, "dev treebank");
  const std::string model_path = require_output(cfg.paths.model, "model checkpoint");
  try {
    cfg.model.validate();
    cfg.train.validate();
  } catch (const Error& e) {
    throw StageError("config", e.what(), 2);
  }

  auto train_trees = prepare_training_trees(text, cfg, cfg.paths.treebank);
  std::vector<Tree> dev_trees;
  if (!cfg.paths.dev_treebank.empty()) dev_trees = prepare_training_trees(dev_text, cfg, cfg.paths.dev_treebank);

  TrainConfig tconfig = cfg.train;
  tconfig.log_path = cfg.paths.log.empty() ? model_path + ".log" : cfg.paths.log;
  tconfig.checkpoint_path = model_path;
  TrainResult result;
  try {
    result = train(train_trees, dev_trees, cfg.model, tconfig, cfg.mode == Mode::Lexicalized);
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError("train", e.what());
  }
  write_output(model_path, save_model(result.model));
  write_manifest(model_path, "train", cfg, {cfg.paths.treebank, cfg.paths.dev_treebank});
  return fmt::format("trained on {} trees for {} epochs; kept epoch {}; {} labels, {} parameters",
                     train_trees.size(), tconfig.epochs, result.best_epoch, result.model.labels.size() - 1,
                     result.model.params.parameter_count());
}

std::string cmd_parse(const PipelineConfig& cfg) {
  const std::string model_bytes = load_input(cfg.paths.model, "model checkpoint");
  ParserModel model;
  try {
    model = load_model(model_bytes);
  } catch (const Error& e) {
    throw StageError("load", cfg.paths.model + ": " + e.what(), 2);
  }
  const std::string output = require_output(cfg.paths.output, "output");

  std::vector<TaggedSentence> sentences;
  std::vector<std::string> inputs{cfg.paths.model};
  if (cfg.use_gold_tags) {
    if (cfg.paths.treebank.empty()) throw StageError("config", "use_gold_tags needs a gold treebank", 2);
    auto gold = strip_all(load_treebank(cfg.paths.treebank, "gold treebank"), cfg.transform, cfg.paths.treebank);
    for (std::size_t k = 0; k < gold.size(); ++k) sentences.push_back(gold_sentence(gold[k], k));
    inputs.push_back(cfg.paths.treebank);
  } else if (!cfg.paths.tagged.empty()) {
    sentences = load_tagged(cfg.paths.tagged);
    inputs.push_back(cfg.paths.tagged);
  } else if (!cfg.paths.tokens.empty()) {
    sentences = tag_tokens(cfg);
    inputs.push_back(cfg.paths.tokens);
    inputs.push_back(cfg.paths.tagger);
  } else {
    throw StageError("config", "parse needs a tagged corpus, a token corpus with a tagger, or use_gold_tags", 2);
  }

  TagMapTable table;
  if (cfg.apply_mapping) {
    table = load_tag_map(cfg);
    inputs.push_back(cfg.paths.tag_map);
  }
  if (model.lexicalized != (cfg.mode == Mode::Lexicalized))
    spdlog::warn("checkpoint is {} but mode is {}; following the checkpoint",
                 model.lexicalized ? "lexicalized" : "delexicalized",
                 cfg.mode == Mode::Lexicalized ? "lexicalized" : "delexicalized");
  if (model.feature_vocab.size() == 1 && cfg.transform.keep_morphology && !model.lexicalized)
    spdlog::warn("checkpoint has no morphological features; consider --no-morph");

  std::vector<std::vector<ExtendedTag>> model_in;
  for (const auto& s : sentences) {
    if (model.lexicalized) {
      std::vector<ExtendedTag> words;
      for (const auto& tok : s.tokens) words.push_back(ExtendedTag{tok, {}});
      model_in.push_back(std::move(words));
    } else {
      try {
        model_in.push_back(model_inputs(s, cfg, table));
      } catch (const Error& e) {
        throw StageError("map", e.what());
      }
    }
  }

  const auto outcomes = parse_corpus(model, model_in);
  std::string text;
  std::size_t failed = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (!outcomes[k].tree) {
      ++failed;
      spdlog::warn("sentence {}: {}", k + 1, outcomes[k].error);
      continue;
    }
    text += serialize_tree(relexicalize(*outcomes[k].tree, sentences[k])) + "\n";
  }
  write_output(output, text);
  write_manifest(output, "parse", cfg, inputs);
  return fmt::format("parsed {} of {} sentences ({} failed)", outcomes.size() - failed, outcomes.size(), failed);
}

std::string cmd_eval(const PipelineConfig& cfg) {
  auto gold = strip_all(load_treebank(cfg.paths.treebank, "gold treebank"), cfg.transform, cfg.paths.treebank);
  auto pred = strip_all(load_treebank(cfg.paths.predicted, "predicted treebank"), cfg.transform, cfg.paths.predicted);
  EvalResult result;
  try {
    result = score_corpus(gold, pred, cfg.eval);
  } catch (const Error& e) {
    throw StageError("eval", e.what(), 2);
  }
  for (const auto& s : result.sentences)
    if (!s.error.empty()) spdlog::warn("sentence {}: {}", s.index, s.error);
  const std::string report = cfg.paths.report.empty() ? cfg.paths.predicted + ".eval" : cfg.paths.report;
  write_output(report, format_report(result));
  write_manifest(report, "eval", cfg, {cfg.paths.treebank, cfg.paths.predicted});
  return format_summary(result);
}

std::string cmd_tag(const PipelineConfig& cfg) {
  const std::string output = require_output(cfg.paths.output, "output");
  auto tagged = tag_tokens(cfg);
  write_output(output, write_tagged_corpus(tagged));
  write_manifest(output, "tag", cfg, {cfg.paths.tokens, cfg.paths.tagger});
  return fmt::format("tagged {} sentences", tagged.size());
}

std::string cmd_train_tagger(const PipelineConfig& cfg) {
  auto corpus = load_tagged(cfg.paths.tagged);
  const std::string output = require_output(cfg.paths.tagger, "tagger model");
  TaggerModel model;
  try {
    model = train_tagger(corpus, cfg.tagger_epochs, cfg.train.seed);
  } catch (const Error& e) {
    throw StageError("train", e.what());
  }
  write_output(output, model.save());
  write_manifest(output, "tag --train", cfg, {cfg.paths.tagged});
  return fmt::format("trained tagger on {} sentences: {} tags, {} features", corpus.size(),
                     model.tag_inventory().size(), model.feature_count());
}

std::string cmd_map_tags(const PipelineConfig& cfg) {
  auto corpus = load_tagged(cfg.paths.tagged);
  const std::string output = require_output(cfg.paths.output, "output");
  const TagMapTable table = load_tag_map(cfg);
  std::size_t changed = 0;
  for (auto& s : corpus) {
    TaggedSentence m = map_sentence(s, table);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!(m.tags[i] == s.tags[i])) ++changed;
    s = std::move(m);
  }
  write_output(output, write_tagged_corpus(corpus));
  write_manifest(output, "map-tags", cfg, {cfg.paths.tagged, cfg.paths.tag_map});
  return fmt::format("mapped {} sentences; {} tags changed", corpus.size(), changed);
}

std::string cmd_delex(const PipelineConfig& cfg) {
  const std::string output = require_output(cfg.paths.output, "output");
  std::string text;
  std::size_t count = 0;
  if (!cfg.paths.treebank.empty()) {
    auto trees = strip_all(load_treebank(cfg.paths.treebank, "treebank"), cfg.transform, cfg.paths.treebank);
    for (std::size_t k = 0; k < trees.size(); ++k) {
      try {
        text += serialize_tree(delexicalize_tree(trees[k], cfg.transform)) + "\n";
      } catch (const Error& e) {
        throw StageError("delexicalize", fmt::format("{}: tree {}: {}", cfg.paths.treebank, k + 1, e.what()));
      }
    }
    count = trees.size();
    write_output(output, text);
    write_manifest(output, "delex", cfg, {cfg.paths.treebank});
  } else {
    auto corpus = load_tagged(cfg.paths.tagged);
    for (const auto& s : corpus) text += join_words(delexicalize_sentence(s, cfg.transform)) + "\n";
    count = corpus.size();
    write_output(output, text);
    write_manifest(output, "delex", cfg, {cfg.paths.tagged});
  }
  return fmt::format("delexicalized {} sentences", count);
}

std::string cmd_filter(const PipelineConfig& cfg) {
  auto trees = strip_all(load_treebank(cfg.paths.treebank, "treebank"), cfg.transform, cfg.paths.treebank);
  const std::string output = require_output(cfg.paths.output, "output");
  std::set<std::string> latin;
  if (!cfg.paths.latin_lexicon.empty()) {
    std::istringstream in(load_input(cfg.paths.latin_lexicon, "Latin lexicon"));
    for (std::string w; std::getline(in, w);)
      if (!w.empty()) latin.insert(w);
  }
  auto result = filter_target_treebank(trees, latin);
  write_output(output, serialize_treebank(result.kept));
  std::string report;
  for (const auto& line : result.report) report += line + "\n";
  if (!cfg.paths.report.empty()) write_output(cfg.paths.report, report);
  for (const auto& line : result.report) spdlog::info("{}", line);
  write_manifest(output, "filter", cfg, {cfg.paths.treebank, cfg.paths.latin_lexicon});
  return fmt::format("kept {} of {} trees", result.kept.size(), trees.size());
}

}  // namespace dexparse
