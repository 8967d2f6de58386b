// Command-line front end: dexparse <train|parse|tag|map-tags|delex|eval|filter> [options]

#include <cstdio>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dexparse/pipeline.hpp"

using namespace dexparse;

namespace {

struct Options {
  std::string config_file;
  std::string preset = "desk";
  std::optional<std::string> mode;
  bool use_gold_tags = false;
  bool no_mapping = false;
  bool no_morph = false;
  bool train_tagger = false;
  bool verbose = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> threads;
  std::map<std::string, std::string> paths;
};

const std::vector<std::pair<std::string, std::string>> kPathFlags = {
    {"treebank", "bracketed treebank (training, gold, or input)"},
    {"dev", "dev treebank for checkpoint selection"},
    {"tagged", "tagged corpus, token<TAB>tag per line"},
    {"tokens", "token corpus, one token per line"},
    {"tag-map", "tag map file (default: built-in table)"},
    {"tagger", "tagger model"},
    {"model", "parser checkpoint"},
    {"predicted", "predicted treebank"},
    {"latin", "Latin lexicon, one word per line"},
    {"output", "output file"},
    {"report", "report file"},
    {"log", "training log"},
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("-c,--config", o.config_file, "key=value config file");
  sub->add_option("--preset", o.preset, "size preset")->check(CLI::IsMember({"desk", "paper"}));
  sub->add_option("--mode", o.mode, "input mode")->check(CLI::IsMember({"delexicalized", "lexicalized"}));
  sub->add_flag("--use-gold-tags", o.use_gold_tags, "take tags from the gold treebank");
  sub->add_flag("--no-mapping", o.no_mapping, "skip tag mapping");
  sub->add_flag("--no-morph", o.no_morph, "drop morphological features");
  sub->add_option("--seed", o.seed, "seed for model init, shuffling and the tagger");
  sub->add_option("--epochs", o.epochs, "training epochs");
  sub->add_option("--threads", o.threads, "worker threads for gradients");
  sub->add_flag("-v,--verbose", o.verbose, "debug logging");
  for (const auto& [flag, help] : kPathFlags) sub->add_option("--" + flag, o.paths[flag], help);
}

PipelineConfig build_config(const Options& o) {
  PipelineConfig cfg = PipelineConfig::preset(o.preset);
  if (!o.config_file.empty()) cfg = load_config(o.config_file, cfg);
  if (o.mode) cfg.mode = *o.mode == "lexicalized" ? Mode::Lexicalized : Mode::Delexicalized;
  if (o.use_gold_tags) cfg.use_gold_tags = true;
  if (o.no_mapping) cfg.apply_mapping = false;
  if (o.no_morph) cfg.transform.keep_morphology = false;
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.threads) cfg.train.threads = *o.threads;
  auto set = [&](const char* flag, std::string& field) {
    auto it = o.paths.find(flag);
    if (it != o.paths.end() && !it->second.empty()) field = it->second;
  };
  set("treebank", cfg.paths.treebank);
  set("dev", cfg.paths.dev_treebank);
  set("tagged", cfg.paths.tagged);
  set("tokens", cfg.paths.tokens);
  set("tag-map", cfg.paths.tag_map);
  set("tagger", cfg.paths.tagger);
  set("model", cfg.paths.model);
  set("predicted", cfg.paths.predicted);
  set("latin", cfg.paths.latin_lexicon);
  set("output", cfg.paths.output);
  set("report", cfg.paths.report);
  set("log", cfg.paths.log);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delexicalized constituency parser toolkit"};
  app.require_subcommand(1);
  Options o;

  std::map<std::string, std::function<std::string(const PipelineConfig&)>> commands = {
      {"train", cmd_train},       {"parse", cmd_parse}, {"map-tags", cmd_map_tags},
      {"delex", cmd_delex},       {"eval", cmd_eval},   {"filter", cmd_filter},
      {"tag", [&o](const PipelineConfig& c) { return o.train_tagger ? cmd_train_tagger(c) : cmd_tag(c); }},
  };
  const std::map<std::string, std::string> help = {
      {"train", "train a parser on a treebank"},
      {"parse", "parse tagged, tokenized, or gold-tagged sentences"},
      {"tag", "tag a token corpus, or train a tagger with --train"},
      {"map-tags", "map historical tags onto the target tag set"},
      {"delex", "replace tokens with their tags"},
      {"eval", "bracket scoring of predicted against gold trees"},
      {"filter", "clean up a small target treebank"},
  };
  for (const auto& [name, text] : help) {
    auto* sub = app.add_subcommand(name, text);
    add_common(sub, o);
    if (name == "tag") sub->add_flag("--train", o.train_tagger, "train a tagger from --tagged into --tagger");
  }

  CLI11_PARSE(app, argc, argv);
  auto console = spdlog::stderr_color_mt("dexparse");
  spdlog::set_default_logger(console);
  spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const PipelineConfig cfg = build_config(o);
    std::puts(commands.at(name)(cfg).c_str());
    return 0;
  } catch (const StageError& e) {
    std::fprintf(stderr, "dexparse %s: error: %s\n", name.c_str(), e.what());
    return e.exit_code();
  } catch (const Error& e) {
    std::fprintf(stderr, "dexparse %s: error: stage=config: %s\n", name.c_str(), e.what());
    return 2;
  }
}
