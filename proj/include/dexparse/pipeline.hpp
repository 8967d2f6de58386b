#pragma once

#include <string>
#include <vector>

#include "dexparse/chart_parser.hpp"
#include "dexparse/encoder_model.hpp"
#include "dexparse/errors.hpp"
#include "dexparse/evalb.hpp"
#include "dexparse/tree_transform.hpp"

namespace dexparse {

enum class Mode { Delexicalized, Lexicalized };

struct PipelinePaths {
  std::string treebank;       // training treebank, or gold treebank for parse/eval/filter
  std::string dev_treebank;   // optional, for checkpoint selection
  std::string tagged;         // "token<TAB>tag" corpus
  std::string tokens;         // one token per line
  std::string tag_map;        // empty = built-in table
  std::string tagger;         // tagger checkpoint
  std::string model;          // parser checkpoint
  std::string predicted;      // predicted treebank for eval
  std::string latin_lexicon;  // one word per line
  std::string output;
  std::string report;
  std::string log;
};

struct PipelineConfig {
  PipelinePaths paths;
  TransformConfig transform;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  Mode mode = Mode::Delexicalized;
  bool use_gold_tags = false;
  bool apply_mapping = true;
  int tagger_epochs = 5;

  /// "desk" or "paper"; throws Error otherwise.
  static PipelineConfig preset(const std::string& name);
  void set_seed(std::uint64_t seed);

  /// key=value text with [run], [paths], [model], [train], [transform] and
  /// [eval] sections, in a fixed key order.
  std::string snapshot() const;
};

/// Overlays the keys present in an INI file onto `base`. Unknown sections
/// or keys are errors.
PipelineConfig load_config(const std::string& path, PipelineConfig base);
PipelineConfig parse_config(const std::string& text, PipelineConfig base);

/// Failure of a pipeline command. `stage` names the step that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, int exit_code = 1)
      : Error("stage=" + stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

/// Source treebank text -> training trees: parse, strip, delexicalize (in
/// delexicalized mode), binarize.
std::vector<Tree> prepare_training_trees(const std::string& text, const PipelineConfig& cfg,
                                         const std::string& source = "treebank");

/// Model input for one tagged sentence: mapped (optionally) and reduced to
/// the configured tag form.
std::vector<ExtendedTag> model_inputs(const TaggedSentence& sentence, const PipelineConfig& cfg,
                                      const TagMapTable& table);

/// Puts the original tokens and tag POS back at the leaves of a parse.
Tree relexicalize(const Tree& parsed, const TaggedSentence& sentence);

/// Each command writes its outputs plus "<output>.manifest" and returns a
/// short human-readable summary. Failures throw StageError.
std::string cmd_train(const PipelineConfig& cfg);
std::string cmd_parse(const PipelineConfig& cfg);
std::string cmd_eval(const PipelineConfig& cfg);
std::string cmd_tag(const PipelineConfig& cfg);
std::string cmd_train_tagger(const PipelineConfig& cfg);
std::string cmd_map_tags(const PipelineConfig& cfg);
std::string cmd_delex(const PipelineConfig& cfg);
std::string cmd_filter(const PipelineConfig& cfg);

}  // namespace dexparse
