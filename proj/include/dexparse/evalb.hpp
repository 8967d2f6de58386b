#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dexparse/tree.hpp"

namespace dexparse {

struct EvalConfig {
  std::set<std::string> punctuation_tags = {"$,", "$.", "$("};
  std::set<std::string> ignore_labels;
  std::map<std::string, std::string> label_equivalences;
  bool include_root = true;
};

struct SentenceScore {
  std::size_t index = 0;
  std::size_t gold_spans = 0;
  std::size_t pred_spans = 0;
  std::size_t matched = 0;
  bool exact = false;
  /// Non-empty when the pair was excluded (leaf-count mismatch).
  std::string error;
};

struct EvalResult {
  double recall = 0;
  double precision = 0;
  double fscore = 0;
  double complete_match = 0;
  std::size_t matched = 0;
  std::size_t gold_total = 0;
  std::size_t pred_total = 0;
  std::size_t exact_trees = 0;
  std::size_t total_trees = 0;
  std::size_t skipped = 0;
  std::vector<SentenceScore> sentences;

  /// Fills the percentages from the raw counts.
  void finalize();
};

/// Constituent spans with punctuation leaves removed and preterminals
/// ignored, sorted. Duplicates (unary chains) are kept.
std::vector<LabeledSpan> extract_eval_spans(const Tree& tree, const EvalConfig& cfg = {});

/// Throws Error when the corpora differ in length.
EvalResult score_corpus(const std::vector<Tree>& gold, const std::vector<Tree>& pred,
                        const EvalConfig& cfg = {});

/// "R P F CM" with two decimals.
std::string format_summary(const EvalResult& result);

/// Summary header followed by one tab-separated line per sentence.
std::string format_report(const EvalResult& result);

}  // namespace dexparse
