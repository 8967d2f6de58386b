#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dexparse/tree.hpp"
#include "dexparse/treebank_io.hpp"

namespace dexparse {

/// Empty intermediate label introduced by binarization.
inline constexpr const char* kEmptyLabel = "\xE2\x88\x85";  // U+2205
/// Joins the labels of a collapsed unary chain.
inline constexpr char kChainJoiner = '+';

struct TransformConfig {
  char edge_separator = '-';
  std::string trace_label = "-NONE-";
  /// A token starting with any of these prefixes marks a trace.
  std::vector<std::string> trace_token_patterns = {"*T*", "*"};
  char morph_separator = '.';
  bool keep_morphology = true;
};

/// Drops edge-label suffixes, "=N" coreference indices and trace subtrees.
/// Throws Error("empty after stripping") when nothing is left.
Tree strip_annotations(const Tree& tree, const TransformConfig& cfg = {});

/// Replaces every leaf token by its preterminal's extended tag and reduces
/// the preterminal label to the bare POS.
Tree delexicalize_tree(const Tree& tree, const TransformConfig& cfg = {});

std::vector<std::string> delexicalize_sentence(const TaggedSentence& sentence,
                                               const TransformConfig& cfg = {});

/// Right-branching binarization with unary-chain collapse.
Tree binarize(const Tree& tree);
Tree debinarize(const Tree& tree);

/// True when a label collides with the reserved binarization symbols.
bool is_reserved_label(const std::string& label);

struct FilterResult {
  std::vector<Tree> kept;
  std::vector<std::string> report;
};

/// Clean-up for a small target-language evaluation treebank: drops
/// incomplete trees (fewer than 2 leaves or not well-formed) and trees whose
/// tokens are mostly (>50%) in `latin_lexicon`, and deletes a leading
/// numbering token (digits and periods only).
FilterResult filter_target_treebank(const std::vector<Tree>& trees,
                                    const std::set<std::string>& latin_lexicon);

}  // namespace dexparse
