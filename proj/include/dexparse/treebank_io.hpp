#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dexparse/errors.hpp"
#include "dexparse/tree.hpp"

namespace dexparse {

/// A POS tag with ordered morphological features, serialized as
/// "ART.Nom.Pl.Fem". STTS punctuation tags ("$.", "$,", "$(") keep their
/// second character as part of the POS.
struct ExtendedTag {
  std::string pos;
  std::vector<std::string> features;

  /// Throws Error when the string is not a valid extended tag.
  static ExtendedTag parse(std::string_view text, char separator = '.');
  std::string str(char separator = '.') const;

  friend bool operator==(const ExtendedTag&, const ExtendedTag&) = default;
  friend auto operator<=>(const ExtendedTag&, const ExtendedTag&) = default;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<ExtendedTag> tags;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

/// Source (historical) tag/feature to target (modern) tag/feature table.
struct TagMapTable {
  std::map<std::string, ExtendedTag> pos_map;
  std::map<std::string, std::string> feature_map;
};

// Bracketed treebanks --------------------------------------------------------

/// Reads every top-level tree in `text`. Trees may span multiple lines.
/// Leaves that have siblings under a non-preterminal are accepted; a note is
/// appended to `diagnostics` when it is non-null.
std::vector<Tree> parse_bracketed(std::string_view text,
                                  std::vector<std::string>* diagnostics = nullptr);

/// Single-line bracketed form. Parentheses inside labels and tokens are
/// written as -LRB- / -RRB-.
std::string serialize_tree(const Tree& tree);

/// One tree per line, trailing newline after each.
std::string serialize_treebank(const std::vector<Tree>& trees);

// Tagged corpora -------------------------------------------------------------

/// "token<TAB>TAG.Feat..." per line, blank line between sentences.
std::vector<TaggedSentence> read_tagged_corpus(std::string_view text,
                                               std::vector<std::string>* diagnostics = nullptr);
std::string write_tagged_corpus(const std::vector<TaggedSentence>& sentences);

/// One token per line, blank line between sentences.
std::vector<std::vector<std::string>> read_token_corpus(std::string_view text);

// Tag maps -------------------------------------------------------------------

/// Sectioned TSV: "[pos]" and "[features]" headers, "source<TAB>target"
/// lines. '#' starts a comment line.
TagMapTable read_tag_map(std::string_view text);
std::string write_tag_map(const TagMapTable& table);

// Corpus handling ------------------------------------------------------------

/// First `train_count` trees in corpus order, then the remainder.
std::pair<std::vector<Tree>, std::vector<Tree>> split_treebank(std::vector<Tree> trees,
                                                                std::size_t train_count);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace dexparse
