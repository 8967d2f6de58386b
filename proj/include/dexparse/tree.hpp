#pragma once

#include <cstddef>
#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace dexparse {

/// Rooted ordered constituency tree. Internal nodes carry a label, leaves
/// carry a token and have an empty label.
struct Tree {
  std::string label;
  std::vector<Tree> children;
  std::optional<std::string> token;

  static Tree leaf(std::string token);
  static Tree node(std::string label, std::vector<Tree> children);
  /// (label token) - a preterminal over a single leaf.
  static Tree preterminal(std::string label, std::string token);

  bool is_leaf() const { return children.empty() && token.has_value(); }
  /// An internal node all of whose children are leaves.
  bool is_preterminal() const;

  std::size_t leaf_count() const;
  /// Internal (labeled) nodes including this one.
  std::size_t internal_count() const;
  std::vector<std::string> tokens() const;
  /// Preterminals in left-to-right order.
  std::vector<const Tree*> preterminals() const;
  std::vector<Tree*> preterminals();

  friend bool operator==(const Tree&, const Tree&) = default;
};

/// Every leaf sits under a single-child preterminal, labels are non-empty
/// and no internal node is childless.
bool is_well_formed(const Tree& tree);

/// A labeled constituent over fenceposts [start, end).
struct LabeledSpan {
  int start = 0;
  int end = 0;
  std::string label;

  friend bool operator==(const LabeledSpan&, const LabeledSpan&) = default;
  friend auto operator<=>(const LabeledSpan&, const LabeledSpan&) = default;
};

}  // namespace dexparse
