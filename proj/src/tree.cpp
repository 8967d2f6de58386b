#include "dexparse/tree.hpp"

#include <algorithm>

namespace dexparse {

Tree Tree::leaf(std::string token) {
  Tree t;
  t.token = std::move(token);
  return t;
}

Tree Tree::node(std::string label, std::vector<Tree> children) {
  Tree t;
  t.label = std::move(label);
  t.children = std::move(children);
  return t;
}

Tree Tree::preterminal(std::string label, std::string token) {
  std::vector<Tree> kids;
  kids.push_back(leaf(std::move(token)));
  return node(std::move(label), std::move(kids));
}

bool Tree::is_preterminal() const {
  if (children.empty()) return false;
  return std::all_of(children.begin(), children.end(),
                     [](const Tree& c) { return c.is_leaf(); });
}

std::size_t Tree::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

std::size_t Tree::internal_count() const {
  if (is_leaf()) return 0;
  std::size_t n = 1;
  for (const auto& c : children) n += c.internal_count();
  return n;
}

namespace {

void collect_tokens(const Tree& t, std::vector<std::string>& out) {
  if (t.is_leaf()) {
    out.push_back(*t.token);
    return;
  }
  for (const auto& c : t.children) collect_tokens(c, out);
}

template <typename T, typename Out>
void collect_preterminals(T& t, Out& out) {
  if (t.is_leaf()) return;
  if (t.is_preterminal()) {
    out.push_back(&t);
    return;
  }
  for (auto& c : t.children) collect_preterminals(c, out);
}

}  // namespace

std::vector<std::string> Tree::tokens() const {
  std::vector<std::string> out;
  collect_tokens(*this, out);
  return out;
}

std::vector<const Tree*> Tree::preterminals() const {
  std::vector<const Tree*> out;
  collect_preterminals(*this, out);
  return out;
}

std::vector<Tree*> Tree::preterminals() {
  std::vector<Tree*> out;
  collect_preterminals(*this, out);
  return out;
}

bool is_well_formed(const Tree& tree) {
  if (tree.is_leaf()) return false;
  if (tree.label.empty() || tree.children.empty()) return false;
  if (tree.is_preterminal()) return tree.children.size() == 1;
  return std::all_of(tree.children.begin(), tree.children.end(), [](const Tree& c) {
    return !c.is_leaf() && is_well_formed(c);
  });
}

}  // namespace dexparse
