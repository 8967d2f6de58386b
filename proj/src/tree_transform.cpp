#include "dexparse/tree_transform.hpp"

#include <algorithm>
#include <optional>

#include "dexparse/errors.hpp"

namespace dexparse {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Removes any number of trailing "=digits" groups, never emptying the label.
std::string strip_coreference(std::string label) {
  while (true) {
    std::size_t eq = label.rfind('=');
    if (eq == std::string::npos || eq == 0) break;
    if (!all_digits(std::string_view(label).substr(eq + 1))) break;
    label.resize(eq);
  }
  return label;
}

std::string strip_edge(std::string label, char separator) {
  std::size_t cut = label.find(separator);
  if (cut != std::string::npos && cut > 0) label.resize(cut);
  return strip_coreference(std::move(label));
}

bool is_trace_token(const std::string& token, const TransformConfig& cfg) {
  return std::any_of(cfg.trace_token_patterns.begin(), cfg.trace_token_patterns.end(),
                     [&](const std::string& p) { return !p.empty() && token.starts_with(p); });
}

std::optional<Tree> strip_node(const Tree& t, const TransformConfig& cfg) {
  if (t.is_leaf()) {
    if (is_trace_token(*t.token, cfg)) return std::nullopt;
    return t;
  }
  if (t.is_preterminal()) {
    if (t.label == cfg.trace_label) return std::nullopt;
    if (std::any_of(t.children.begin(), t.children.end(),
                    [&](const Tree& c) { return is_trace_token(*c.token, cfg); }))
      return std::nullopt;
    Tree out = t;
    out.label = strip_coreference(t.label);
    return out;
  }
  Tree out = Tree::node(strip_edge(t.label, cfg.edge_separator), {});
  for (const auto& c : t.children) {
    if (auto s = strip_node(c, cfg)) out.children.push_back(std::move(*s));
  }
  if (out.children.empty()) return std::nullopt;
  return out;
}

Tree delex_node(const Tree& t, const TransformConfig& cfg) {
  if (t.is_leaf()) throw Error("bare leaf '" + *t.token + "' without a preterminal");
  if (t.is_preterminal()) {
    if (t.children.size() != 1)
      throw Error("preterminal '" + t.label + "' has " + std::to_string(t.children.size()) +
                  " children");
    ExtendedTag tag;
    try {
      tag = ExtendedTag::parse(t.label, cfg.morph_separator);
    } catch (const Error& e) {
      throw Error("malformed extended tag in preterminal '" + t.label + "': " + e.what());
    }
    std::string leaf = cfg.keep_morphology ? tag.str(cfg.morph_separator) : tag.pos;
    return Tree::preterminal(tag.pos, std::move(leaf));
  }
  Tree out = Tree::node(t.label, {});
  out.children.reserve(t.children.size());
  for (const auto& c : t.children) out.children.push_back(delex_node(c, cfg));
  return out;
}

Tree binarize_children(std::string label, const std::vector<Tree>& kids, std::size_t from);

Tree binarize_node(const Tree& t) {
  if (t.is_leaf() || t.is_preterminal()) return t;
  std::string label = t.label;
  const Tree* cur = &t;
  while (cur->children.size() == 1 && !cur->children[0].is_leaf() &&
         !cur->children[0].is_preterminal()) {
    cur = &cur->children[0];
    label += kChainJoiner;
    label += cur->label;
  }
  return binarize_children(std::move(label), cur->children, 0);
}

Tree binarize_children(std::string label, const std::vector<Tree>& kids, std::size_t from) {
  Tree out = Tree::node(std::move(label), {});
  if (kids.size() - from <= 2) {
    for (std::size_t i = from; i < kids.size(); ++i) out.children.push_back(binarize_node(kids[i]));
  } else {
    out.children.push_back(binarize_node(kids[from]));
    out.children.push_back(binarize_children(kEmptyLabel, kids, from + 1));
  }
  return out;
}

void debinarize_into(const Tree& t, std::vector<Tree>& out) {
  if (t.is_leaf() || t.is_preterminal()) {
    out.push_back(t);
    return;
  }
  std::vector<Tree> kids;
  for (const auto& c : t.children) debinarize_into(c, kids);
  if (t.label == kEmptyLabel) {
    for (auto& k : kids) out.push_back(std::move(k));
    return;
  }
  std::vector<std::string> chain;
  std::size_t start = 0;
  while (true) {
    std::size_t cut = t.label.find(kChainJoiner, start);
    chain.push_back(t.label.substr(start, cut - start));
    if (cut == std::string::npos) break;
    start = cut + 1;
  }
  Tree node = Tree::node(chain.back(), std::move(kids));
  for (std::size_t i = chain.size() - 1; i-- > 0;) {
    std::vector<Tree> one;
    one.push_back(std::move(node));
    node = Tree::node(chain[i], std::move(one));
  }
  out.push_back(std::move(node));
}

/// Deletes the first leaf and any ancestors it leaves empty. Returns false if
/// the whole tree disappears.
bool remove_first_leaf(Tree& t) {
  if (t.children.empty()) return false;
  Tree& first = t.children.front();
  if (first.is_leaf() || !remove_first_leaf(first)) t.children.erase(t.children.begin());
  return !t.children.empty();
}

bool is_numbering(const std::string& token) {
  return !token.empty() && std::all_of(token.begin(), token.end(),
                                       [](char c) { return c == '.' || (c >= '0' && c <= '9'); });
}

}  // namespace

Tree strip_annotations(const Tree& tree, const TransformConfig& cfg) {
  auto out = strip_node(tree, cfg);
  if (!out || out->is_leaf()) throw Error("empty after stripping");
  return std::move(*out);
}

Tree delexicalize_tree(const Tree& tree, const TransformConfig& cfg) {
  return delex_node(tree, cfg);
}

std::vector<std::string> delexicalize_sentence(const TaggedSentence& sentence,
                                               const TransformConfig& cfg) {
  std::vector<std::string> out;
  out.reserve(sentence.tags.size());
  for (const auto& tag : sentence.tags)
    out.push_back(cfg.keep_morphology ? tag.str(cfg.morph_separator) : tag.pos);
  return out;
}

Tree binarize(const Tree& tree) { return binarize_node(tree); }

Tree debinarize(const Tree& tree) {
  if (tree.label == kEmptyLabel) throw Error("cannot debinarize: empty label at the root");
  std::vector<Tree> out;
  debinarize_into(tree, out);
  return std::move(out.front());
}

bool is_reserved_label(const std::string& label) {
  return label.find(kChainJoiner) != std::string::npos ||
         label.find(kEmptyLabel) != std::string::npos;
}

FilterResult filter_target_treebank(const std::vector<Tree>& trees,
                                    const std::set<std::string>& latin_lexicon) {
  FilterResult result;
  for (std::size_t k = 0; k < trees.size(); ++k) {
    const std::string id = "tree " + std::to_string(k + 1) + ": ";
    if (!is_well_formed(trees[k])) {
      result.report.push_back(id + "dropped (incomplete: not well-formed)");
      continue;
    }
    Tree t = trees[k];
    auto toks = t.tokens();
    if (is_numbering(toks.front())) {
      result.report.push_back(id + "removed leading token '" + toks.front() + "'");
      if (!remove_first_leaf(t)) {
        result.report.push_back(id + "dropped (incomplete: empty after removal)");
        continue;
      }
      toks.erase(toks.begin());
    }
    if (toks.size() < 2) {
      result.report.push_back(id + "dropped (incomplete: fewer than 2 leaves)");
      continue;
    }
    std::size_t latin = static_cast<std::size_t>(std::count_if(
        toks.begin(), toks.end(), [&](const std::string& w) { return latin_lexicon.count(w) > 0; }));
    if (2 * latin > toks.size()) {
      result.report.push_back(id + "dropped (mostly Latin: " + std::to_string(latin) + "/" +
                              std::to_string(toks.size()) + ")");
      continue;
    }
    result.kept.push_back(std::move(t));
  }
  return result;
}

}  // namespace dexparse
