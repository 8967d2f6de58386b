#include "dexparse/treebank_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dexparse {

namespace {

constexpr std::size_t kMaxDepth = 10000;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool has_space(std::string_view s) {
  for (char c : s)
    if (is_space(c)) return true;
  return false;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string unescape(std::string_view s) {
  std::string out(s);
  replace_all(out, "-LRB-", "(");
  replace_all(out, "-RRB-", ")");
  return out;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '(')
      out += "-LRB-";
    else if (c == ')')
      out += "-RRB-";
    else
      out += c;
  }
  return out;
}

void serialize_into(const Tree& t, std::string& out) {
  if (t.is_leaf()) {
    out += escape(*t.token);
    return;
  }
  out += '(';
  out += escape(t.label);
  for (const auto& c : t.children) {
    out += ' ';
    serialize_into(c, out);
  }
  out += ')';
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  for (char c : line)
    if (!is_space(c)) return false;
  return true;
}

bool valid_symbol(std::string_view s, char separator) {
  return !s.empty() && !has_space(s) && s.find(separator) == std::string_view::npos;
}

}  // namespace

// ExtendedTag ----------------------------------------------------------------

ExtendedTag ExtendedTag::parse(std::string_view text, char separator) {
  if (text.empty()) throw Error("empty extended tag");
  if (has_space(text)) throw Error("whitespace in extended tag '" + std::string(text) + "'");
  ExtendedTag tag;
  std::string_view rest;
  if (text.front() == '$' && text.size() >= 2) {
    tag.pos = std::string(text.substr(0, 2));
    rest = text.substr(2);
    if (!rest.empty()) {
      if (rest.front() != separator)
        throw Error("malformed extended tag '" + std::string(text) + "'");
      rest.remove_prefix(1);
      if (rest.empty()) throw Error("malformed extended tag '" + std::string(text) + "'");
    }
  } else {
    std::size_t cut = text.find(separator);
    tag.pos = std::string(text.substr(0, cut));
    if (tag.pos.empty()) throw Error("malformed extended tag '" + std::string(text) + "'");
    if (cut != std::string_view::npos) {
      rest = text.substr(cut + 1);
      if (rest.empty()) throw Error("malformed extended tag '" + std::string(text) + "'");
    }
  }
  while (!rest.empty()) {
    std::size_t cut = rest.find(separator);
    std::string_view feat = rest.substr(0, cut);
    if (feat.empty()) throw Error("empty feature in extended tag '" + std::string(text) + "'");
    tag.features.emplace_back(feat);
    if (cut == std::string_view::npos) break;
    rest = rest.substr(cut + 1);
    if (rest.empty()) throw Error("malformed extended tag '" + std::string(text) + "'");
  }
  return tag;
}

std::string ExtendedTag::str(char separator) const {
  std::string out = pos;
  for (const auto& f : features) {
    out += separator;
    out += f;
  }
  return out;
}

// Bracketed trees ------------------------------------------------------------

std::vector<Tree> parse_bracketed(std::string_view text, std::vector<std::string>* diagnostics) {
  std::vector<Tree> trees;
  std::vector<Tree> stack;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto read_atom = [&]() {
    std::size_t start = i;
    while (i < n && !is_space(text[i]) && text[i] != '(' && text[i] != ')') ++i;
    return text.substr(start, i - start);
  };

  while (true) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    char c = text[i];
    if (c == '(') {
      std::size_t open_at = i;
      ++i;
      while (i < n && is_space(text[i])) ++i;
      std::string_view label = read_atom();
      if (label.empty()) throw ParseError("empty label", i < n ? i : open_at);
      if (stack.size() >= kMaxDepth) throw ParseError("nesting too deep", open_at);
      stack.push_back(Tree::node(unescape(label), {}));
    } else if (c == ')') {
      if (stack.empty()) throw ParseError("unbalanced ')'", i);
      Tree done = std::move(stack.back());
      stack.pop_back();
      if (done.children.empty()) throw ParseError("constituent without children", i);
      ++i;
      if (diagnostics && !done.is_preterminal()) {
        for (const auto& child : done.children) {
          if (child.is_leaf()) {
            diagnostics->push_back("flat node '" + done.label + "' has a bare leaf '" +
                                   *child.token + "' ending at byte " + std::to_string(i));
            break;
          }
        }
      }
      if (stack.empty())
        trees.push_back(std::move(done));
      else
        stack.back().children.push_back(std::move(done));
    } else {
      std::size_t at = i;
      std::string_view atom = read_atom();
      if (stack.empty()) throw ParseError("token outside brackets", at);
      stack.back().children.push_back(Tree::leaf(unescape(atom)));
    }
  }
  if (!stack.empty()) throw ParseError("unbalanced '(' (unexpected end of input)", n);
  return trees;
}

std::string serialize_tree(const Tree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

std::string serialize_treebank(const std::vector<Tree>& trees) {
  std::string out;
  for (const auto& t : trees) {
    serialize_into(t, out);
    out += '\n';
  }
  return out;
}

// Tagged corpora -------------------------------------------------------------

std::vector<TaggedSentence> read_tagged_corpus(std::string_view text,
                                               std::vector<std::string>* diagnostics) {
  std::vector<TaggedSentence> out;
  TaggedSentence current;
  bool previous_blank = false;
  auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (is_blank(line)) {
      if (!current.tokens.empty()) {
        out.push_back(std::move(current));
        current = {};
      } else if (diagnostics && (previous_blank || ln == 0)) {
        diagnostics->push_back("empty sentence skipped at line " + std::to_string(ln + 1));
      }
      previous_blank = true;
      continue;
    }
    previous_blank = false;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError("missing TAB", ln + 1);
    std::string_view token = line.substr(0, tab);
    std::string_view tag = line.substr(tab + 1);
    if (token.empty()) throw FormatError("empty token", ln + 1);
    try {
      current.tags.push_back(ExtendedTag::parse(tag));
    } catch (const Error& e) {
      throw FormatError(e.what(), ln + 1);
    }
    current.tokens.emplace_back(token);
  }
  if (!current.tokens.empty()) out.push_back(std::move(current));
  return out;
}

std::string write_tagged_corpus(const std::vector<TaggedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += s.tags[i].str();
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::string>> read_token_corpus(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  for (std::string_view line : split_lines(text)) {
    if (is_blank(line)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    std::size_t b = 0, e = line.size();
    while (b < e && is_space(line[b])) ++b;
    while (e > b && is_space(line[e - 1])) --e;
    current.emplace_back(line.substr(b, e - b));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

// Tag maps -------------------------------------------------------------------

TagMapTable read_tag_map(std::string_view text) {
  TagMapTable table;
  enum class Section { None, Pos, Features } section = Section::None;
  auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (is_blank(line) || line.front() == '#') continue;
    if (line == "[pos]") {
      section = Section::Pos;
      continue;
    }
    if (line == "[features]") {
      section = Section::Features;
      continue;
    }
    if (line.front() == '[') throw FormatError("unknown section " + std::string(line), ln + 1);
    if (section == Section::None) throw FormatError("entry outside a section", ln + 1);
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError("missing TAB", ln + 1);
    std::string source(line.substr(0, tab));
    std::string_view target = line.substr(tab + 1);
    if (source.empty() || has_space(source)) throw FormatError("malformed source key", ln + 1);

    if (section == Section::Pos) {
      ExtendedTag tag;
      try {
        tag = ExtendedTag::parse(target);
      } catch (const Error& e) {
        throw FormatError(e.what(), ln + 1);
      }
      if (tag.pos.find('|') != std::string::npos)
        throw FormatError("composite target tag '" + std::string(target) + "'", ln + 1);
      if (!table.pos_map.emplace(source, std::move(tag)).second)
        throw FormatError("duplicate source key '" + source + "'", ln + 1);
    } else {
      if (!valid_symbol(target, '.'))
        throw FormatError("malformed target feature '" + std::string(target) + "'", ln + 1);
      if (!table.feature_map.emplace(source, std::string(target)).second)
        throw FormatError("duplicate source key '" + source + "'", ln + 1);
    }
  }
  return table;
}

std::string write_tag_map(const TagMapTable& table) {
  std::string out = "[pos]\n";
  for (const auto& [src, tgt] : table.pos_map) out += src + '\t' + tgt.str() + '\n';
  out += "[features]\n";
  for (const auto& [src, tgt] : table.feature_map) out += src + '\t' + tgt + '\n';
  return out;
}

// Corpus handling ------------------------------------------------------------

std::pair<std::vector<Tree>, std::vector<Tree>> split_treebank(std::vector<Tree> trees,
                                                                std::size_t train_count) {
  if (train_count > trees.size())
    throw Error("train_count " + std::to_string(train_count) + " exceeds corpus size " +
                std::to_string(trees.size()));
  std::vector<Tree> dev(std::make_move_iterator(trees.begin() + static_cast<std::ptrdiff_t>(train_count)),
                        std::make_move_iterator(trees.end()));
  trees.resize(train_count);
  return {std::move(trees), std::move(dev)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace dexparse
