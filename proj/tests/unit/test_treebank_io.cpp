#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "dexparse/treebank_io.hpp"
#include "synthetic.hpp"

using namespace dexparse;

TEST_CASE("reads a small tree") {
  auto trees = parse_bracketed("(S (NP (ART der) (NN Mann)) (VP (VVFIN lacht)))");
  REQUIRE(trees.size() == 1);
  CHECK(trees[0].label == "S");
  CHECK(trees[0].internal_count() - 1 == 5);
  CHECK(trees[0].tokens() == std::vector<std::string>{"der", "Mann", "lacht"});
}

TEST_CASE("several top-level trees, across lines") {
  CHECK(parse_bracketed("(X a) (Y b)").size() == 2);
  auto multi = parse_bracketed("(S\n  (NP (NN a))\n  (VP (VV b)))\n\n(X c)\n");
  REQUIRE(multi.size() == 2);
  CHECK(serialize_tree(multi[0]) == "(S (NP (NN a)) (VP (VV b)))");
}

TEST_CASE("parse errors carry byte offsets") {
  const std::string text = "(S (NP (ART der)";
  try {
    parse_bracketed(text);
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == text.size());
  }
  CHECK_THROWS_AS(parse_bracketed("(S a))"), ParseError);
  CHECK_THROWS_AS(parse_bracketed("( (NN a))"), ParseError);
  CHECK_THROWS_AS(parse_bracketed("(S)"), ParseError);
  CHECK_THROWS_AS(parse_bracketed("word (S (N a))"), ParseError);
}

TEST_CASE("flat node with a bare leaf is accepted and noted") {
  std::vector<std::string> notes;
  auto trees = parse_bracketed("(S a (NN b))", &notes);
  REQUIRE(trees.size() == 1);
  CHECK(trees[0].children.size() == 2);
  CHECK(!notes.empty());
}

TEST_CASE("serialization") {
  CHECK(serialize_tree(Tree::preterminal("NN", "Haus")) == "(NN Haus)");
  CHECK(serialize_tree(parse_bracketed("(S (VP (VVFIN lacht)))")[0]) == "(S (VP (VVFIN lacht)))");
  Tree paren = Tree::node("S", {});
  paren.children.push_back(Tree::preterminal("$(", "("));
  CHECK(serialize_tree(paren) == "(S ($-LRB- -LRB-))");
  CHECK(parse_bracketed(serialize_tree(paren))[0] == paren);
  CHECK(serialize_treebank({paren, paren}) == "(S ($-LRB- -LRB-))\n(S ($-LRB- -LRB-))\n");
}

TEST_CASE("round trip on random trees") {
  Rng rng(7);
  for (int k = 0; k < 300; ++k) {
    Tree t = synth::random_tree(rng);
    auto back = parse_bracketed(serialize_tree(t));
    REQUIRE(back.size() == 1);
    CHECK(back[0] == t);
  }
}

TEST_CASE("arbitrary bytes give trees or a structured error") {
  Rng rng(11);
  const std::string alphabet = "()  ab\n\t\xC3\xBC";
  for (int k = 0; k < 2000; ++k) {
    std::string s;
    const auto len = rng.below(40);
    for (std::uint64_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
    try {
      auto trees = parse_bracketed(s);
      for (const auto& t : trees) CHECK(!t.label.empty());
    } catch (const ParseError&) {
    }
  }
  std::string deep(20000, '(');
  CHECK_THROWS_AS(parse_bracketed(deep), ParseError);
}

TEST_CASE("extended tags") {
  auto t = ExtendedTag::parse("ART.Nom.Pl.Fem");
  CHECK(t.pos == "ART");
  CHECK(t.features == std::vector<std::string>{"Nom", "Pl", "Fem"});
  CHECK(t.str() == "ART.Nom.Pl.Fem");
  CHECK(ExtendedTag::parse("$.").pos == "$.");
  CHECK(ExtendedTag::parse("$,").features.empty());
  CHECK(ExtendedTag::parse("NN").str() == "NN");
  CHECK_THROWS(ExtendedTag::parse(""));
  CHECK_THROWS(ExtendedTag::parse("ART..Nom"));
  CHECK_THROWS(ExtendedTag::parse("ART.Nom."));
  CHECK_THROWS(ExtendedTag::parse(".Nom"));
  CHECK_THROWS(ExtendedTag::parse("A RT"));
}

TEST_CASE("tagged corpus") {
  auto one = read_tagged_corpus("diu\tDDART.Nom.Sg.Fem\n\n");
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].size() == 1);
  CHECK(one[0].tags[0].pos == "DDART");
  CHECK(one[0].tags[0].features.size() == 3);

  auto two = read_tagged_corpus("a\tX\nb\tY\n\nc\tX\nd\tY\ne\tZ\n");
  REQUIRE(two.size() == 2);
  CHECK(two[0].size() == 2);
  CHECK(two[1].size() == 3);
  CHECK(read_tagged_corpus(write_tagged_corpus(two)) == two);

  try {
    read_tagged_corpus("wort");
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 1);
  }

  std::vector<std::string> notes;
  auto skipped = read_tagged_corpus("a\tX\n\n\n\nb\tY\n", &notes);
  CHECK(skipped.size() == 2);
  CHECK(!notes.empty());
}

TEST_CASE("token corpus") {
  auto s = read_token_corpus("a\nb\n\nc\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == std::vector<std::string>{"a", "b"});
  CHECK(s[1] == std::vector<std::string>{"c"});
}

TEST_CASE("tag map files") {
  auto a = read_tag_map("[pos]\nDDART\tART");
  CHECK(a.pos_map.at("DDART") == ExtendedTag{"ART", {}});
  auto b = read_tag_map("[pos]\nVAPS\tADJD.Pos");
  CHECK(b.pos_map.at("VAPS") == ExtendedTag{"ADJD", {"Pos"}});
  CHECK_THROWS_AS(read_tag_map("[pos]\nNA\tNN\nNA\tNE"), FormatError);
  CHECK_THROWS_AS(read_tag_map("[pos]\nNA\tNN..x"), FormatError);
  CHECK_THROWS_AS(read_tag_map("NA\tNN"), FormatError);
  CHECK_THROWS_AS(read_tag_map("[other]\n"), FormatError);
  auto c = read_tag_map("# comment\n[pos]\nNA\tNN\n[features]\nNom\tNom\n");
  CHECK(c.feature_map.at("Nom") == "Nom");
  CHECK(read_tag_map(write_tag_map(c)).pos_map == c.pos_map);
}

TEST_CASE("split_treebank keeps order") {
  std::vector<Tree> trees;
  for (int k = 0; k < 10; ++k) trees.push_back(Tree::preterminal("N", std::to_string(k)));
  auto [train0, dev0] = split_treebank(trees, 0);
  CHECK(train0.empty());
  CHECK(dev0.size() == 10);
  auto [train, dev] = split_treebank(trees, 7);
  CHECK(train.size() == 7);
  CHECK(dev.front() == trees[7]);
  train.insert(train.end(), dev.begin(), dev.end());
  CHECK(train == trees);
  CHECK_THROWS(split_treebank(trees, 11));

  std::vector<Tree> big(50474, Tree::preterminal("N", "x"));
  CHECK(split_treebank(big, 47474).second.size() == 3000);
}

TEST_CASE("file helpers") {
  const auto path = std::filesystem::temp_directory_path() / "dexparse_io_test.txt";
  write_file(path.string(), "abc\n");
  CHECK(read_file(path.string()) == "abc\n");
  std::filesystem::remove(path);
  CHECK_THROWS(read_file(path.string()));
}
