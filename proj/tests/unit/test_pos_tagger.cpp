#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "dexparse/pos_tagger.hpp"
#include "synthetic.hpp"

using namespace dexparse;

namespace {

std::vector<TaggedSentence> bijective_corpus() {
  const std::vector<std::pair<std::string, std::string>> lex = {
      {"der", "ART.Nom.Sg.Masc"}, {"Hund", "NN.Nom.Sg.Masc"}, {"bellt", "VVFIN.3.Sg"},
      {"laut", "ADJD.Pos"},       {".", "$."},                {"die", "ART.Nom.Sg.Fem"},
      {"Katze", "NN.Nom.Sg.Fem"}, {"schläft", "VVFIN.3.Sg.Pres"}};
  Rng rng(4);
  std::vector<TaggedSentence> out;
  for (int s = 0; s < 40; ++s) {
    TaggedSentence ts;
    const auto n = 2 + rng.below(6);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto& [w, t] = lex[rng.below(lex.size())];
      ts.tokens.push_back(w);
      ts.tags.push_back(ExtendedTag::parse(t));
    }
    out.push_back(std::move(ts));
  }
  return out;
}

std::vector<TaggedSentence> tag_all(const TaggerModel& m, const std::vector<TaggedSentence>& gold) {
  std::vector<TaggedSentence> out;
  for (const auto& s : gold) out.push_back(m.tag(s.tokens));
  return out;
}

}  // namespace

TEST_CASE("memorizes a bijective corpus") {
  auto corpus = bijective_corpus();
  auto model = train_tagger(corpus, 5, 1);
  CHECK(tagger_accuracy(corpus, tag_all(model, corpus)) == doctest::Approx(1.0));
  auto t = model.tag({"Katze"});
  CHECK(t.tags.at(0).str() == "NN.Nom.Sg.Fem");
  CHECK(model.tag({"a", "b", "c"}).size() == 3);
}

TEST_CASE("deterministic given the seed") {
  auto corpus = bijective_corpus();
  CHECK(train_tagger(corpus, 3, 9).save() == train_tagger(corpus, 3, 9).save());
}

TEST_CASE("checkpoint round trip") {
  auto corpus = bijective_corpus();
  auto model = train_tagger(corpus, 3, 9);
  const std::string text = model.save();
  CHECK(text.starts_with("# dexparse tagger v1\n"));
  auto back = TaggerModel::load(text);
  CHECK(back.save() == text);
  CHECK(back.tag_inventory() == model.tag_inventory());
  CHECK(back.weight("w=Hund", "NN.Nom.Sg.Masc") == model.weight("w=Hund", "NN.Nom.Sg.Masc"));
  CHECK_THROWS(TaggerModel::load("garbage"));
  CHECK_THROWS(TaggerModel::load("# dexparse tagger v2\n"));
  CHECK_THROWS(TaggerModel::load("# dexparse tagger v1\nb\tX\tnan\n<inventory>\tX\t0\n"));
  CHECK_THROWS(TaggerModel::load("# dexparse tagger v1\nb\tY\t1\n<inventory>\tX\t0\n"));
}

TEST_CASE("output tags come from the inventory") {
  auto corpus = bijective_corpus();
  auto model = train_tagger(corpus, 2, 3);
  const auto& inv = model.tag_inventory();
  for (const auto& s : tag_all(model, {TaggedSentence{{"unbekannt", "Wort", "123"}, {}}}))
    for (const auto& t : s.tags) CHECK(std::binary_search(inv.begin(), inv.end(), t.str()));
}

TEST_CASE("errors") {
  CHECK_THROWS(train_tagger({}, 5, 1));
  CHECK_THROWS(train_tagger(bijective_corpus(), 0, 1));
  TaggedSentence a{{"x"}, {ExtendedTag{"A", {}}}};
  CHECK_THROWS(tagger_accuracy({a}, {}));
}

TEST_CASE("accuracy") {
  TaggedSentence g{{"a", "b", "c", "d"}, {ExtendedTag{"A", {}}, ExtendedTag{"B", {}}, ExtendedTag{"C", {}}, ExtendedTag{"D", {}}}};
  TaggedSentence p = g;
  CHECK(tagger_accuracy({g}, {p}) == 1.0);
  p.tags[3] = ExtendedTag{"X", {}};
  CHECK(tagger_accuracy({g}, {p}) == doctest::Approx(0.75));
  for (auto& t : p.tags) t = ExtendedTag{"X", {}};
  CHECK(tagger_accuracy({g}, {p}) == 0.0);
}

TEST_CASE("training accuracy does not drop with more epochs on separable data") {
  auto corpus = bijective_corpus();
  double last = 0;
  for (int e = 1; e <= 4; ++e) {
    const double acc = tagger_accuracy(corpus, tag_all(train_tagger(corpus, e, 5), corpus));
    CHECK(acc >= last);
    last = acc;
  }
}

TEST_CASE("close to the Viterbi oracle on HMM data") {
  Rng rng(21);
  const auto hmm = synth::Hmm::make(rng);
  const auto train = hmm.sample(rng, 5000);
  const auto test = hmm.sample(rng, 500);
  const auto model = train_tagger(train, 5, 10);
  const double acc = tagger_accuracy(test, tag_all(model, test));
  std::vector<TaggedSentence> oracle;
  for (const auto& s : test) oracle.push_back(TaggedSentence{s.tokens, hmm.viterbi(s.tokens)});
  const double viterbi = tagger_accuracy(test, oracle);
  MESSAGE("perceptron " << acc << ", viterbi " << viterbi);
  CHECK(acc >= 0.90);
  CHECK(acc >= viterbi - 0.05);
}
