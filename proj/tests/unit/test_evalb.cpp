#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dexparse/evalb.hpp"
#include "dexparse/treebank_io.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace dexparse;

namespace {

Tree read(const std::string& s) { return parse_bracketed(s).at(0); }

/// Random bracketing over the given preterminals, with occasional unary chains.
Tree regroup(Rng& rng, std::vector<Tree> items) {
  static const std::vector<std::string> labels = {"S", "NP", "VP", "PP", "NP-SB"};
  while (items.size() > 1) {
    const auto at = rng.below(items.size() - 1);
    const auto width = 2 + rng.below(std::min<std::uint64_t>(3, items.size() - at) - 1);
    std::vector<Tree> kids(items.begin() + static_cast<long>(at), items.begin() + static_cast<long>(at + width));
    Tree node = Tree::node(labels[rng.below(labels.size())], std::move(kids));
    if (rng.below(5) == 0) node = Tree::node(labels[rng.below(labels.size())], {node});
    items.erase(items.begin() + static_cast<long>(at), items.begin() + static_cast<long>(at + width));
    items.insert(items.begin() + static_cast<long>(at), std::move(node));
  }
  if (items[0].is_preterminal()) return Tree::node("S", std::move(items));
  return items[0];
}

Tree random_pair_partner(Rng& rng, const Tree& gold) {
  std::vector<Tree> pre;
  for (const Tree* p : gold.preterminals()) pre.push_back(*p);
  return regroup(rng, std::move(pre));
}

}  // namespace

TEST_CASE("span extraction examples") {
  const Tree t = read("(S (NP (ART a) (NN b)) (VVFIN c))");
  const std::vector<LabeledSpan> expect = {{0, 2, "NP"}, {0, 3, "S"}};
  CHECK(extract_eval_spans(t) == expect);
  CHECK(extract_eval_spans(read("(S (NP (ART a) (NN b)) (VVFIN c) ($. .))")) == expect);
  CHECK(extract_eval_spans(read("(S ($-LRB- \") (NP (ART a) (NN b)) (VVFIN c))")) == expect);
  const std::vector<LabeledSpan> chain = {{0, 1, "NP"}, {0, 1, "S"}, {0, 1, "VP"}};
  CHECK(extract_eval_spans(read("(S (VP (NP (NN x))))")) == chain);

  EvalConfig cfg;
  cfg.ignore_labels = {"NP"};
  CHECK(extract_eval_spans(t, cfg) == std::vector<LabeledSpan>{{0, 3, "S"}});
  EvalConfig no_root;
  no_root.include_root = false;
  CHECK(extract_eval_spans(t, no_root) == std::vector<LabeledSpan>{{0, 2, "NP"}});
}

TEST_CASE("hand-computed corpus score") {
  const Tree gold = read("(S (NP (ART a) (NN b)) (VVFIN c))");
  const Tree pred = read("(S (ART a) (VP (NN b) (VVFIN c)))");
  auto r = score_corpus({gold}, {pred});
  CHECK(r.matched == 1);
  CHECK(r.precision == 50.0);
  CHECK(r.recall == 50.0);
  CHECK(r.fscore == 50.0);
  CHECK(r.complete_match == 0.0);
  CHECK(format_summary(r) == "50.00 50.00 50.00 0.00");

  auto self = score_corpus({gold, pred}, {gold, pred});
  CHECK(format_summary(self) == "100.00 100.00 100.00 100.00");
  CHECK_THROWS(score_corpus({gold}, {}));
}

TEST_CASE("summary formatting") {
  EvalResult r;
  r.matched = 6472;
  r.gold_total = 10000;
  r.pred_total = 9220;
  r.exact_trees = 1;
  r.total_trees = 8;
  r.finalize();
  CHECK(format_summary(r) == "64.72 70.20 67.35 12.50");

  EvalResult table;
  table.recall = 64.72;
  table.precision = 70.19;
  table.fscore = 67.34;
  table.complete_match = 12.5;
  CHECK(format_summary(table) == "64.72 70.19 67.34 12.50");
}

TEST_CASE("length mismatch excludes the pair") {
  const Tree a = read("(S (NP (ART a) (NN b)) (VVFIN c))");
  const Tree b = read("(S (NN b) (VVFIN c))");
  auto r = score_corpus({a, a}, {b, a});
  CHECK(r.skipped == 1);
  CHECK(r.total_trees == 1);
  CHECK(r.fscore == 100.0);
  CHECK(r.sentences[0].error.find("length mismatch") != std::string::npos);
  const std::string report = format_report(r);
  CHECK(report.starts_with("# recall\t100.00\n"));
  CHECK(report.find("1\tERROR\t") != std::string::npos);
  CHECK(report.find("2\t2\t2\t2\t1\n") != std::string::npos);
}

TEST_CASE("properties on random pairs") {
  Rng rng(77);
  std::vector<Tree> gold, pred;
  for (int k = 0; k < 200; ++k) {
    gold.push_back(synth::random_tree(rng));
    pred.push_back(random_pair_partner(rng, gold.back()));
  }
  auto r = score_corpus(gold, pred);
  auto s = score_corpus(pred, gold);
  CHECK(r.precision == s.recall);
  CHECK(r.recall == s.precision);
  CHECK(r.fscore == doctest::Approx(s.fscore).epsilon(1e-14));
  CHECK(r.matched <= std::min(r.gold_total, r.pred_total));
  CHECK(r.skipped == 0);
  CHECK(format_summary(score_corpus(gold, gold)) == "100.00 100.00 100.00 100.00");

  // POS labels never matter (punctuation tags excepted, which the relabel skips).
  auto relabel = [](Tree t) {
    std::function<void(Tree&)> go = [&](Tree& n) {
      if (n.is_preterminal()) {
        if (!n.label.starts_with('$')) n.label = "XY";
        return;
      }
      for (auto& c : n.children) go(c);
    };
    go(t);
    return t;
  };
  std::vector<Tree> relabeled;
  for (const auto& t : pred) relabeled.push_back(relabel(t));
  auto rr = score_corpus(gold, relabeled);
  CHECK(format_summary(rr) == format_summary(r));
  CHECK(rr.matched == r.matched);
}

TEST_CASE("punctuation insertion leaves metrics unchanged") {
  Rng rng(5);
  std::vector<Tree> gold, pred, gold_p, pred_p;
  for (int k = 0; k < 100; ++k) {
    Tree g = synth::random_tree(rng);
    Tree p = random_pair_partner(rng, g);
    gold.push_back(g);
    pred.push_back(p);
    g.children.push_back(Tree::preterminal("$.", "."));
    p.children.insert(p.children.begin(), Tree::preterminal("$,", ","));
    gold_p.push_back(g);
    pred_p.push_back(p);
  }
  auto a = score_corpus(gold, pred);
  auto b = score_corpus(gold_p, pred_p);
  CHECK(a.matched == b.matched);
  CHECK(a.gold_total == b.gold_total);
  CHECK(a.pred_total == b.pred_total);
  CHECK(a.exact_trees == b.exact_trees);
}

TEST_CASE("matches the naive scorer") {
  Rng rng(2024);
  for (int round = 0; round < 20; ++round) {
    std::vector<Tree> gold, pred;
    std::vector<std::string> gs, ps;
    for (int k = 0; k < 50; ++k) {
      gold.push_back(synth::random_tree(rng));
      pred.push_back(rng.below(6) == 0 ? gold.back() : random_pair_partner(rng, gold.back()));
      gs.push_back(serialize_tree(gold.back()));
      ps.push_back(serialize_tree(pred.back()));
    }
    auto fast = score_corpus(gold, pred);
    auto naive = oracle::naive_evalb(gs, ps);
    CHECK(fast.recall == naive.recall);
    CHECK(fast.precision == naive.precision);
    CHECK(fast.fscore == naive.fscore);
    CHECK(fast.complete_match == naive.complete_match);
  }
}
