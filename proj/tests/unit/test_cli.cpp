#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "dexparse/pipeline.hpp"
#include "dexparse/tag_map.hpp"
#include "dexparse/treebank_io.hpp"
#include "synthetic.hpp"
#include "toy_data.hpp"

using namespace dexparse;
namespace fs = std::filesystem;

namespace {

const std::string kSource = DEXPARSE_SOURCE_DIR;
const std::string kToy = kSource + "/data/toy_treebank.brackets";

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

/// Runs the command-line tool with `args` in `dir`.
Run run_cli(const fs::path& dir, const std::string& args) {
  const std::string out = (dir / "stdout.txt").string();
  const std::string err = (dir / "stderr.txt").string();
  const std::string cmd = "cd '" + dir.string() + "' && '" + std::string(DEXPARSE_CLI) + "' " + args + " >'" + out +
                          "' 2>'" + err + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dexparse_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

/// First `count` trees of the bundled toy treebank.
std::string toy_subset(std::size_t count) {
  auto trees = parse_bracketed(read_file(kToy));
  trees.resize(count);
  return serialize_treebank(trees);
}

}  // namespace

TEST_CASE("bundled data matches the generator") {
  for (const auto& [name, text] : toy_data::bundle()) {
    INFO(name);
    CHECK(read_file(kSource + "/data/" + name) == text);
  }
}

TEST_CASE("presets and config files") {
  auto desk = PipelineConfig::preset("desk");
  CHECK(desk.model == ModelConfig::desk());
  auto paper = PipelineConfig::preset("paper");
  CHECK(paper.model.model_dim == 1024);
  CHECK(paper.train.batch_size == 32);
  CHECK(paper.train.learning_rate == 5e-5);
  CHECK_THROWS(PipelineConfig::preset("huge"));

  auto cfg = parse_config("[model]\nmodel_dim=32\n[run]\nmode=lexicalized\napply_mapping=false\n"
                          "[train]\noptimizer=sgd\n[eval]\npunctuation_tags=$. X\n",
                          desk);
  CHECK(cfg.model.model_dim == 32);
  CHECK(cfg.model.num_layers == desk.model.num_layers);
  CHECK(cfg.mode == Mode::Lexicalized);
  CHECK_FALSE(cfg.apply_mapping);
  CHECK(cfg.train.optimizer == Optimizer::Sgd);
  CHECK(cfg.eval.punctuation_tags == std::set<std::string>{"$.", "X"});

  CHECK_THROWS(parse_config("[model]\nwidth=3\n", desk));
  CHECK_THROWS(parse_config("[nowhere]\nx=1\n", desk));
  CHECK_THROWS(parse_config("[model]\nmodel_dim=abc\n", desk));
  CHECK_THROWS(parse_config("[run]\nmode=sideways\n", desk));

  // A snapshot reads back to the same configuration.
  cfg.paths.treebank = "a.brackets";
  cfg.set_seed(99);
  CHECK(parse_config(cfg.snapshot(), desk).snapshot() == cfg.snapshot());
  CHECK(parse_config(paper.snapshot(), desk).snapshot() == paper.snapshot());
}

TEST_CASE("training tree preparation") {
  PipelineConfig cfg;
  const std::string text = "(S (NP-SB (ART.Nom.Sg der) (NN.Nom.Sg Hund)) (VVFIN bellt) ($. .))\n";
  auto delex = prepare_training_trees(text, cfg);
  REQUIRE(delex.size() == 1);
  CHECK(serialize_tree(delex[0]) ==
        "(S (NP (ART ART.Nom.Sg) (NN NN.Nom.Sg)) (" + std::string(kEmptyLabel) + " (VVFIN VVFIN) ($. $.)))");
  cfg.mode = Mode::Lexicalized;
  auto lex = prepare_training_trees(text, cfg);
  CHECK(lex[0].tokens() == std::vector<std::string>{"der", "Hund", "bellt", "."});

  try {
    prepare_training_trees("(S (S+VP (NN x)))", cfg);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "binarize");
  }
  try {
    prepare_training_trees("(S (NN x)\n(S (NN y)", cfg);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load");
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("model inputs") {
  PipelineConfig cfg;
  const TagMapTable table = default_tag_map();
  TaggedSentence s{{"diu", "vrouwe", "in"}, {ExtendedTag::parse("DDART.Nom.Sg"), ExtendedTag::parse("NA.Nom.Sg"),
                                           ExtendedTag::parse("APPR|NA")}};
  auto in = model_inputs(s, cfg, table);
  CHECK(in[0].str() == "ART.Nom.Sg");
  CHECK(in[1].str() == "NN.Nom.Sg");
  CHECK(in[2].str() == "APPR");

  cfg.apply_mapping = false;
  CHECK(model_inputs(s, cfg, table)[0].str() == "DDART.Nom.Sg");
  cfg.apply_mapping = true;
  cfg.transform.keep_morphology = false;
  CHECK(model_inputs(s, cfg, table)[1].str() == "NN");
}

TEST_CASE("relexicalize") {
  const Tree parsed = parse_bracketed("(S (NP (ART ART.Nom) (NN NN)) (VVFIN VVFIN))").at(0);
  TaggedSentence s{{"diu", "vrouwe", "sprach"},
                   {ExtendedTag::parse("DDART.Nom"), ExtendedTag::parse("NA"), ExtendedTag::parse("VVFIN")}};
  CHECK(serialize_tree(relexicalize(parsed, s)) == "(S (NP (DDART.Nom diu) (NA vrouwe)) (VVFIN sprach))");
  s.tokens.pop_back();
  s.tags.pop_back();
  CHECK_THROWS(relexicalize(parsed, s));
}

TEST_CASE("missing inputs fail in the load stage") {
  TempDir dir("missing");
  auto r = run_cli(dir.path, "train --treebank nowhere.brackets --model m.bin");
  CHECK(r.status == 2);
  CHECK(r.err.find("stage=load") != std::string::npos);

  r = run_cli(dir.path, "parse --model nowhere.bin --output out.brackets --use-gold-tags --treebank " + kToy);
  CHECK(r.status == 2);
  CHECK(r.err.find("stage=load") != std::string::npos);

  r = run_cli(dir.path, "train --treebank " + kToy);
  CHECK(r.status == 2);
  CHECK(r.err.find("stage=config") != std::string::npos);

  write_file(dir / "bad.ini", "[model]\nwidth=3\n");
  r = run_cli(dir.path, "train -c bad.ini --treebank " + kToy + " --model m.bin");
  CHECK(r.status == 2);
  CHECK(r.err.find("stage=config") != std::string::npos);

  r = run_cli(dir.path, "frobnicate");
  CHECK(r.status != 0);
}

TEST_CASE("train, parse and eval") {
  TempDir dir("flow");
  write_file(dir / "train.brackets", toy_subset(12));
  write_file(dir / "small.ini", "[model]\nmodel_dim=32\nhead_dim=8\nff_dim=64\nlabel_hidden_dim=32\n[train]\nbatch_size=4\n");

  auto r = run_cli(dir.path, "train -c small.ini --epochs 3 --treebank train.brackets --model m.bin --log train.log");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("trained on 12 trees for 3 epochs") != std::string::npos);
  CHECK(fs::exists(dir / "m.bin"));
  CHECK(lines(read_file(dir / "train.log")).size() == 4);
  const std::string manifest = read_file(dir / "m.bin.manifest");
  CHECK(manifest.starts_with("# dexparse manifest\ncommand=train\n"));
  CHECK(manifest.find("model_dim=32") != std::string::npos);
  CHECK(manifest.find("epochs=3") != std::string::npos);
  CHECK(manifest.find("train.brackets=crc32:") != std::string::npos);
  const auto model = load_model(read_file(dir / "m.bin"));
  CHECK(model.config.model_dim == 32);
  CHECK_FALSE(model.lexicalized);

  // Gold-tag parsing keeps the gold tokens at the leaves.
  r = run_cli(dir.path, "parse --model m.bin --use-gold-tags --treebank train.brackets --output pred.brackets");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("parsed 12 of 12 sentences (0 failed)") != std::string::npos);
  const auto gold = parse_bracketed(read_file(dir / "train.brackets"));
  const auto pred = parse_bracketed(read_file(dir / "pred.brackets"));
  REQUIRE(pred.size() == gold.size());
  for (std::size_t k = 0; k < gold.size(); ++k) CHECK(pred[k].tokens() == gold[k].tokens());
  CHECK(fs::exists(dir / "pred.brackets.manifest"));

  // The same from a tagged corpus.
  std::vector<TaggedSentence> tagged;
  for (const auto& t : gold) {
    TaggedSentence s;
    for (const Tree* p : t.preterminals()) {
      s.tokens.push_back(*p->children[0].token);
      s.tags.push_back(ExtendedTag::parse(p->label));
    }
    tagged.push_back(s);
  }
  write_file(dir / "tagged.tsv", write_tagged_corpus(tagged));
  r = run_cli(dir.path, "parse --model m.bin --tagged tagged.tsv --output pred2.brackets");
  REQUIRE(r.status == 0);
  CHECK(read_file(dir / "pred2.brackets") == read_file(dir / "pred.brackets"));

  // Self-comparison and a mismatched corpus.
  r = run_cli(dir.path, "eval --treebank train.brackets --predicted train.brackets --report self.eval");
  REQUIRE(r.status == 0);
  CHECK(lines(r.out).at(0) == "100.00 100.00 100.00 100.00");
  CHECK(read_file(dir / "self.eval").starts_with("# recall\t100.00\n"));
  r = run_cli(dir.path, "eval --treebank train.brackets --predicted pred.brackets");
  REQUIRE(r.status == 0);
  CHECK(fs::exists(dir / "pred.brackets.eval"));
  write_file(dir / "short.brackets", toy_subset(5));
  r = run_cli(dir.path, "eval --treebank train.brackets --predicted short.brackets");
  CHECK(r.status == 2);
  CHECK(r.err.find("stage=eval") != std::string::npos);

  // Lexicalized training yields a different checkpoint.
  r = run_cli(dir.path, "train -c small.ini --epochs 3 --mode lexicalized --treebank train.brackets --model lex.bin");
  REQUIRE(r.status == 0);
  const auto lex = load_model(read_file(dir / "lex.bin"));
  CHECK(lex.lexicalized);
  CHECK(read_file(dir / "lex.bin") != read_file(dir / "m.bin"));
  CHECK(lex.pos_vocab.find("Hund") + lex.pos_vocab.find("Katze") + lex.pos_vocab.find("Frau") > -3);
  r = run_cli(dir.path, "parse --model lex.bin --tagged tagged.tsv --output lex.brackets");
  REQUIRE(r.status == 0);
  CHECK(parse_bracketed(read_file(dir / "lex.brackets")).size() == 12);
}

TEST_CASE("over-length sentences are skipped and reported") {
  TempDir dir("overlong");
  write_file(dir / "train.brackets", toy_subset(6));
  write_file(dir / "small.ini", "[model]\nmodel_dim=16\nhead_dim=4\nff_dim=16\nlabel_hidden_dim=16\nmax_len=20\n");
  REQUIRE(run_cli(dir.path, "train -c small.ini --epochs 1 --treebank train.brackets --model m.bin").status == 0);
  std::string tagged = "der\tART.Nom.Sg.Masc\nHund\tNN.Nom.Sg.Masc\n\n";
  for (int k = 0; k < 25; ++k) tagged += "x\tNN\n";
  tagged += "\nes\tPPER\n";
  write_file(dir / "in.tsv", tagged);
  auto r = run_cli(dir.path, "parse --model m.bin --tagged in.tsv --output out.brackets");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("parsed 2 of 3 sentences (1 failed)") != std::string::npos);
  CHECK(r.err.find("sentence 2") != std::string::npos);
  CHECK(lines(read_file(dir / "out.brackets")).size() == 2);
}

TEST_CASE("tagger, mapping, delexicalization and filtering") {
  TempDir dir("tools");
  write_file(dir / "tagged.tsv", read_file(kSource + "/data/toy_tagged.tsv"));
  auto r = run_cli(dir.path, "tag --train --tagged tagged.tsv --tagger tagger.txt");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("trained tagger on 50 sentences") != std::string::npos);

  write_file(dir / "tokens.txt", "der\nHund\nsieht\ndie\nKatze\n.\n\ner\nliest\n");
  r = run_cli(dir.path, "tag --tokens tokens.txt --tagger tagger.txt --output tokens.tsv");
  REQUIRE(r.status == 0);
  const auto tagged = read_tagged_corpus(read_file(dir / "tokens.tsv"));
  REQUIRE(tagged.size() == 2);
  CHECK(tagged[0].tokens.size() == 6);
  CHECK(tagged[0].tags[5].pos == "$.");

  write_file(dir / "hist.tsv", "diu\tDDART.Nom.Sg.Fem\nvrouwe\tNA.Nom.Sg.Fem\nin\tAPPR|NA\n");
  r = run_cli(dir.path, "map-tags --tagged hist.tsv --output mapped.tsv");
  REQUIRE(r.status == 0);
  CHECK(read_file(dir / "mapped.tsv") == "diu\tART.Nom.Sg.Fem\nvrouwe\tNN.Nom.Sg.Fem\nin\tAPPR\n\n");
  CHECK(r.out.find("3 tags changed") != std::string::npos);
  write_file(dir / "custom.tagmap", "[pos]\nNA\tNE\n[features]\n");
  r = run_cli(dir.path, "map-tags --tagged hist.tsv --tag-map custom.tagmap --output custom.tsv");
  REQUIRE(r.status == 0);
  CHECK(read_file(dir / "custom.tsv").find("vrouwe\tNE.Nom.Sg.Fem") != std::string::npos);

  r = run_cli(dir.path, "delex --tagged hist.tsv --output delex.txt");
  REQUIRE(r.status == 0);
  CHECK(read_file(dir / "delex.txt") == "DDART.Nom.Sg.Fem NA.Nom.Sg.Fem APPR|NA\n");
  r = run_cli(dir.path, "delex --no-morph --tagged hist.tsv --output delex2.txt");
  CHECK(read_file(dir / "delex2.txt") == "DDART NA APPR|NA\n");
  write_file(dir / "one.brackets", "(S (NP-SB (ART.Nom der) (NN Hund)) (VVFIN bellt))\n");
  r = run_cli(dir.path, "delex --treebank one.brackets --output one.delex");
  CHECK(read_file(dir / "one.delex") == "(S (NP (ART ART.Nom) (NN NN)) (VVFIN VVFIN))\n");

  std::string target;
  for (int k = 0; k < 10; ++k) target += k == 3 ? "(S (NN x))\n" : "(S (NN a) (VVFIN b))\n";
  target += "(S (XY et) (XY in) (XY est) (NN Hus))\n";
  write_file(dir / "target.brackets", target);
  write_file(dir / "latin.txt", "et\nin\nest\n");
  r = run_cli(dir.path, "filter --treebank target.brackets --latin latin.txt --output kept.brackets --report filter.txt");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("kept 9 of 11 trees") != std::string::npos);
  CHECK(lines(read_file(dir / "filter.txt")).size() == 2);
}

TEST_CASE("command-line flags override the config file") {
  TempDir dir("precedence");
  write_file(dir / "train.brackets", toy_subset(4));
  write_file(dir / "c.ini", "[model]\nmodel_dim=16\nhead_dim=4\nff_dim=16\nlabel_hidden_dim=16\n[train]\nepochs=5\nseed=3\n");
  auto r = run_cli(dir.path, "train -c c.ini --epochs 1 --seed 4 --treebank train.brackets --model m.bin");
  REQUIRE(r.status == 0);
  const std::string manifest = read_file(dir / "m.bin.manifest");
  CHECK(manifest.find("epochs=1\n") != std::string::npos);
  CHECK(manifest.find("seed=4\n") != std::string::npos);
  CHECK(manifest.find("seed=3\n") == std::string::npos);
  CHECK(manifest.find("model_dim=16\n") != std::string::npos);
}
