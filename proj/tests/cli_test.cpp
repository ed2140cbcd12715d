#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "chordvec/chord.h"
#include "chordvec/cli.h"
#include "chordvec/corpus.h"
#include "chordvec/evaluation.h"
#include "lm_fixture.h"
#include "test_util.h"

using namespace chordvec;
using Json = nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "chordvec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

// 70 chord symbols; chord i occurs in exactly 70 - i songs.
std::vector<std::string> rank_fixture(const std::string& path) {
  std::vector<std::string> symbols = annotation_palette();
  for (const char* r : {"C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"}) symbols.push_back(std::string(r) + "sus4");
  for (const char* r : {"C", "D", "E", "F", "G", "A", "B", "C#", "F#", "G#"}) symbols.push_back(std::string(r) + "dim");
  Corpus c;
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    std::vector<std::string> chords(symbols.begin(), symbols.begin() + static_cast<long>(j) + 1);
    c.songs.push_back(testutil::song("r" + std::to_string(j), chords));
  }
  save_corpus(c, path);
  return symbols;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const Result none = run({});
  CHECK(none.code == 2);
  CHECK(none.err.find("Subcommands:") != std::string::npos);
  CHECK(run({"stats"}).code == 2);
  CHECK(run({"stats", "--input", "x", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--format", "xml", "stats", "--input", "x"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).out == std::string(kVersion) + "\n");
}

TEST_CASE("data errors exit with 1") {
  testutil::TempDir dir;
  const Result r = run({"--out-dir", dir.file("o"), "stats", "--input", dir.file("missing.jsonl")});
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot") != std::string::npos);
  testutil::write_file(dir.file("bad.jsonl"), "{\"id\": 3}\n");
  CHECK(run({"--out-dir", dir.file("o"), "stats", "--input", dir.file("bad.jsonl")}).code == 1);
}

TEST_CASE("stats emits the 61-row rank table") {
  testutil::TempDir dir;
  const auto symbols = rank_fixture(dir.file("c.jsonl"));
  const Result r = run({"--out-dir", dir.file("o"), "stats", "--input", dir.file("c.jsonl")});
  REQUIRE(r.code == 0);
  const auto rows = lines(testutil::slurp(dir.file("o/ranks.csv")));
  REQUIRE(rows.size() == 62);
  CHECK(rows[0] == "rank,chord,songs");
  for (std::size_t i = 1; i <= 61; ++i) {
    CHECK(rows[i] == std::to_string(i) + "," + symbols[i - 1] + "," + std::to_string(71 - i));
  }
  CHECK(r.out.find("power law") != std::string::npos);

  const Result j = run({"--out-dir", dir.file("o"), "--format", "json", "stats", "--input", dir.file("c.jsonl"), "--top", "5"});
  REQUIRE(j.code == 0);
  const Json parsed = Json::parse(testutil::slurp(dir.file("o/ranks.json")));
  CHECK(parsed["ranks"].size() == 5);
  CHECK(parsed["ranks"][4]["songs"] == 66);
}

TEST_CASE("every run writes a provenance record") {
  testutil::TempDir dir;
  rank_fixture(dir.file("c.jsonl"));
  REQUIRE(run({"--seed", "7", "--out-dir", dir.file("o"), "stats", "--input", dir.file("c.jsonl")}).code == 0);
  const Json p = Json::parse(testutil::slurp(dir.file("o/stats.provenance.json")));
  CHECK(p["command"] == "stats");
  CHECK(p["seed"] == 7);
  CHECK(p["inputs"][dir.file("c.jsonl")] == file_digest(dir.file("c.jsonl")));
  CHECK(p["argv"].size() == 8);
  CHECK(p["version"] == kVersion);
}

TEST_CASE("file digest is 64-bit FNV-1a") {
  testutil::TempDir dir;
  testutil::write_file(dir.file("a"), "a");
  CHECK(file_digest(dir.file("a")) == "af63dc4c8601ec8c");
  testutil::write_file(dir.file("empty"), "");
  CHECK(file_digest(dir.file("empty")) == "cbf29ce484222325");
}

TEST_CASE("ingest, dedup and synthetic generation") {
  testutil::TempDir dir;
  Corpus c;
  c.songs.push_back(testutil::song("a", {"C", "F", "G", "C", "F", "G", "Am"}));
  c.songs.push_back(testutil::song("b", {"C", "F", "G", "C", "F", "G", "Am"}));
  c.songs.push_back(testutil::song("short", {"C", "G"}));
  save_corpus(c, dir.file("in.jsonl"));
  const std::string o = dir.file("o");
  REQUIRE(run({"--out-dir", o, "ingest", "--input", dir.file("in.jsonl"), "--output", dir.file("nested/ing.jsonl")}).code == 0);
  CHECK(load_corpus(dir.file("nested/ing.jsonl")).size() == 2);
  REQUIRE(run({"--out-dir", o, "dedup", "--input", dir.file("nested/ing.jsonl"), "--output", dir.file("dd.jsonl")}).code == 0);
  CHECK(load_corpus(dir.file("dd.jsonl")).size() == 1);

  REQUIRE(run({"--out-dir", o, "--seed", "4", "gen-synthetic", "--songs", "40", "--skew", "0.5", "--output",
               dir.file("s1.jsonl")})
              .code == 0);
  run({"--out-dir", o, "--seed", "4", "gen-synthetic", "--songs", "40", "--skew", "0.5", "--output", dir.file("s2.jsonl")});
  CHECK(testutil::slurp(dir.file("s1.jsonl")) == testutil::slurp(dir.file("s2.jsonl")));
  CHECK(load_corpus(dir.file("s1.jsonl")).songs[1].labels.at("gender") == "female");
}

TEST_CASE("embedding training, nearest and analyses") {
  testutil::TempDir dir;
  const std::string o = dir.file("o");
  REQUIRE(run({"--out-dir", o, "gen-synthetic", "--songs", "300", "--skew", "0.5", "--output", dir.file("s.jsonl")}).code == 0);
  for (const char* name : {"e1.txt", "e2.txt"}) {
    REQUIRE(run({"--out-dir", o, "train-emb", "--input", dir.file("s.jsonl"), "--output", dir.file(name), "--dim", "8",
                 "--epochs", "1"})
                .code == 0);
  }
  CHECK(testutil::slurp(dir.file("e1.txt")) == testutil::slurp(dir.file("e2.txt")));
  const Result near = run({"--out-dir", o, "nearest", "--embeddings", dir.file("e1.txt"), "--chord", "G", "--k", "3"});
  REQUIRE(near.code == 0);
  CHECK(lines(near.out).size() == 4);
  const Result near_json =
      run({"--out-dir", o, "--format", "json", "nearest", "--embeddings", dir.file("e1.txt"), "--chord", "G", "--k", "3"});
  CHECK(Json::parse(near_json.out).size() == 3);

  for (const char* kind : {"pca", "fifths", "relatives", "enharmonics"}) {
    CHECK(run({"--out-dir", o, "analyze", kind, "--embeddings", dir.file("e1.txt")}).code == 0);
  }
  CHECK(run({"--out-dir", o, "analyze", "salience", "--input", dir.file("s.jsonl"), "--label", "gender", "--kind",
             "quality"})
            .code == 0);
  for (const char* f : {"pca.csv", "pca.svg", "fifths_major.csv", "relatives.csv", "enharmonics.csv",
                        "salience_quality_gender.csv", "analyze-pca.provenance.json", "train-emb.provenance.json"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir.file(std::string("o/") + f)), f);
  }
  CHECK(run({"analyze"}).code == 2);
}

TEST_CASE("train-lm, predict and interactive predict") {
  testutil::TempDir dir;
  const std::string o = dir.file("o");
  save_corpus(testutil::loop_corpus(50, "t"), dir.file("t.jsonl"));
  save_corpus(testutil::loop_corpus(10, "v"), dir.file("v.jsonl"));
  const Result tr = run({"--out-dir", o, "--seed", "3", "train-lm", "--train", dir.file("t.jsonl"), "--valid",
                         dir.file("v.jsonl"), "--output", dir.file("lm.json"), "--emb-dim", "16", "--bptt", "10",
                         "--batch", "5", "--epochs", "40"});
  REQUIRE(tr.code == 0);
  CHECK(tr.out.find("validation perplexity") != std::string::npos);

  const Result p = run({"predict", "--model", dir.file("lm.json"), "--progression", "C,G,Am", "--k", "2"});
  REQUIRE(p.code == 0);
  CHECK(p.out.rfind("1. F ", 0) == 0);

  // Picking suggestion 1 appends F; the next query continues from it.
  const Result it = run({"predict", "--model", dir.file("lm.json"), "--interactive", "--k", "2"}, "C G Am\n1\nBb\n?\nq\n");
  REQUIRE(it.code == 0);
  CHECK(it.out.find("progression: C G Am\n1. F ") != std::string::npos);
  const auto after_pick = it.out.find("progression: C G Am F\n");
  REQUIRE(after_pick != std::string::npos);
  CHECK(it.out.find(". C ", after_pick) < it.out.find("progression: C G Am F Bb"));
  CHECK(it.out.find("progression: C G Am F Bb\n") != std::string::npos);
  CHECK(it.out.find("cannot parse") != std::string::npos);

  CHECK(run({"predict", "--model", dir.file("lm.json")}).code == 1);
  CHECK(run({"train-lm", "--output", dir.file("x.json")}).code == 1);

  // Annotation evaluation against the trained model.
  std::string ann;
  AnnotationRecord r;
  r.prompt_id = "p1";
  r.progression = {"C", "G", "Am"};
  r.first_choice = "F";
  r.alternatives = {"C"};
  for (int a = 0; a < 3; ++a) {
    r.annotator_id = "a" + std::to_string(a);
    r.expertise = a * 30;
    ann += annotation_to_json(r) + "\n";
  }
  testutil::write_file(dir.file("ann.jsonl"), ann);
  const Result ev = run({"--out-dir", o, "eval-annotations", "--annotations", dir.file("ann.jsonl"), "--model",
                         dir.file("lm.json")});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("Match_best") != std::string::npos);
  const std::string csv = testutil::slurp(dir.file("o/annotation_metrics.csv"));
  CHECK(csv.find("lm,all,3,100.0000,100.0000") != std::string::npos);
}

TEST_CASE("classify runs the logistic-regression family") {
  testutil::TempDir dir;
  const std::string o = dir.file("o");
  REQUIRE(run({"--out-dir", o, "gen-synthetic", "--songs", "200", "--skew", "1.0", "--output", dir.file("s.jsonl")}).code == 0);
  const Result r = run({"--out-dir", o, "classify", "--input", dir.file("s.jsonl"), "--label", "gender", "--folds", "4",
                        "--lr-only"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("LR boc_count") != std::string::npos);
  const auto rows = lines(testutil::slurp(dir.file("o/classify_gender.csv")));
  CHECK(rows.size() == 4);
  CHECK(run({"--out-dir", o, "classify", "--input", dir.file("s.jsonl"), "--label", "country", "--lr-only"}).code == 1);
}
