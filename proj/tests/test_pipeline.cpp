#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chancegram/fileio.hpp"
#include "chancegram/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace chancegram;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("chancegram_pipeline_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

RunConfig small_run(const Scratch& s, const std::string& work = "work") {
  const auto corpus = s.dir / "corpus.txt";
  if (!fs::exists(corpus)) {
    testing::SyntheticSpec spec;
    spec.tokens = 3000;
    spec.vocabulary = 200;
    spec.planted_bigrams = 6;
    spec.planted_trigrams = 4;
    spec.seed = 17;
    std::ofstream(corpus) << testing::make_synthetic_text(spec);
  }
  RunConfig c;
  c.corpus_path = corpus.string();
  c.work_dir = (s.dir / work).string();
  c.permutations = 300;
  c.min_freq = 2;
  c.seed = 5;
  return c;
}

std::vector<bool> executed(const PipelineResult& r) {
  std::vector<bool> out;
  for (const auto& st : r.stages) out.push_back(st.executed);
  return out;
}

}  // namespace

TEST_CASE("run file parsing") {
  std::istringstream in(R"(# a run
corpus = "data/c.txt"
format = vertical
work_dir = out   # trailing comment
lengths = [2, 3, 4]
min_freq = 5
permutations = 2000
seed = 7
alpha = 0.01
estimator = raw
tie_break = bytes
n_definition = words
mi3_uncorrected = true
workers = 4
)");
  auto c = parse_run_config(in, "/base");
  CHECK(c.corpus_path == "/base/data/c.txt");
  CHECK(c.work_dir == "/base/out");
  CHECK(c.format == InputFormat::Vertical);
  CHECK(c.lengths == std::vector<int>{2, 3, 4});
  CHECK(c.min_freq == 5);
  CHECK(c.permutations == 2000);
  CHECK(c.seed == 7);
  CHECK(c.alpha == 0.01);
  CHECK(c.estimator == Estimator::Raw);
  CHECK(c.tie_break == TieBreak::Bytes);
  CHECK(c.basis == SizeBasis::Words);
  CHECK(c.mi3_uncorrected);
  CHECK(c.workers == 4);

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_run_config(unknown), PipelineError);
  std::istringstream bad("alpha = lots\n");
  try {
    parse_run_config(bad);
    FAIL("expected an error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == Stage::Config);
    CHECK(exit_code(e.stage()) == 2);
  }
}

TEST_CASE("exit codes are distinct per stage") {
  std::set<int> codes;
  for (Stage s : {Stage::Config, Stage::Ingest, Stage::Count, Stage::Score, Stage::Permtest,
                  Stage::Holm, Stage::Evaluate, Stage::Oracle})
    codes.insert(exit_code(s));
  CHECK(codes.size() == 8);
  CHECK_FALSE(codes.contains(0));
}

TEST_CASE("config hash ignores paths and workers only") {
  RunConfig a;
  a.corpus_path = "/x";
  RunConfig b = a;
  b.corpus_path = "/y";
  b.work_dir = "/elsewhere";
  b.workers = 8;
  b.checkpoint_every = 17;
  CHECK(config_hash(a, "text") == config_hash(b, "text"));
  CHECK(config_hash(a, "text") != config_hash(a, "text!"));
  b.seed = a.seed + 1;
  CHECK(config_hash(a, "text") != config_hash(b, "text"));
  RunConfig c = a;
  c.alpha = 0.01;
  CHECK(config_hash(a, "text") != config_hash(c, "text"));
}

TEST_CASE("config validation") {
  Scratch s("validate");
  auto c = small_run(s);
  c.permutations = 0;
  CHECK_THROWS_AS(run_pipeline(c), PipelineError);
  c = small_run(s);
  c.corpus_path = (s.dir / "missing.txt").string();
  CHECK_THROWS_AS(run_pipeline(c), PipelineError);
  c = small_run(s);
  c.lengths = {5};
  CHECK_THROWS_AS(run_pipeline(c), PipelineError);
}

TEST_CASE("full run produces a report for each requested length") {
  Scratch s("full");
  auto c = small_run(s);
  auto result = run_pipeline(c);
  CHECK(executed(result) == std::vector<bool>(6, true));
  auto json = nlohmann::json::parse(result.report_json);
  CHECK(json["config_hash"] == result.config_hash);
  REQUIRE(json["lengths"].size() == 2);
  CHECK(json["lengths"].contains("2"));
  CHECK(json["lengths"].contains("3"));
  const auto paths = run_paths(c);
  CHECK(fs::exists(paths.significance));
  CHECK_FALSE(fs::exists(paths.checkpoint));
  CHECK(read_file_header(paths.pvalues)->get("config") == result.config_hash);
}

TEST_CASE("resume skips finished stages and reruns only what is missing") {
  Scratch s("resume");
  auto c = small_run(s);
  auto first = run_pipeline(c);

  auto again = run_pipeline(c);
  CHECK(executed(again) == std::vector<bool>(6, false));
  CHECK(again.report_json == first.report_json);

  fs::remove(run_paths(c).report);
  auto partial = run_pipeline(c);
  CHECK(executed(partial) == std::vector<bool>{false, false, false, false, false, true});
  CHECK(partial.report_json == first.report_json);

  fs::remove(run_paths(c).significance);
  fs::remove(run_paths(c).report);
  auto holm_again = run_pipeline(c);
  CHECK(executed(holm_again) == std::vector<bool>{false, false, false, false, true, true});
  CHECK(holm_again.report_json == first.report_json);
}

TEST_CASE("outputs from another configuration are refused unless forced") {
  Scratch s("stale");
  auto c = small_run(s);
  auto first = run_pipeline(c);
  c.seed = 6;
  try {
    run_pipeline(c);
    FAIL("expected a hash mismatch");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == Stage::Ingest);
  }
  c.force = true;
  auto forced = run_pipeline(c);
  CHECK(forced.config_hash != first.config_hash);
  CHECK(executed(forced) == std::vector<bool>(6, true));
}

TEST_CASE("reports are identical across work directories and worker counts") {
  Scratch s("determinism");
  auto a = small_run(s, "one");
  auto b = small_run(s, "four");
  b.workers = 4;
  b.checkpoint_every = 70;
  CHECK(run_pipeline(a).report_json == run_pipeline(b).report_json);
}
