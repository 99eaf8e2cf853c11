#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chancegram/eval.hpp"
#include "chancegram/measures.hpp"
#include "chancegram/mtc.hpp"
#include "chancegram/ngram.hpp"
#include "chancegram/permute.hpp"

namespace chancegram {

enum class Stage { Config, Ingest, Count, Score, Permtest, Holm, Evaluate, Oracle };

std::string_view stage_name(Stage stage);

/// Process exit code for a failure in `stage`; distinct per stage.
int exit_code(Stage stage);

class PipelineError : public Error {
 public:
  PipelineError(Stage stage, const std::string& what)
      : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

enum class InputFormat { Plain, Vertical };

InputFormat parse_input_format(std::string_view name);

struct RunConfig {
  std::string corpus_path;
  InputFormat format = InputFormat::Plain;
  std::string work_dir = "chancegram-run";
  std::vector<int> lengths = {2, 3};
  std::uint64_t min_freq = 3;
  std::uint64_t permutations = 10000;
  std::uint64_t seed = 42;
  double alpha = 0.05;
  Estimator estimator = Estimator::AddOne;
  TieBreak tie_break = TieBreak::Frequency;
  SizeBasis basis = SizeBasis::Tokens;
  bool mi3_uncorrected = false;
  unsigned workers = 1;
  std::uint64_t checkpoint_every = 0;
  /// Regenerate outputs left behind by a different configuration.
  bool force = false;

  /// Throws PipelineError(Stage::Config).
  void validate() const;
};

/// Parses the declarative run file: `key = value` lines, `#` comments,
/// optional quotes around strings, `[2, 3]` lists for lengths. Relative paths
/// are resolved against `base_dir`. Unknown keys are errors.
RunConfig parse_run_config(std::istream& in, const std::string& base_dir = "");

/// Applies one `key`/`value` setting (the same keys as the run file).
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Hash of everything that determines the results: the corpus bytes and every
/// setting except paths, worker count, checkpoint cadence and `force`.
std::string config_hash(const RunConfig& config, std::string_view corpus_bytes);

// Stage helpers shared by `run` and the single-stage commands. A non-empty
// `config` is written into the output header.

std::string read_file(const std::string& path);
TokenStream ingest_text(std::string_view bytes, InputFormat format);
void save_tokens(const std::string& path, const TokenStream& stream, const std::string& config);
TokenStream load_tokens(const std::string& path);

void save_counts(const std::string& path, const NgramTable& table, const Vocabulary& vocab,
                 const std::string& config);
NgramTable load_counts(const std::string& path, const TokenStream& stream, std::uint64_t min_freq);

void save_scores(const std::string& path, const std::vector<ScoreRecord>& records,
                 const Vocabulary& vocab, const std::string& config);
std::vector<ScoreRow> load_scores(const std::string& path);

void save_pvalues(const std::string& path, std::span<const PValueRow> rows, Estimator estimator,
                  const std::string& config);
std::vector<PValueRow> load_pvalues(const std::string& path);

void save_significance(const std::string& path, const SignificanceTable& table,
                       const std::string& config);
std::vector<SignificanceRow> load_significance(const std::string& path);

void save_report(const std::string& path, const EvalReport& report);

/// Output locations inside the work directory.
struct RunPaths {
  std::string tokens;
  std::map<int, std::string> counts;
  std::map<int, std::string> scores;
  std::string pvalues;
  std::string significance;
  std::string report;
  std::string pr_dir;
  std::string checkpoint;
};

RunPaths run_paths(const RunConfig& config);

struct StageOutcome {
  Stage stage;
  bool executed;
};

struct PipelineResult {
  std::string config_hash;
  /// Contents of the report file.
  std::string report_json;
  std::vector<StageOutcome> stages;
};

/// ingest -> count -> score -> permtest -> holm -> evaluate. Stages whose
/// outputs already exist with the current config hash are skipped. An output
/// from another config is refused (PipelineError) unless config.force is set.
/// Progress goes to `log` when non-null.
PipelineResult run_pipeline(const RunConfig& config, std::ostream* log = nullptr);

}  // namespace chancegram
