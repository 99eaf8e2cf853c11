// chancegram: n-gram significance by corpus permutation and evaluation of
// lexical association measures against it.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chancegram/exact2.hpp"
#include "chancegram/fileio.hpp"
#include "chancegram/pipeline.hpp"

namespace fs = std::filesystem;
using namespace chancegram;

namespace {

// Config hash recorded by an upstream file, carried into the outputs of
// single-stage commands.
std::string upstream_hash(const std::string& path) {
  auto header = read_file_header(path);
  if (!header) return {};
  return header->get("config").value_or("");
}

std::uint64_t header_min_freq(const std::string& path) {
  auto header = read_file_header(path);
  if (header)
    if (auto v = header->get("min_freq")) return parse_u64(*v);
  return 1;
}

std::string counts_path(const std::string& prefix, int n) {
  return prefix + "." + std::to_string(n) + ".counts";
}

void print_progress(const Progress& p) {
  std::cerr << "permtest: " << p.completed << "/" << p.total << " permutations ("
            << static_cast<long long>(p.per_second) << " perm/s)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chancegram: Monte Carlo significance of n-grams and association-measure evaluation"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_format = "plain", ingest_in, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Tokenize a corpus into a token file");
  ingest->add_option("--format", ingest_format, "plain or vertical")
      ->check(CLI::IsMember({"plain", "vertical"}));
  ingest->add_option("--in", ingest_in, "Input corpus")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Output token file")->required();

  // count
  std::vector<int> count_lengths = {2, 3, 4};
  std::uint64_t count_min_freq = 3;
  std::string count_in, count_prefix;
  auto* count = app.add_subcommand("count", "Count n-grams over word runs");
  count->add_option("--n", count_lengths, "Lengths, e.g. 2,3,4")->delimiter(',');
  count->add_option("--min-freq", count_min_freq, "Minimum observed frequency");
  count->add_option("--in", count_in, "Token file")->required()->check(CLI::ExistingFile);
  count->add_option("--out-prefix", count_prefix, "Writes PFX.<n>.counts")->required();

  // score
  std::string score_counts, score_tokens, score_out, score_basis = "tokens";
  bool score_mi3_uncorrected = false;
  auto* score = app.add_subcommand("score", "Compute the six association measures");
  score->add_option("--counts", score_counts, "Counts file")->required()->check(CLI::ExistingFile);
  score->add_option("--tokens", score_tokens, "Token file")->required()->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "Scores file")->required();
  score->add_option("--n-definition", score_basis, "Corpus size in E: tokens or words")
      ->check(CLI::IsMember({"tokens", "words"}));
  score->add_flag("--mi3-uncorrected", score_mi3_uncorrected, "Use log2(O^3/E) without the sign fix");

  // permtest
  std::string perm_tokens, perm_counts, perm_estimator = "addone", perm_checkpoint, perm_out;
  std::vector<int> perm_lengths;
  std::uint64_t perm_p = 10000, perm_seed = 42, perm_checkpoint_every = 0;
  unsigned perm_workers = 1;
  bool perm_quiet = false;
  auto* permtest = app.add_subcommand("permtest", "Monte Carlo permutation p-values");
  permtest->add_option("--tokens", perm_tokens, "Token file")->required()->check(CLI::ExistingFile);
  permtest->add_option("--counts", perm_counts, "Counts prefix (reads PFX.<n>.counts)")->required();
  permtest->add_option("--n", perm_lengths, "Lengths to test (default: every PFX.<n>.counts found)")
      ->delimiter(',');
  permtest->add_option("--permutations", perm_p, "Number of permutations P");
  permtest->add_option("--seed", perm_seed, "Master seed");
  permtest->add_option("--estimator", perm_estimator, "addone or raw")
      ->check(CLI::IsMember({"addone", "raw"}));
  permtest->add_option("--workers", perm_workers, "Worker threads");
  permtest->add_option("--checkpoint", perm_checkpoint, "Checkpoint file (resumed if present)");
  permtest->add_option("--checkpoint-every", perm_checkpoint_every, "Permutations between checkpoints");
  permtest->add_flag("--quiet", perm_quiet, "No progress output");
  permtest->add_option("--out", perm_out, "P-values file")->required();

  // holm
  std::string holm_pvals, holm_out;
  double holm_alpha = 0.05;
  auto* holm_cmd = app.add_subcommand("holm", "Holm correction per n-gram length");
  holm_cmd->add_option("--pvals", holm_pvals, "P-values file")->required()->check(CLI::ExistingFile);
  holm_cmd->add_option("--alpha", holm_alpha, "Family-wise error rate");
  holm_cmd->add_option("--out", holm_out, "Significance file")->required();

  // evaluate
  std::vector<std::string> eval_scores;
  std::string eval_sig, eval_report, eval_pr_dir, eval_tie = "freq";
  auto* evaluate_cmd = app.add_subcommand("evaluate", "AP / CcAP / PR curves per measure");
  evaluate_cmd->add_option("--scores", eval_scores, "Scores file(s)")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--sig", eval_sig, "Significance file")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out-report", eval_report, "JSON report")->required();
  evaluate_cmd->add_option("--out-pr-dir", eval_pr_dir, "Directory for PR curve CSVs");
  evaluate_cmd->add_option("--tie-break", eval_tie, "freq, bytes or score-only")
      ->check(CLI::IsMember({"freq", "bytes", "score-only"}));

  // oracle
  std::string oracle_tokens, oracle_bigram, oracle_ngram;
  auto* oracle = app.add_subcommand("oracle", "Exact reference p-values");
  oracle->require_subcommand(1);
  auto* fisher2 = oracle->add_subcommand("fisher2", "Hypergeometric upper tail for a bigram");
  fisher2->add_option("--tokens", oracle_tokens, "Token file")->required()->check(CLI::ExistingFile);
  fisher2->add_option("--bigram", oracle_bigram, "\"w1 w2\"")->required();
  auto* enumerate = oracle->add_subcommand("enumerate", "Exhaustive permutation p-value (<= 12 tokens)");
  enumerate->add_option("--tokens", oracle_tokens, "Token file")->required()->check(CLI::ExistingFile);
  enumerate->add_option("--ngram", oracle_ngram, "\"w1 w2 [w3 [w4]]\"")->required();

  // run
  std::string run_config_path;
  bool run_force = false, run_quiet = false;
  auto* run = app.add_subcommand("run", "Full pipeline from a run file");
  run->add_option("--config", run_config_path, "Run file (key = value lines)")->required()
      ->check(CLI::ExistingFile);
  struct Override {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Override kOverrides[] = {
      {"--corpus", "corpus", "Corpus path"},
      {"--format", "format", "plain or vertical"},
      {"--work-dir", "work_dir", "Output directory"},
      {"--lengths", "lengths", "e.g. 2,3"},
      {"--min-freq", "min_freq", "Minimum frequency"},
      {"--permutations", "permutations", "Number of permutations"},
      {"--seed", "seed", "Master seed"},
      {"--alpha", "alpha", "Holm alpha"},
      {"--estimator", "estimator", "addone or raw"},
      {"--tie-break", "tie_break", "freq, bytes or score-only"},
      {"--n-definition", "n_definition", "tokens or words"},
      {"--mi3-uncorrected", "mi3_uncorrected", "true or false"},
      {"--workers", "workers", "Worker threads"},
      {"--checkpoint-every", "checkpoint_every", "Permutations between checkpoints"},
  };
  std::vector<std::string> override_values(std::size(kOverrides));
  std::vector<CLI::Option*> override_options;
  for (std::size_t i = 0; i < std::size(kOverrides); ++i)
    override_options.push_back(run->add_option(kOverrides[i].flag, override_values[i], kOverrides[i].help));
  run->add_flag("--force", run_force, "Regenerate outputs from a different configuration");
  run->add_flag("--quiet", run_quiet, "No progress output");

  CLI11_PARSE(app, argc, argv);

  Stage current = Stage::Config;
  try {
    if (*ingest) {
      current = Stage::Ingest;
      auto stream = ingest_text(read_file(ingest_in), parse_input_format(ingest_format));
      save_tokens(ingest_out, stream, "");
      std::cerr << "ingest: " << stream.size() << " tokens, " << stream.word_token_count()
                << " words, " << stream.vocab().size() << " types\n";
    } else if (*count) {
      current = Stage::Count;
      auto stream = load_tokens(count_in);
      const auto hash = upstream_hash(count_in);
      for (int n : count_lengths) {
        auto table = build_table(count_ngrams(stream, n), stream, count_min_freq);
        save_counts(counts_path(count_prefix, n), table, stream.vocab(), hash);
        std::cerr << "count: " << n << "-grams: " << table.size() << " types with O >= "
                  << count_min_freq << "\n";
      }
    } else if (*score) {
      current = Stage::Score;
      auto stream = load_tokens(score_tokens);
      auto table = load_counts(score_counts, stream, header_min_freq(score_counts));
      ScoreOptions options;
      options.basis = score_basis == "words" ? SizeBasis::Words : SizeBasis::Tokens;
      options.mi3_uncorrected = score_mi3_uncorrected;
      save_scores(score_out, score_table(table, options), stream.vocab(), upstream_hash(score_counts));
    } else if (*permtest) {
      current = Stage::Permtest;
      auto stream = load_tokens(perm_tokens);
      if (perm_lengths.empty())
        for (int n = kMinOrder; n <= kMaxOrder; ++n)
          if (fs::exists(counts_path(perm_counts, n))) perm_lengths.push_back(n);
      if (perm_lengths.empty()) throw Error("no counts files found for prefix " + perm_counts);
      std::vector<NgramTable> tables;
      std::uint64_t min_freq = 0;
      for (int n : perm_lengths) {
        const auto path = counts_path(perm_counts, n);
        min_freq = header_min_freq(path);
        tables.push_back(load_counts(path, stream, min_freq));
      }
      PermutationPlan plan{perm_p, perm_seed, perm_lengths, min_freq};
      RunOptions options;
      options.workers = perm_workers;
      options.checkpoint_path = perm_checkpoint;
      options.checkpoint_every = perm_checkpoint_every;
      if (!perm_quiet) options.progress = print_progress;
      const auto estimator = parse_estimator(perm_estimator);
      auto tally = run_permutations(stream, plan, tables, options);
      save_pvalues(perm_out, make_pvalue_rows(tables, tally, stream.vocab(), estimator), estimator,
                   upstream_hash(counts_path(perm_counts, perm_lengths.front())));
    } else if (*holm_cmd) {
      current = Stage::Holm;
      auto rows = load_pvalues(holm_pvals);
      auto table = apply_holm(rows, holm_alpha);
      save_significance(holm_out, table, upstream_hash(holm_pvals));
      for (const auto& [n, m] : table.family_sizes) {
        std::size_t sig = 0;
        for (const auto& r : table.rows) sig += (r.pvalue.n == n && r.significant) ? 1 : 0;
        std::cerr << "holm: " << n << "-grams: " << sig << " of " << m << " significant\n";
      }
    } else if (*evaluate_cmd) {
      current = Stage::Evaluate;
      std::vector<ScoreRow> rows;
      for (const auto& path : eval_scores) {
        auto part = load_scores(path);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      auto report = evaluate(rows, load_significance(eval_sig), parse_tie_break(eval_tie));
      report.config_hash = upstream_hash(eval_sig);
      save_report(eval_report, report);
      if (!eval_pr_dir.empty()) write_pr_curves(eval_pr_dir, report);
    } else if (*oracle) {
      current = Stage::Oracle;
      auto stream = load_tokens(oracle_tokens);
      if (*fisher2) {
        auto key = parse_key(oracle_bigram, stream.vocab());
        auto table = bigram_table(stream, key);
        std::cout << "O11=" << table.o11 << " O12=" << table.o12 << " O21=" << table.o21
                  << " O22=" << table.o22 << "\np=" << format_exact(fisher_exact_upper(table)) << "\n";
      } else {
        auto key = parse_key(oracle_ngram, stream.vocab());
        std::cout << "p=" << format_exact(enumerate_exact(stream, key)) << "\n";
      }
    } else if (*run) {
      current = Stage::Config;
      const auto base = fs::path(run_config_path).parent_path().string();
      std::ifstream in(run_config_path);
      RunConfig config = parse_run_config(in, base);
      for (std::size_t i = 0; i < override_options.size(); ++i)
        if (override_options[i]->count() > 0) apply_setting(config, kOverrides[i].key, override_values[i]);
      config.force = run_force;
      auto result = run_pipeline(config, run_quiet ? nullptr : &std::cerr);
      std::cout << result.report_json;
    }
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "error: " << stage_name(current) << ": " << e.what() << "\n";
    return exit_code(current);
  }
  return 0;
}
