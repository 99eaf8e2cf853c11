#include "chancegram/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "chancegram/fileio.hpp"

namespace fs = std::filesystem;

namespace chancegram {

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Config: return "config";
    case Stage::Ingest: return "ingest";
    case Stage::Count: return "count";
    case Stage::Score: return "score";
    case Stage::Permtest: return "permtest";
    case Stage::Holm: return "holm";
    case Stage::Evaluate: return "evaluate";
    case Stage::Oracle: return "oracle";
  }
  return "unknown";
}

int exit_code(Stage stage) {
  switch (stage) {
    case Stage::Config: return 2;
    case Stage::Ingest: return 10;
    case Stage::Count: return 11;
    case Stage::Score: return 12;
    case Stage::Permtest: return 13;
    case Stage::Holm: return 14;
    case Stage::Evaluate: return 15;
    case Stage::Oracle: return 16;
  }
  return 1;
}

InputFormat parse_input_format(std::string_view name) {
  if (name == "plain") return InputFormat::Plain;
  if (name == "vertical") return InputFormat::Vertical;
  throw PipelineError(Stage::Config, "unknown input format '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw PipelineError(Stage::Config, what); };
  if (corpus_path.empty()) fail("no corpus given");
  if (!fs::exists(corpus_path)) fail("corpus " + corpus_path + " does not exist");
  if (work_dir.empty()) fail("no work directory given");
  if (permutations == 0) fail("permutations must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (min_freq == 0) fail("min_freq must be >= 1");
  PermutationPlan plan{permutations, seed, lengths, min_freq};
  try {
    plan.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw PipelineError(Stage::Config, key + ": expected true or false");
}

std::vector<int> parse_lengths(const std::string& value) {
  std::string body = value;
  if (!body.empty() && body.front() == '[') body.erase(0, 1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::vector<int> out;
  for (auto part : split(body, ',')) {
    auto t = trim(part);
    if (t.empty()) continue;
    out.push_back(static_cast<int>(parse_u64(t)));
  }
  return out;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& raw) {
  const std::string value = unquote(trim(raw));
  try {
    if (key == "corpus") config.corpus_path = value;
    else if (key == "format") config.format = parse_input_format(value);
    else if (key == "work_dir") config.work_dir = value;
    else if (key == "lengths") config.lengths = parse_lengths(value);
    else if (key == "min_freq") config.min_freq = parse_u64(value);
    else if (key == "permutations") config.permutations = parse_u64(value);
    else if (key == "seed") config.seed = parse_u64(value);
    else if (key == "alpha") config.alpha = parse_double(value);
    else if (key == "estimator") config.estimator = parse_estimator(value);
    else if (key == "tie_break") config.tie_break = parse_tie_break(value);
    else if (key == "n_definition") {
      if (value == "tokens") config.basis = SizeBasis::Tokens;
      else if (value == "words") config.basis = SizeBasis::Words;
      else throw PipelineError(Stage::Config, "n_definition must be words or tokens");
    }
    else if (key == "mi3_uncorrected") config.mi3_uncorrected = parse_bool(key, value);
    else if (key == "workers") config.workers = static_cast<unsigned>(parse_u64(value));
    else if (key == "checkpoint_every") config.checkpoint_every = parse_u64(value);
    else throw PipelineError(Stage::Config, "unknown setting '" + key + "'");
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(Stage::Config, key + ": " + e.what());
  }
}

RunConfig parse_run_config(std::istream& in, const std::string& base_dir) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    auto eq = content.find('=');
    if (eq == std::string::npos)
      throw PipelineError(Stage::Config, "line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(std::string_view(content).substr(0, eq));
    auto value = trim(std::string_view(content).substr(eq + 1));
    // Strip a trailing comment outside quotes.
    if (!value.empty() && value.front() != '"' && value.front() != '\'') {
      if (auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    apply_setting(config, key, value);
  }
  if (!base_dir.empty()) {
    auto resolve = [&](std::string& p) {
      if (!p.empty() && fs::path(p).is_relative()) p = (fs::path(base_dir) / p).lexically_normal().string();
    };
    resolve(config.corpus_path);
    resolve(config.work_dir);
  }
  return config;
}

std::string config_hash(const RunConfig& config, std::string_view corpus_bytes) {
  Fnv1a corpus;
  corpus.update(corpus_bytes);
  std::ostringstream canon;
  canon << "chancegram-config-v1"
        << "|format=" << (config.format == InputFormat::Plain ? "plain" : "vertical") << "|lengths=";
  for (std::size_t i = 0; i < config.lengths.size(); ++i) canon << (i ? "," : "") << config.lengths[i];
  canon << "|min_freq=" << config.min_freq << "|permutations=" << config.permutations
        << "|seed=" << config.seed << "|alpha=" << format_exact(config.alpha)
        << "|estimator=" << estimator_name(config.estimator)
        << "|tie_break=" << tie_break_name(config.tie_break)
        << "|n_definition=" << (config.basis == SizeBasis::Tokens ? "tokens" : "words")
        << "|mi3_uncorrected=" << config.mi3_uncorrected << "|corpus=" << corpus.hex();
  Fnv1a h;
  h.update(canon.str());
  return h.hex();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TokenStream ingest_text(std::string_view bytes, InputFormat format) {
  if (format == InputFormat::Plain) return ingest_plain(bytes);
  std::istringstream in{std::string(bytes)};
  auto lines = read_vertical(in);
  return ingest_vertical(lines);
}

namespace {

std::ofstream open_out(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path);
}

FileHeader make_header(const std::string& kind, const std::string& config) {
  FileHeader h;
  h.set("kind", kind);
  if (!config.empty()) h.set("config", config);
  return h;
}

}  // namespace

void save_tokens(const std::string& path, const TokenStream& stream, const std::string& config) {
  auto out = open_out(path);
  write_header(out, make_header("tokens", config));
  write_token_file(out, stream);
  finish(out, path);
}

TokenStream load_tokens(const std::string& path) {
  auto in = open_in(path);
  return read_token_file(in);
}

void save_counts(const std::string& path, const NgramTable& table, const Vocabulary& vocab,
                 const std::string& config) {
  auto out = open_out(path);
  auto header = make_header("counts", config);
  header.set("n", std::to_string(table.order()));
  header.set("min_freq", std::to_string(table.min_freq()));
  write_header(out, header);
  write_counts(out, table, vocab);
  finish(out, path);
}

NgramTable load_counts(const std::string& path, const TokenStream& stream, std::uint64_t min_freq) {
  auto in = open_in(path);
  return read_counts(in, stream, min_freq);
}

void save_scores(const std::string& path, const std::vector<ScoreRecord>& records,
                 const Vocabulary& vocab, const std::string& config) {
  auto out = open_out(path);
  write_header(out, make_header("scores", config));
  write_scores(out, records, vocab);
  finish(out, path);
}

std::vector<ScoreRow> load_scores(const std::string& path) {
  auto in = open_in(path);
  return read_scores(in);
}

void save_pvalues(const std::string& path, std::span<const PValueRow> rows, Estimator estimator,
                  const std::string& config) {
  auto out = open_out(path);
  auto header = make_header("pvalues", config);
  header.set("estimator", std::string(estimator_name(estimator)));
  write_header(out, header);
  write_pvalues(out, rows);
  finish(out, path);
}

std::vector<PValueRow> load_pvalues(const std::string& path) {
  auto in = open_in(path);
  return read_pvalues(in);
}

void save_significance(const std::string& path, const SignificanceTable& table,
                       const std::string& config) {
  auto out = open_out(path);
  auto header = make_header("significance", config);
  header.set("alpha", format_exact(table.alpha));
  write_header(out, header);
  write_significance(out, table);
  finish(out, path);
}

std::vector<SignificanceRow> load_significance(const std::string& path) {
  auto in = open_in(path);
  return read_significance(in);
}

void save_report(const std::string& path, const EvalReport& report) {
  auto out = open_out(path);
  out << report_json(report);
  finish(out, path);
}

RunPaths run_paths(const RunConfig& config) {
  const fs::path dir(config.work_dir);
  RunPaths p;
  p.tokens = (dir / "tokens.tok").string();
  for (int n : config.lengths) {
    p.counts[n] = (dir / ("counts." + std::to_string(n) + ".tsv")).string();
    p.scores[n] = (dir / ("scores." + std::to_string(n) + ".tsv")).string();
  }
  p.pvalues = (dir / "pvals.tsv").string();
  p.significance = (dir / "sig.tsv").string();
  p.report = (dir / "report.json").string();
  p.pr_dir = (dir / "pr").string();
  p.checkpoint = (dir / "permtest.ckpt").string();
  return p;
}

namespace {

enum class OutputState { Missing, Current, Stale };

std::optional<std::string> recorded_hash(const std::string& path) {
  if (path.ends_with(".json")) {
    try {
      auto j = nlohmann::json::parse(read_file(path));
      if (j.contains("config_hash")) return j["config_hash"].get<std::string>();
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }
  auto header = read_file_header(path);
  if (!header) return std::nullopt;
  return header->get("config");
}

OutputState output_state(const std::string& path, const std::string& hash) {
  if (!fs::exists(path)) return OutputState::Missing;
  return recorded_hash(path) == hash ? OutputState::Current : OutputState::Stale;
}

class Runner {
 public:
  Runner(const RunConfig& config, std::ostream* log) : config_(config), log_(log) {}

  PipelineResult run() {
    config_.validate();
    std::string corpus_bytes;
    try {
      corpus_bytes = read_file(config_.corpus_path);
    } catch (const Error& e) {
      throw PipelineError(Stage::Config, e.what());
    }
    hash_ = config_hash(config_, corpus_bytes);
    paths_ = run_paths(config_);
    fs::create_directories(config_.work_dir);
    result_.config_hash = hash_;
    note("config hash " + hash_);

    stage(Stage::Ingest, {paths_.tokens}, [&] {
      save_tokens(paths_.tokens, ingest_text(corpus_bytes, config_.format), hash_);
    });
    corpus_bytes.clear();

    std::vector<std::string> count_files, score_files;
    for (int n : config_.lengths) {
      count_files.push_back(paths_.counts.at(n));
      score_files.push_back(paths_.scores.at(n));
    }

    stage(Stage::Count, count_files, [&] {
      const auto& s = stream(Stage::Count);
      for (int n : config_.lengths) {
        auto table = build_table(count_ngrams(s, n), s, config_.min_freq);
        save_counts(paths_.counts.at(n), table, s.vocab(), hash_);
      }
    });

    stage(Stage::Score, score_files, [&] {
      const auto& s = stream(Stage::Score);
      ScoreOptions options{config_.basis, config_.mi3_uncorrected};
      for (const auto& table : tables(Stage::Score))
        save_scores(paths_.scores.at(table.order()), score_table(table, options), s.vocab(), hash_);
    });

    stage(Stage::Permtest, {paths_.pvalues}, [&] {
      const auto& s = stream(Stage::Permtest);
      const auto& observed = tables(Stage::Permtest);
      PermutationPlan plan{config_.permutations, config_.seed, config_.lengths, config_.min_freq};
      RunOptions options;
      options.workers = config_.workers;
      options.checkpoint_every = config_.checkpoint_every;
      options.checkpoint_path = paths_.checkpoint;
      if (config_.force) fs::remove(paths_.checkpoint);
      if (log_) {
        options.progress = [this](const Progress& p) {
          *log_ << "permtest: " << p.completed << "/" << p.total << " permutations ("
                << static_cast<long long>(p.per_second) << " perm/s)\n";
        };
      }
      auto tally = run_permutations(s, plan, observed, options);
      save_pvalues(paths_.pvalues, make_pvalue_rows(observed, tally, s.vocab(), config_.estimator),
                   config_.estimator, hash_);
      fs::remove(paths_.checkpoint);
    });

    stage(Stage::Holm, {paths_.significance}, [&] {
      require_current(Stage::Holm, paths_.pvalues);
      auto rows = load_pvalues(paths_.pvalues);
      save_significance(paths_.significance, apply_holm(rows, config_.alpha), hash_);
    });

    stage(Stage::Evaluate, {paths_.report}, [&] {
      std::vector<ScoreRow> rows;
      for (const auto& path : score_files) {
        require_current(Stage::Evaluate, path);
        auto part = load_scores(path);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      require_current(Stage::Evaluate, paths_.significance);
      auto sig = load_significance(paths_.significance);
      auto report = evaluate(rows, sig, config_.tie_break);
      report.config_hash = hash_;
      write_pr_curves(paths_.pr_dir, report);
      save_report(paths_.report, report);
    });

    result_.report_json = read_file(paths_.report);
    return result_;
  }

 private:
  template <typename Body>
  void stage(Stage st, const std::vector<std::string>& outputs, Body&& body) {
    bool all_current = true;
    for (const auto& path : outputs) {
      const auto state = output_state(path, hash_);
      if (state == OutputState::Stale && !config_.force)
        throw PipelineError(st, path + " was produced by a different configuration (config hash "
                                   "mismatch); delete it or rerun with --force");
      all_current = all_current && state == OutputState::Current;
    }
    if (all_current) {
      note(std::string(stage_name(st)) + ": up to date, skipped");
      result_.stages.push_back({st, false});
      return;
    }
    note(std::string(stage_name(st)) + ": running");
    try {
      body();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(st, e.what());
    }
    result_.stages.push_back({st, true});
  }

  void require_current(Stage st, const std::string& path) {
    if (output_state(path, hash_) != OutputState::Current)
      throw PipelineError(st, "input " + path + " has a mismatched config hash");
  }

  const TokenStream& stream(Stage st) {
    if (!stream_) {
      require_current(st, paths_.tokens);
      stream_.emplace(load_tokens(paths_.tokens));
    }
    return *stream_;
  }

  const std::vector<NgramTable>& tables(Stage st) {
    if (!tables_) {
      const auto& s = stream(st);
      std::vector<NgramTable> loaded;
      for (int n : config_.lengths) {
        require_current(st, paths_.counts.at(n));
        loaded.push_back(load_counts(paths_.counts.at(n), s, config_.min_freq));
      }
      tables_.emplace(std::move(loaded));
    }
    return *tables_;
  }

  void note(const std::string& message) {
    if (log_) *log_ << message << '\n';
  }

  const RunConfig& config_;
  std::ostream* log_;
  std::string hash_;
  RunPaths paths_;
  PipelineResult result_;
  std::optional<TokenStream> stream_;
  std::optional<std::vector<NgramTable>> tables_;
};

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, std::ostream* log) {
  return Runner(config, log).run();
}

}  // namespace chancegram
