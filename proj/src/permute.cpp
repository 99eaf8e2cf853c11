#include "chancegram/permute.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "chancegram/error.hpp"
#include "chancegram/fileio.hpp"

namespace chancegram {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Lemire's multiply-shift with rejection; exact uniform draw in [0, range).
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t range) {
  using u128 = unsigned __int128;
  u128 m = static_cast<u128>(gen()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<u128>(gen()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

constexpr std::uint64_t kDefaultChunk = 1000;

}  // namespace

void PermutationPlan::validate() const {
  if (permutations == 0) throw PermuteError("number of permutations must be >= 1");
  if (lengths.empty()) throw PermuteError("no n-gram lengths requested");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] < kMinOrder || lengths[i] > kMaxOrder)
      throw PermuteError("n-gram length must be in 2..4");
    for (std::size_t j = 0; j < i; ++j)
      if (lengths[i] == lengths[j]) throw PermuteError("duplicate n-gram length");
  }
}

std::string_view estimator_name(Estimator e) { return e == Estimator::AddOne ? "addone" : "raw"; }

Estimator parse_estimator(std::string_view name) {
  if (name == "addone") return Estimator::AddOne;
  if (name == "raw") return Estimator::Raw;
  throw PermuteError("unknown estimator '" + std::string(name) + "'");
}

std::uint64_t permutation_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

void shuffle_into(std::span<const TokenId> source, std::span<TokenId> out,
                  std::uint64_t master_seed, std::uint64_t index) {
  std::copy(source.begin(), source.end(), out.begin());
  std::mt19937_64 gen(permutation_seed(master_seed, index));
  for (std::size_t i = out.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(gen, i));
    std::swap(out[i - 1], out[j]);
  }
}

std::vector<TokenId> shuffle_stream(const TokenStream& stream, std::uint64_t master_seed,
                                    std::uint64_t index) {
  std::vector<TokenId> out(stream.size());
  shuffle_into(stream.tokens(), out, master_seed, index);
  return out;
}

ObservedKeyIndex::ObservedKeyIndex(const Vocabulary& vocab, std::span<const NgramTable> tables) {
  is_word_.resize(vocab.size());
  for (TokenId id = 0; id < vocab.size(); ++id) is_word_[id] = vocab.is_word(id) ? 1 : 0;
  starts_key_.assign(vocab.size(), 0);
  levels_.resize(kMaxOrder - 1);
  level_table_.assign(kMaxOrder + 1, -1);

  for (std::size_t t = 0; t < tables.size(); ++t) {
    const NgramTable& table = tables[t];
    const int n = table.order();
    if (level_table_[n] >= 0) throw PermuteError("two observed tables share a length");
    level_table_[n] = static_cast<int>(t);
    table_sizes_.push_back(table.size());
    if (!table.empty()) max_order_ = std::max(max_order_, n);
    for (std::size_t e = 0; e < table.size(); ++e) {
      const auto ids = table.entries()[e].key.ids();
      starts_key_.at(ids[0]) = 1;
      for (int k = 2; k < n; ++k) levels_[k - 2].insert(pack_key(ids.first(k))).prefix = true;
      levels_[n - 2].insert(pack_key(ids)).entry = static_cast<std::int32_t>(e);
    }
  }
}

ObservedKeyIndex::Scratch ObservedKeyIndex::make_scratch() const {
  Scratch s;
  for (std::size_t size : table_sizes_) {
    s.counts.emplace_back(size, 0);
    s.touched.emplace_back();
  }
  return s;
}

void ObservedKeyIndex::count(std::span<const TokenId> permuted, Scratch& scratch) const {
  const std::size_t total = permuted.size();
  const TokenId* tokens = permuted.data();
  for (std::size_t i = 0; i + 1 < total; ++i) {
    const TokenId first = tokens[i];
    if (!starts_key_[first]) continue;
    PackedKey key;
    key.hi = static_cast<std::uint64_t>(first) << 32;
    for (int k = 2; k <= max_order_; ++k) {
      const std::size_t pos = i + k - 1;
      if (pos >= total) break;
      const TokenId next = tokens[pos];
      if (!is_word_[next]) break;
      switch (k) {
        case 2: key.hi |= next; break;
        case 3: key.lo = static_cast<std::uint64_t>(next) << 32; break;
        default: key.lo |= next; break;
      }
      const KeyIndex::Slot* slot = levels_[k - 2].find(key);
      if (slot == nullptr) break;
      if (slot->entry >= 0) {
        const auto t = static_cast<std::size_t>(level_table_[k]);
        auto& c = scratch.counts[t][static_cast<std::size_t>(slot->entry)];
        if (c++ == 0) scratch.touched[t].push_back(static_cast<std::uint32_t>(slot->entry));
      }
      if (!slot->prefix) break;
    }
  }
}

void ObservedKeyIndex::clear(Scratch& scratch) {
  for (std::size_t t = 0; t < scratch.counts.size(); ++t) {
    for (auto e : scratch.touched[t]) scratch.counts[t][e] = 0;
    scratch.touched[t].clear();
  }
}

PermutedCounts tally_permutation(std::span<const TokenId> permuted, const Vocabulary& vocab,
                                 std::span<const NgramTable> observed) {
  ObservedKeyIndex index(vocab, observed);
  auto scratch = index.make_scratch();
  index.count(permuted, scratch);
  PermutedCounts out;
  for (const auto& c : scratch.counts) out.emplace_back(c.begin(), c.end());
  return out;
}

std::string observed_fingerprint(const TokenStream& stream, std::span<const NgramTable> observed) {
  Fnv1a h;
  h.update_u64(stream.size());
  for (TokenId id : stream.tokens()) h.update_u64(id);
  h.update_u64(stream.vocab().size());
  for (const auto& table : observed) {
    h.update_u64(static_cast<std::uint64_t>(table.order()));
    h.update_u64(table.size());
    for (const auto& e : table.entries()) {
      for (TokenId id : e.key.ids()) h.update_u64(id);
      h.update_u64(e.observed);
    }
  }
  return h.hex();
}

namespace {

using nlohmann::json;

void write_checkpoint(const std::string& path, const PermutationPlan& plan,
                      const std::string& fingerprint, const TallyTable& tally) {
  json j;
  j["format"] = "chancegram-checkpoint";
  j["version"] = 1;
  j["master_seed"] = plan.master_seed;
  j["lengths"] = plan.lengths;
  j["min_freq"] = plan.min_freq;
  j["fingerprint"] = fingerprint;
  j["completed"] = tally.completed;
  j["exceedances"] = tally.exceedances;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw PermuteError("cannot write checkpoint " + tmp);
    out << j.dump() << '\n';
    if (!out) throw PermuteError("failed writing checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

bool load_checkpoint(const std::string& path, const PermutationPlan& plan,
                     const std::string& fingerprint, TallyTable& tally) {
  std::ifstream in(path);
  if (!in) return false;
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw PermuteError("unreadable checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "chancegram-checkpoint")
    throw PermuteError(path + " is not a checkpoint file");
  if (j.at("master_seed").get<std::uint64_t>() != plan.master_seed ||
      j.at("lengths").get<std::vector<int>>() != plan.lengths ||
      j.at("min_freq").get<std::uint64_t>() != plan.min_freq ||
      j.at("fingerprint").get<std::string>() != fingerprint)
    throw PermuteError("checkpoint " + path + " belongs to a different run");
  auto completed = j.at("completed").get<std::uint64_t>();
  if (completed > plan.permutations)
    throw PermuteError("checkpoint has more permutations than requested");
  auto exceed = j.at("exceedances").get<std::vector<std::vector<std::uint64_t>>>();
  if (exceed.size() != tally.exceedances.size())
    throw PermuteError("checkpoint table count mismatch");
  for (std::size_t t = 0; t < exceed.size(); ++t)
    if (exceed[t].size() != tally.exceedances[t].size())
      throw PermuteError("checkpoint table size mismatch");
  tally.exceedances = std::move(exceed);
  tally.completed = completed;
  return true;
}

}  // namespace

TallyTable run_permutations(const TokenStream& stream, const PermutationPlan& plan,
                            std::span<const NgramTable> observed, const RunOptions& options) {
  plan.validate();
  if (observed.size() != plan.lengths.size())
    throw PermuteError("observed tables do not match the planned lengths");
  for (std::size_t t = 0; t < observed.size(); ++t)
    if (observed[t].order() != plan.lengths[t])
      throw PermuteError("observed table order does not match the planned length");

  const ObservedKeyIndex index(stream.vocab(), observed);
  std::vector<std::vector<std::uint32_t>> targets;
  for (const auto& table : observed) {
    auto& v = targets.emplace_back();
    for (const auto& e : table.entries()) v.push_back(static_cast<std::uint32_t>(e.observed));
  }

  TallyTable tally;
  tally.lengths = plan.lengths;
  for (const auto& table : observed) tally.exceedances.emplace_back(table.size(), 0);

  std::string fingerprint;
  if (!options.checkpoint_path.empty()) {
    fingerprint = observed_fingerprint(stream, observed);
    load_checkpoint(options.checkpoint_path, plan, fingerprint, tally);
  }

  const unsigned workers = std::max(1U, options.workers);
  const std::uint64_t chunk = options.checkpoint_every ? options.checkpoint_every : kDefaultChunk;
  const auto source = stream.tokens();

  struct Worker {
    ObservedKeyIndex::Scratch scratch;
    std::vector<TokenId> buffer;
    std::vector<std::vector<std::uint64_t>> exceed;
  };
  std::vector<Worker> state(workers);
  for (auto& w : state) {
    w.scratch = index.make_scratch();
    w.buffer.resize(source.size());
    for (const auto& table : observed) w.exceed.emplace_back(table.size(), 0);
  }

  auto process = [&](Worker& w, std::uint64_t perm) {
    shuffle_into(source, w.buffer, plan.master_seed, perm);
    index.count(w.buffer, w.scratch);
    for (std::size_t t = 0; t < targets.size(); ++t)
      for (auto e : w.scratch.touched[t])
        if (w.scratch.counts[t][e] >= targets[t][e]) ++w.exceed[t][e];
    ObservedKeyIndex::clear(w.scratch);
  };

  const auto start_time = std::chrono::steady_clock::now();
  const std::uint64_t resumed_from = tally.completed;
  while (tally.completed < plan.permutations) {
    const std::uint64_t end = std::min(plan.permutations, tally.completed + chunk);
    std::atomic<std::uint64_t> next{tally.completed};
    auto drain = [&](Worker& w) {
      for (std::uint64_t perm = next++; perm < end; perm = next++) process(w, perm);
    };
    if (workers == 1) {
      drain(state[0]);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (auto& w : state) threads.emplace_back(drain, std::ref(w));
      for (auto& th : threads) th.join();
    }
    // Integer addition commutes, so the merge order does not matter.
    for (auto& w : state)
      for (std::size_t t = 0; t < w.exceed.size(); ++t)
        for (std::size_t e = 0; e < w.exceed[t].size(); ++e) {
          tally.exceedances[t][e] += w.exceed[t][e];
          w.exceed[t][e] = 0;
        }
    tally.completed = end;

    if (!options.checkpoint_path.empty())
      write_checkpoint(options.checkpoint_path, plan, fingerprint, tally);
    if (options.progress) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
      Progress p{tally.completed, plan.permutations, secs,
                 secs > 0 ? static_cast<double>(tally.completed - resumed_from) / secs : 0.0};
      options.progress(p);
    }
  }
  return tally;
}

double p_value(std::uint64_t exceed, std::uint64_t permutations, Estimator estimator) {
  if (permutations == 0) throw PermuteError("p-value needs at least one permutation");
  if (exceed > permutations) throw PermuteError("exceedance count larger than permutation count");
  if (estimator == Estimator::AddOne)
    return static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
  return static_cast<double>(exceed) / static_cast<double>(permutations);
}

std::vector<PValueRow> make_pvalue_rows(std::span<const NgramTable> observed, const TallyTable& tally,
                                        const Vocabulary& vocab, Estimator estimator) {
  std::vector<PValueRow> rows;
  for (std::size_t t = 0; t < observed.size(); ++t) {
    const auto entries = observed[t].entries();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      PValueRow row;
      row.text = entries[e].key.text(vocab);
      row.n = entries[e].key.size();
      row.observed = entries[e].observed;
      row.exceed = tally.exceedances[t][e];
      row.permutations = tally.completed;
      row.p_hat = p_value(row.exceed, row.permutations, estimator);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_pvalues(std::ostream& out, std::span<const PValueRow> rows) {
  for (const auto& r : rows)
    out << r.text << '\t' << r.observed << '\t' << r.exceed << '\t' << r.permutations << '\t'
        << format_exact(r.p_hat) << '\n';
}

std::vector<PValueRow> read_pvalues(std::istream& in) {
  std::vector<PValueRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && parse_header_line(line)) continue;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 5)
      throw FormatError("p-values line " + std::to_string(line_no) + ": expected 5 columns");
    PValueRow row;
    row.text = std::string(cols[0]);
    row.n = static_cast<int>(split(cols[0], ' ').size());
    row.observed = parse_u64(cols[1]);
    row.exceed = parse_u64(cols[2]);
    row.permutations = parse_u64(cols[3]);
    row.p_hat = parse_double(cols[4]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace chancegram
