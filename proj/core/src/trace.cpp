#include "embcomm/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "embcomm/error.hpp"
#include "embcomm/rng.hpp"

namespace embcomm {

namespace {

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

// Parses base-10 fields separated by single spaces into `out`; returns the
// number of fields seen (stops early on malformed text with an error).
std::size_t parse_id_row(const std::string& text, std::size_t line, std::size_t vocab,
                         std::vector<std::uint32_t>& out) {
  std::size_t fields = 0;
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    std::uint64_t value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc() || (next < end && *next != ' ')) {
      line_error(line, "malformed id near \"" + std::string(p, std::min<std::size_t>(end - p, 12)) + "\"");
    }
    if (value >= vocab) {
      line_error(line, "id " + std::to_string(value) + " out of range [0, " +
                           std::to_string(vocab) + ")");
    }
    out.push_back(static_cast<std::uint32_t>(value));
    ++fields;
    p = next;
  }
  return fields;
}

}  // namespace

Trace parse_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::int64_t d = 0;
  std::uint64_t vocab = 0;
  {
    const char* p = line.data();
    const char* end = p + line.size();
    auto expect = [&](std::string_view token) {
      if (static_cast<std::size_t>(end - p) < token.size() ||
          std::string_view(p, token.size()) != token) {
        line_error(1, "malformed header, expected \"d=<int> E=<int>\"");
      }
      p += token.size();
    };
    expect("d=");
    auto [next1, ec1] = std::from_chars(p, end, d);
    if (ec1 != std::errc()) line_error(1, "malformed header, expected \"d=<int> E=<int>\"");
    p = next1;
    expect(" E=");
    auto [next2, ec2] = std::from_chars(p, end, vocab);
    if (ec2 != std::errc() || next2 != end) {
      line_error(1, "malformed header, expected \"d=<int> E=<int>\"");
    }
  }
  if (d < 1) line_error(1, "lookups per sample must be >= 1");
  if (vocab < 1) line_error(1, "vocabulary size must be >= 1");
  if (vocab > static_cast<std::uint64_t>(UINT32_MAX)) {
    line_error(1, "vocabulary too large for 32-bit ids");
  }

  Trace trace;
  trace.num_features = d;
  trace.vocab_size = static_cast<std::size_t>(vocab);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t fields =
        parse_id_row(line, line_no, trace.vocab_size, trace.ids);
    if (fields != static_cast<std::size_t>(d)) {
      line_error(line_no, "expected " + std::to_string(d) + " ids, found " +
                              std::to_string(fields));
    }
  }
  if (trace.ids.empty()) throw ValidationError("empty trace");
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open trace file " + path.string());
  return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << "d=" << trace.num_features << " E=" << trace.vocab_size << "\n";
  const std::size_t n = trace.num_samples();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = trace.sample(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != 0) out << ' ';
      out << row[j];
    }
    out << '\n';
  }
}

void save_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write trace file " + path.string());
  write_trace(out, trace);
}

SkewTable build_skew_table(const Trace& trace) {
  if (trace.ids.empty()) throw ValidationError("empty trace");
  std::vector<std::uint64_t> counts(trace.vocab_size, 0);
  for (std::uint32_t id : trace.ids) ++counts[id];

  SkewTable table;
  table.total_accesses = trace.ids.size();
  for (std::uint32_t id = 0; id < counts.size(); ++id) {
    if (counts[id] > 0) table.entries.push_back({id, counts[id], 0.0});
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const SkewEntry& a, const SkewEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.id < b.id;
            });
  std::uint64_t running = 0;
  for (auto& entry : table.entries) {
    running += entry.count;
    entry.cum_fraction = static_cast<double>(running) /
                         static_cast<double>(table.total_accesses);
  }
  return table;
}

void write_skew_csv(std::ostream& out, const SkewTable& table) {
  out << "id,count,cum_fraction\n";
  char buf[64];
  for (const auto& entry : table.entries) {
    std::snprintf(buf, sizeof buf, "%.12g", entry.cum_fraction);
    out << entry.id << ',' << entry.count << ',' << buf << '\n';
  }
}

EmbeddingDistribution estimate_distribution(const SkewTable& table,
                                            std::size_t vocab_size, double smoothing) {
  if (smoothing < 0.0) throw ValidationError("smoothing must be >= 0");
  std::uint32_t max_id = 0;
  for (const auto& entry : table.entries) max_id = std::max(max_id, entry.id);
  if (!table.entries.empty() && vocab_size < static_cast<std::size_t>(max_id) + 1) {
    throw ValidationError("vocabulary size " + std::to_string(vocab_size) +
                          " smaller than max observed id " + std::to_string(max_id));
  }
  if (vocab_size == 0) throw ValidationError("vocabulary size must be >= 1");

  const double denom = static_cast<double>(table.total_accesses) +
                       smoothing * static_cast<double>(vocab_size);
  if (!(denom > 0.0)) {
    throw ValidationError("cannot estimate a distribution from zero observations "
                          "without smoothing");
  }
  std::vector<double> probs(vocab_size, smoothing / denom);
  for (const auto& entry : table.entries) {
    probs[entry.id] = (static_cast<double>(entry.count) + smoothing) / denom;
  }
  return EmbeddingDistribution::from_probabilities(std::move(probs));
}

SampleClasses classify_samples(const Trace& trace,
                               std::span<const std::uint32_t> cache_ids) {
  std::vector<char> cached(trace.vocab_size, 0);
  for (std::uint32_t id : cache_ids) {
    if (id >= trace.vocab_size) {
      throw ValidationError("cache id " + std::to_string(id) + " out of range [0, " +
                            std::to_string(trace.vocab_size) + ")");
    }
    cached[id] = 1;
  }
  SampleClasses classes;
  const std::size_t n = trace.num_samples();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = trace.sample(i);
    const bool hot = std::all_of(row.begin(), row.end(),
                                 [&](std::uint32_t id) { return cached[id] != 0; });
    (hot ? classes.hot : classes.normal).push_back(static_cast<std::uint32_t>(i));
  }
  return classes;
}

BatchSchedule build_schedule(const Trace& trace, std::span<const std::uint32_t> cache_ids,
                             std::int64_t batch_size,
                             std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  SampleClasses classes = classify_samples(trace, cache_ids);

  auto shuffle = [](std::vector<std::uint32_t>& v, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next() % i);
      std::swap(v[i - 1], v[j]);
    }
  };
  if (shuffle_seed) {
    shuffle(classes.hot, substream_seed(*shuffle_seed, 0));
    shuffle(classes.normal, substream_seed(*shuffle_seed, 1));
  }

  auto pack = [batch_size](const std::vector<std::uint32_t>& samples) {
    std::vector<std::vector<std::uint32_t>> batches;
    const auto b = static_cast<std::size_t>(batch_size);
    for (std::size_t off = 0; off < samples.size(); off += b) {
      const std::size_t take = std::min(b, samples.size() - off);
      batches.emplace_back(samples.begin() + static_cast<std::ptrdiff_t>(off),
                           samples.begin() + static_cast<std::ptrdiff_t>(off + take));
    }
    return batches;
  };

  BatchSchedule schedule;
  schedule.batch_size = batch_size;
  schedule.hot_batches = pack(classes.hot);
  schedule.normal_batches = pack(classes.normal);
  return schedule;
}

}  // namespace embcomm
