#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "embcomm/distribution.hpp"

namespace embcomm {

// Concrete lookup trace: Q samples of d embedding ids each, one shared
// vocabulary of size E. Text format (bit-exact):
//   line 1:  d=<int> E=<int>
//   line 2+: one sample per line, d space-separated decimal ids in [0, E)
struct Trace {
  std::int64_t num_features = 0;  // d
  std::size_t vocab_size = 0;     // E
  std::vector<std::uint32_t> ids; // row-major, num_samples x num_features

  std::size_t num_samples() const {
    return num_features > 0 ? ids.size() / static_cast<std::size_t>(num_features) : 0;
  }
  std::span<const std::uint32_t> sample(std::size_t i) const {
    const auto d = static_cast<std::size_t>(num_features);
    return {ids.data() + i * d, d};
  }
};

// Parse/serialize the text format. Malformed input raises ValidationError
// naming the offending line.
Trace parse_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const Trace& trace);
void save_trace(const std::filesystem::path& path, const Trace& trace);

// Ranked access counts. Entries are sorted by count descending, ties to the
// smaller id; only observed ids (count > 0) appear. cum_fraction is the
// running share of all Q*d accesses and ends at exactly 1.0.
struct SkewEntry {
  std::uint32_t id = 0;
  std::uint64_t count = 0;
  double cum_fraction = 0.0;
};

struct SkewTable {
  std::vector<SkewEntry> entries;
  std::uint64_t total_accesses = 0;
};

SkewTable build_skew_table(const Trace& trace);

// CSV export: header "id,count,cum_fraction".
void write_skew_csv(std::ostream& out, const SkewTable& table);

// Empirical access probabilities: (count + smoothing) / (total + smoothing*E).
// Unseen ids get probability 0 when smoothing is 0.
EmbeddingDistribution estimate_distribution(const SkewTable& table,
                                            std::size_t vocab_size,
                                            double smoothing = 0.0);

// Sample indices split by cache dependency: a sample is hot iff every one of
// its lookups is cached. The two lists partition [0, Q) and keep original
// order.
struct SampleClasses {
  std::vector<std::uint32_t> hot;
  std::vector<std::uint32_t> normal;
};

SampleClasses classify_samples(const Trace& trace,
                               std::span<const std::uint32_t> cache_ids);

// Mini-batches built per class: hot samples packed into batches of
// batch_size, then normal samples likewise; the last batch of each class may
// be short. Batches hold sample indices in stable original order unless a
// shuffle seed is given (each class is shuffled independently before
// packing).
struct BatchSchedule {
  std::vector<std::vector<std::uint32_t>> hot_batches;
  std::vector<std::vector<std::uint32_t>> normal_batches;
  std::int64_t batch_size = 0;
};

BatchSchedule build_schedule(const Trace& trace, std::span<const std::uint32_t> cache_ids,
                             std::int64_t batch_size,
                             std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace embcomm
