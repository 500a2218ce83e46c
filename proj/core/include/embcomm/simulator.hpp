#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "embcomm/cost_model.hpp"
#include "embcomm/distribution.hpp"
#include "embcomm/distribution_spec.hpp"
#include "embcomm/rng.hpp"
#include "embcomm/trace.hpp"

namespace embcomm {

// Inverse-CDF sampler over an EmbeddingDistribution. Draw cost is
// O(log E); the CDF is fixed at construction so results depend only on the
// distribution and the generator state.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const EmbeddingDistribution& dist);

  std::uint32_t draw(SplitMix64& rng) const;

 private:
  const EmbeddingDistribution* dist_;
  std::vector<double> cdf_;  // over ranks, last entry exactly 1.0
};

struct Stat {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SimResult {
  // Distinct-id count per (full-size batch, feature column); its expectation
  // is the closed-form expected_unique_per_batch.
  Stat unique_per_batch;
  // Same, counting only ids outside the cache.
  Stat non_cached_unique;
  // Exact accounting over all simulated batches (partial final batches
  // included), averaged over epochs: Q index units plus one unit per
  // non-cached distinct id per feature column per batch.
  CostBreakdown measured_epoch_cost;
  // Fraction of batches that touched no uncached embedding.
  double hot_batch_fraction = 0.0;
  // Filled by portion_usage only.
  std::vector<double> portion_usage;
};

// One batch of b samples with d i.i.d. lookups each, drawn sample-major.
// Deterministic given the generator state.
std::vector<std::uint32_t> sample_batch(const EmbeddingDistribution& dist,
                                        std::int64_t batch_size,
                                        std::int64_t lookups_per_sample,
                                        SplitMix64& rng);

// Mean distinct-id count over `trials` independently sampled batches of b
// lookups each (one feature column). Trial t uses substream t of `seed` and
// is reproducible in isolation.
SimResult measure_unique(const EmbeddingDistribution& dist, std::int64_t batch_size,
                         std::int64_t trials, std::uint64_t seed);

// Samples `epochs` full epochs of spec.num_samples samples in batches of
// spec.batch_size (final batch at its true size) and measures the realized
// communication cost with the given ids cached. Epoch e uses substream e.
SimResult simulate_epoch(const EmbeddingDistribution& dist, const WorkloadSpec& spec,
                         std::span<const std::uint32_t> cache_ids, std::int64_t epochs,
                         std::uint64_t seed);

// Replays a trace once through its hot/normal batch schedule and measures the
// realized cost. Deterministic given the trace; the error fields describe
// batch-to-batch spread.
SimResult simulate_epoch(const Trace& trace, std::int64_t batch_size,
                         std::span<const std::uint32_t> cache_ids);

// Growth of per-batch coalesced cost when the vocabulary and the batch size
// both grow by `factor`, per distribution kind, against the linear growth of
// communicating whole batches.
struct ScalingRow {
  DistributionKind kind = DistributionKind::zipf;
  double shape = 0.0;
  std::int64_t base_size = 0;
  std::int64_t scaled_size = 0;
  std::int64_t base_batch = 0;
  std::int64_t scaled_batch = 0;
  double baseline_ratio = 0.0;   // (factor*b*d) / (b*d), exactly factor
  double embedding_ratio = 0.0;  // growth of the expected-distinct term
  double total_ratio = 0.0;      // growth including the index term
  double growth_bound = 0.0;     // claimed bound on embedding_ratio
  bool within_bound = false;
};

struct ScalingReport {
  std::int64_t factor = 0;
  std::int64_t base_batch = 0;
  std::int64_t lookups_per_sample = 0;
  std::vector<ScalingRow> rows;
  bool all_within_bounds = false;
  std::string calibration_note;
};

// Claimed growth bounds on the embedding-cost ratio per kind.
double scaling_growth_bound(DistributionKind kind);

// Evaluates each parametric spec at (E, b) and at (factor*E, factor*b) under
// catalog-extension scaling (materialize_extended) and reports the ratios.
// Purely analytical; no sampling.
ScalingReport scaling_study(std::span<const DistributionSpec> specs,
                            std::int64_t base_batch, std::int64_t lookups_per_sample,
                            std::int64_t factor = 5);

// Splits the cache into `portions` contiguous rank ranges (hottest first) and
// reports, for each portion, the mean number of samples per batch of
// batch_size that touch at least one id in it. A sample touching several
// portions counts toward each of them.
std::vector<double> portion_usage(const EmbeddingDistribution& dist,
                                  std::span<const std::uint32_t> cache_ids,
                                  int portions, std::int64_t batch_size,
                                  std::int64_t lookups_per_sample, std::int64_t trials,
                                  std::uint64_t seed);

// Trace variant: averages over the trace's full-size batches in file order.
std::vector<double> portion_usage(const Trace& trace,
                                  std::span<const std::uint32_t> cache_ids,
                                  int portions, std::int64_t batch_size);

}  // namespace embcomm
