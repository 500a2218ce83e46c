#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "embcomm/cost_model.hpp"
#include "embcomm/distribution.hpp"

namespace embcomm {

// Device memory model, in parameter-count units. memory_efficiency scales the
// usable budget down to account for allocators that do not reach the
// theoretical packing (1.0 = ideal).
struct DeviceModel {
  std::int64_t total_params;                  // M
  std::int64_t activation_params_per_sample;  // a
  std::int64_t embedding_params;              // parameters per cached embedding
  double memory_efficiency = 1.0;             // in (0, 1]

  DeviceModel(std::int64_t total_params, std::int64_t activation_params_per_sample,
              std::int64_t embedding_params, double memory_efficiency = 1.0);
};

// Largest batch that fits next to `cache_size` cached embeddings:
// floor((M_eff - cache_size * embedding_params) / a). Empty when no single
// sample fits.
std::optional<std::int64_t> max_batch_size(const DeviceModel& device,
                                           std::int64_t cache_size);

// Marginal effect of caching one more embedding (the (k+1)-th most probable)
// on expected per-epoch embedding traffic.
struct MarginalReport {
  std::uint32_t candidate_id = 0;
  // Chance the candidate appears in a batch at the current batch size.
  double presence_gain = 0.0;
  // Break-even value for presence_gain from the rearranged marginal test.
  double threshold = 0.0;
  // Per-epoch embedding-traffic change from caching the candidate (negative
  // means caching helps).
  double delta_comm = 0.0;
  bool recommend = false;  // delta_comm < 0
};

// Evaluates the marginal test at cache size k: traffic with the top-(k+1)
// prefix cached at its (smaller) max batch size, minus traffic with the top-k
// prefix cached at its max batch size. Also evaluates the rearranged
// presence-vs-threshold form and checks the two agree in sign; disagreement
// beyond rounding raises InvariantError. Batch sizes here come straight from
// the memory model (not clamped to Q).
MarginalReport delta_comm(const EmbeddingDistribution& dist, const DeviceModel& device,
                          std::int64_t num_samples, std::int64_t current_cache_size);

struct CachePlan {
  std::size_t cache_size = 0;
  std::vector<std::uint32_t> cached_ids;  // the top-|C| ids by probability
  std::int64_t batch_size = 0;            // memory-derived, clamped to Q
  CostBreakdown expected_epoch_cost;
  bool feasible = false;
  bool used_scan_fallback = false;
};

// Exhaustive reference: evaluates the cached epoch cost at every feasible
// cache size and returns the minimum; ties go to the smaller cache. The
// workload's batch_size field is ignored (the plan derives its own).
CachePlan optimal_cache_size_scan(const EmbeddingDistribution& dist,
                                  const DeviceModel& device, const WorkloadSpec& spec);

// Binary search over cache size for the point where the marginal cost change
// turns non-negative. The sampled marginal signs are checked for
// monotonicity; when the cost curve is not unimodal the search falls back to
// the exhaustive scan (used_scan_fallback is set).
CachePlan optimal_cache_size_search(const EmbeddingDistribution& dist,
                                    const DeviceModel& device, const WorkloadSpec& spec);

// Expected number of main-memory embedding lookups per epoch: the embedding
// component of the cached epoch cost (non-cached transfers are the ones that
// miss the device and hit host memory).
double memory_io_proxy(const EmbeddingDistribution& dist, const WorkloadSpec& spec,
                       std::span<const std::uint32_t> cache_ids);

}  // namespace embcomm
