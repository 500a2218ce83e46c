#include "embcomm/cost_model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "embcomm/error.hpp"

namespace embcomm {

namespace {

// Shared by the coalesced and cached epoch formulas so both take the same
// rounding path: (Q/b) batches times the distinct-count sum times d lookups.
double epoch_embedding_cost(double unique_sum, const WorkloadSpec& spec) {
  const double batches = static_cast<double>(spec.num_samples) /
                         static_cast<double>(spec.batch_size);
  return batches * unique_sum * static_cast<double>(spec.lookups_per_sample);
}

}  // namespace

WorkloadSpec::WorkloadSpec(std::int64_t num_samples_in, std::int64_t batch_size_in,
                           std::int64_t lookups_per_sample_in)
    : num_samples(num_samples_in),
      batch_size(batch_size_in),
      lookups_per_sample(lookups_per_sample_in) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (num_samples < batch_size) {
    throw ValidationError("batch size " + std::to_string(batch_size) +
                          " exceeds dataset size " + std::to_string(num_samples));
  }
  if (lookups_per_sample < 1) throw ValidationError("lookups per sample must be >= 1");
}

double batch_presence_prob(double p, std::int64_t b) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("presence probability needs p in [0,1], got " +
                          std::to_string(p));
  }
  if (b < 1) throw ValidationError("presence probability needs b >= 1");
  if (b == 1) return p;
  if (p == 1.0) return 1.0;
  // 1 - (1-p)^b as -expm1(b*log1p(-p)); exact at p=0 and stable for p*b << 1.
  return -std::expm1(static_cast<double>(b) * std::log1p(-p));
}

double expected_unique_from_rank(const EmbeddingDistribution& dist, std::int64_t b,
                                 std::size_t first_rank) {
  if (first_rank > dist.size()) {
    throw ValidationError("rank offset " + std::to_string(first_rank) + " out of range");
  }
  const auto probs = dist.ranked_probs();
  double sum = 0.0;
  for (std::size_t r = first_rank; r < probs.size(); ++r) {
    sum += batch_presence_prob(probs[r], b);
  }
  return sum;
}

double expected_unique_per_batch(const EmbeddingDistribution& dist, std::int64_t b) {
  return expected_unique_from_rank(dist, b, 0);
}

CostBreakdown coalesced_batch_cost(const EmbeddingDistribution& dist, std::int64_t b) {
  CostBreakdown cost;
  cost.index_cost = static_cast<double>(b);
  cost.embedding_cost = expected_unique_per_batch(dist, b);
  cost.total = cost.index_cost + cost.embedding_cost;
  return cost;
}

double baseline_epoch_cost(const WorkloadSpec& spec) {
  return static_cast<double>(spec.num_samples) *
         static_cast<double>(spec.lookups_per_sample);
}

CostBreakdown coalesced_epoch_cost(const EmbeddingDistribution& dist,
                                   const WorkloadSpec& spec) {
  CostBreakdown cost;
  cost.index_cost = static_cast<double>(spec.num_samples);
  cost.embedding_cost =
      epoch_embedding_cost(expected_unique_per_batch(dist, spec.batch_size), spec);
  cost.total = cost.index_cost + cost.embedding_cost;
  return cost;
}

CostBreakdown cached_epoch_cost(const EmbeddingDistribution& dist,
                                const WorkloadSpec& spec,
                                std::span<const std::uint32_t> cache_ids) {
  std::vector<char> cached(dist.size(), 0);
  for (std::uint32_t id : cache_ids) {
    if (id >= dist.size()) {
      throw ValidationError("cache id " + std::to_string(id) + " out of range [0, " +
                            std::to_string(dist.size()) + ")");
    }
    cached[id] = 1;
  }
  // Rank-order walk, skipping cached ids. For a top-k cache this adds exactly
  // the terms of expected_unique_from_rank(dist, b, k) in the same order.
  double sum = 0.0;
  for (std::size_t r = 0; r < dist.size(); ++r) {
    if (cached[dist.id_at_rank(r)]) continue;
    sum += batch_presence_prob(dist.prob_at_rank(r), spec.batch_size);
  }
  CostBreakdown cost;
  cost.index_cost = static_cast<double>(spec.num_samples);
  cost.embedding_cost = epoch_embedding_cost(sum, spec);
  cost.total = cost.index_cost + cost.embedding_cost;
  return cost;
}

}  // namespace embcomm
