#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "embcomm/distribution.hpp"

namespace embcomm {

// Unit convention used by every cost in this library: transmitting one
// embedding vector costs one unit, and so does transmitting one index.
inline constexpr const char* kCostUnitsNote =
    "one unit = one embedding vector = one transmitted index";

// One epoch of training: Q samples, batches of b, d lookups per sample.
struct WorkloadSpec {
  std::int64_t num_samples;         // Q
  std::int64_t batch_size;          // b
  std::int64_t lookups_per_sample;  // d

  // Validates Q >= b >= 1 and d >= 1.
  WorkloadSpec(std::int64_t num_samples, std::int64_t batch_size,
               std::int64_t lookups_per_sample);
};

struct CostBreakdown {
  double index_cost = 0.0;
  double embedding_cost = 0.0;
  double total = 0.0;  // always index_cost + embedding_cost
  std::string units_note = kCostUnitsNote;
};

// Chance that an embedding with access probability p appears at least once in
// a batch of b i.i.d. lookups: 1 - (1-p)^b. Stable for small p and large b.
double batch_presence_prob(double p, std::int64_t b);

// Expected number of distinct embeddings referenced by one batch of b i.i.d.
// lookups: sum of batch_presence_prob over the vocabulary.
double expected_unique_per_batch(const EmbeddingDistribution& dist, std::int64_t b);

// Same sum restricted to ranks >= first_rank, i.e. excluding the
// `first_rank` most probable embeddings. first_rank == 0 gives the full sum.
double expected_unique_from_rank(const EmbeddingDistribution& dist, std::int64_t b,
                                 std::size_t first_rank);

// Per-batch cost of coalesced transfer: b index units plus the expected
// number of distinct embeddings.
CostBreakdown coalesced_batch_cost(const EmbeddingDistribution& dist, std::int64_t b);

// Per-epoch cost of communicating whole batches: Q * d, independent of b.
double baseline_epoch_cost(const WorkloadSpec& spec);

// Per-epoch cost with coalescing: Q index units plus (Q/b) batches times the
// expected distinct count times d. Q/b is a real ratio, not rounded.
CostBreakdown coalesced_epoch_cost(const EmbeddingDistribution& dist,
                                   const WorkloadSpec& spec);

// Coalesced epoch cost with the given ids held on device: cached embeddings
// drop out of the embedding sum. Rejects out-of-range ids; duplicates are
// tolerated and count once.
CostBreakdown cached_epoch_cost(const EmbeddingDistribution& dist,
                                const WorkloadSpec& spec,
                                std::span<const std::uint32_t> cache_ids);

}  // namespace embcomm
