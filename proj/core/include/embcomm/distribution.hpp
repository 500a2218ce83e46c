#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace embcomm {

// Probabilities must sum to 1 within this absolute tolerance.
inline constexpr double kProbabilitySumTolerance = 1e-9;

// Access distribution over an embedding vocabulary [0, E). Probabilities are
// stored sorted in non-increasing order (ties resolve to the smaller id), and
// the rank <-> original-id mapping is retained so id-based structures (cache
// sets, traces) stay cheap to cross-reference.
//
// Immutable after construction; safe to share across threads.
class EmbeddingDistribution {
 public:
  // Validates: E >= 1, every probability in [0, 1], sum within
  // kProbabilitySumTolerance of 1. The index into `probs` is the embedding id.
  static EmbeddingDistribution from_probabilities(std::vector<double> probs);

  static EmbeddingDistribution uniform(std::size_t size);

  std::size_t size() const noexcept { return ranked_probs_.size(); }

  double prob(std::uint32_t id) const;
  double prob_at_rank(std::size_t rank) const;
  std::uint32_t id_at_rank(std::size_t rank) const;
  std::size_t rank_of(std::uint32_t id) const;

  // Probabilities in rank order (non-increasing).
  std::span<const double> ranked_probs() const noexcept { return ranked_probs_; }

  // The k most probable ids, ties to the smaller id.
  std::vector<std::uint32_t> top_ids(std::size_t k) const;

  // Total probability mass of the given ids. Ids must be distinct and in range.
  double mass_of(std::span<const std::uint32_t> ids) const;

 private:
  EmbeddingDistribution() = default;

  std::vector<double> ranked_probs_;
  std::vector<std::uint32_t> rank_to_id_;
  std::vector<std::uint32_t> id_to_rank_;
};

}  // namespace embcomm
