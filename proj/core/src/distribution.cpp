#include "embcomm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "detail/accumulate.hpp"
#include "embcomm/error.hpp"

namespace embcomm {

EmbeddingDistribution EmbeddingDistribution::from_probabilities(std::vector<double> probs) {
  if (probs.empty()) {
    throw ValidationError("distribution needs at least one embedding");
  }
  if (probs.size() > static_cast<std::size_t>(UINT32_MAX)) {
    throw ValidationError("vocabulary too large for 32-bit embedding ids");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("probability out of [0,1] at id " + std::to_string(i) +
                            ": " + std::to_string(p));
    }
  }
  const double sum = detail::kahan_sum(probs);
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(sum) +
                          ", expected 1 within 1e-9");
  }

  EmbeddingDistribution dist;
  const std::size_t n = probs.size();
  dist.rank_to_id_.resize(n);
  std::iota(dist.rank_to_id_.begin(), dist.rank_to_id_.end(), 0u);
  // Parametric inputs arrive already sorted; skip the sort when possible.
  const bool sorted = std::is_sorted(probs.begin(), probs.end(),
                                     [](double a, double b) { return a > b; });
  if (!sorted) {
    std::sort(dist.rank_to_id_.begin(), dist.rank_to_id_.end(),
              [&probs](std::uint32_t a, std::uint32_t b) {
                if (probs[a] != probs[b]) return probs[a] > probs[b];
                return a < b;
              });
  }
  dist.ranked_probs_.resize(n);
  dist.id_to_rank_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint32_t id = dist.rank_to_id_[r];
    dist.ranked_probs_[r] = probs[id];
    dist.id_to_rank_[id] = static_cast<std::uint32_t>(r);
  }
  return dist;
}

EmbeddingDistribution EmbeddingDistribution::uniform(std::size_t size) {
  if (size == 0) throw ValidationError("distribution needs at least one embedding");
  return from_probabilities(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

double EmbeddingDistribution::prob(std::uint32_t id) const {
  if (id >= size()) {
    throw ValidationError("embedding id " + std::to_string(id) + " out of range [0, " +
                          std::to_string(size()) + ")");
  }
  return ranked_probs_[id_to_rank_[id]];
}

double EmbeddingDistribution::prob_at_rank(std::size_t rank) const {
  if (rank >= size()) {
    throw ValidationError("rank " + std::to_string(rank) + " out of range");
  }
  return ranked_probs_[rank];
}

std::uint32_t EmbeddingDistribution::id_at_rank(std::size_t rank) const {
  if (rank >= size()) {
    throw ValidationError("rank " + std::to_string(rank) + " out of range");
  }
  return rank_to_id_[rank];
}

std::size_t EmbeddingDistribution::rank_of(std::uint32_t id) const {
  if (id >= size()) {
    throw ValidationError("embedding id " + std::to_string(id) + " out of range [0, " +
                          std::to_string(size()) + ")");
  }
  return id_to_rank_[id];
}

std::vector<std::uint32_t> EmbeddingDistribution::top_ids(std::size_t k) const {
  if (k > size()) {
    throw ValidationError("cannot take top " + std::to_string(k) + " of " +
                          std::to_string(size()) + " embeddings");
  }
  return {rank_to_id_.begin(), rank_to_id_.begin() + static_cast<std::ptrdiff_t>(k)};
}

double EmbeddingDistribution::mass_of(std::span<const std::uint32_t> ids) const {
  double mass = 0.0;
  for (std::uint32_t id : ids) mass += prob(id);
  return mass;
}

}  // namespace embcomm
