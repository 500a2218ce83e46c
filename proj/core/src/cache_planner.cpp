#include "embcomm/cache_planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "embcomm/error.hpp"

namespace embcomm {

namespace {

// Per-epoch embedding traffic with the top-k prefix cached, at batch size b:
// (Q/b) * sum of presence over non-cached ranks. No lookup multiplier; it is
// a common positive factor and drops out of every sign decision.
double prefix_embedding_traffic(const EmbeddingDistribution& dist, std::int64_t num_samples,
                                std::int64_t b, std::int64_t k) {
  const double sum = expected_unique_from_rank(dist, b, static_cast<std::size_t>(k));
  return sum * static_cast<double>(num_samples) / static_cast<double>(b);
}

struct PlanProblem {
  const EmbeddingDistribution& dist;
  const DeviceModel& device;
  std::int64_t num_samples;
  std::int64_t lookups;

  // Memory-derived batch size clamped to the dataset size.
  std::optional<std::int64_t> batch_at(std::int64_t k) const {
    auto b = max_batch_size(device, k);
    if (!b) return std::nullopt;
    return std::min(*b, num_samples);
  }

  CostBreakdown cost_at(std::int64_t k) const {
    const auto b = batch_at(k);
    const WorkloadSpec spec(num_samples, *b, lookups);
    return cached_epoch_cost_prefix(spec, k);
  }

  CostBreakdown cached_epoch_cost_prefix(const WorkloadSpec& spec, std::int64_t k) const {
    CostBreakdown cost;
    cost.index_cost = static_cast<double>(spec.num_samples);
    const double sum =
        expected_unique_from_rank(dist, spec.batch_size, static_cast<std::size_t>(k));
    cost.embedding_cost = (static_cast<double>(spec.num_samples) /
                           static_cast<double>(spec.batch_size)) *
                          sum * static_cast<double>(spec.lookups_per_sample);
    cost.total = cost.index_cost + cost.embedding_cost;
    return cost;
  }

  // Largest cache size that still leaves room for a batch of one sample.
  std::int64_t max_feasible_cache() const {
    const auto vocab = static_cast<std::int64_t>(dist.size());
    std::int64_t lo = 0, hi = vocab;  // batch_at is non-increasing in k
    if (!batch_at(0)) return -1;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo + 1) / 2;
      if (batch_at(mid)) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return lo;
  }

  CachePlan plan_at(std::int64_t k) const {
    CachePlan plan;
    plan.cache_size = static_cast<std::size_t>(k);
    plan.cached_ids = dist.top_ids(plan.cache_size);
    plan.batch_size = *batch_at(k);
    plan.expected_epoch_cost = cost_at(k);
    plan.feasible = true;
    return plan;
  }
};

CachePlan infeasible_plan() {
  CachePlan plan;
  plan.feasible = false;
  return plan;
}

}  // namespace

DeviceModel::DeviceModel(std::int64_t total_params_in,
                         std::int64_t activation_params_per_sample_in,
                         std::int64_t embedding_params_in, double memory_efficiency_in)
    : total_params(total_params_in),
      activation_params_per_sample(activation_params_per_sample_in),
      embedding_params(embedding_params_in),
      memory_efficiency(memory_efficiency_in) {
  if (activation_params_per_sample < 1) {
    throw ValidationError("activation footprint must be >= 1 parameter");
  }
  if (total_params < activation_params_per_sample) {
    throw ValidationError("no feasible batch: device memory " +
                          std::to_string(total_params) +
                          " cannot hold one sample's activations (" +
                          std::to_string(activation_params_per_sample) + ")");
  }
  if (embedding_params < 1) {
    throw ValidationError("embedding footprint must be >= 1 parameter");
  }
  if (!(memory_efficiency > 0.0 && memory_efficiency <= 1.0)) {
    throw ValidationError("memory efficiency must be in (0, 1]");
  }
}

std::optional<std::int64_t> max_batch_size(const DeviceModel& device,
                                           std::int64_t cache_size) {
  if (cache_size < 0) throw ValidationError("cache size must be >= 0");
  if (device.memory_efficiency == 1.0) {
    std::int64_t cache_params = 0;
    if (__builtin_mul_overflow(cache_size, device.embedding_params, &cache_params)) {
      return std::nullopt;
    }
    const std::int64_t remaining = device.total_params - cache_params;
    if (remaining < device.activation_params_per_sample) return std::nullopt;
    return remaining / device.activation_params_per_sample;
  }
  const long double usable =
      static_cast<long double>(device.memory_efficiency) *
      static_cast<long double>(device.total_params);
  const long double remaining =
      usable - static_cast<long double>(cache_size) *
                   static_cast<long double>(device.embedding_params);
  const long double slots =
      remaining / static_cast<long double>(device.activation_params_per_sample);
  if (slots < 1.0L) return std::nullopt;
  return static_cast<std::int64_t>(std::floor(slots));
}

MarginalReport delta_comm(const EmbeddingDistribution& dist, const DeviceModel& device,
                          std::int64_t num_samples, std::int64_t current_cache_size) {
  if (num_samples < 1) throw ValidationError("dataset size must be >= 1");
  if (current_cache_size < 0 ||
      static_cast<std::size_t>(current_cache_size) >= dist.size()) {
    throw ValidationError("no candidate embedding beyond cache size " +
                          std::to_string(current_cache_size));
  }
  const auto b = max_batch_size(device, current_cache_size);
  const auto b_next = max_batch_size(device, current_cache_size + 1);
  if (!b || !b_next) {
    throw ValidationError("cache of size " + std::to_string(current_cache_size + 1) +
                          " leaves no room for a batch");
  }

  const auto k = static_cast<std::size_t>(current_cache_size);
  const double traffic_with =
      prefix_embedding_traffic(dist, num_samples, *b_next, current_cache_size + 1);
  const double traffic_without =
      prefix_embedding_traffic(dist, num_samples, *b, current_cache_size);

  MarginalReport report;
  report.candidate_id = dist.id_at_rank(k);
  report.delta_comm = traffic_with - traffic_without;
  report.recommend = report.delta_comm < 0.0;
  report.presence_gain = batch_presence_prob(dist.prob_at_rank(k), *b);

  // Rearranged break-even form: caching helps iff presence_gain exceeds this
  // weighted sum over the remaining non-cached embeddings.
  double threshold = 0.0;
  const double bd = static_cast<double>(*b);
  const double bnd = static_cast<double>(*b_next);
  for (std::size_t r = k + 1; r < dist.size(); ++r) {
    const double p = dist.prob_at_rank(r);
    threshold += (bd * batch_presence_prob(p, *b_next) -
                  bnd * batch_presence_prob(p, *b)) /
                 bnd;
  }
  report.threshold = threshold;

  const bool rearranged_recommend = report.presence_gain > threshold;
  const double scale =
      std::max({std::abs(traffic_with), std::abs(traffic_without), 1.0});
  if (std::abs(report.delta_comm) > 1e-9 * scale &&
      rearranged_recommend != report.recommend) {
    throw InvariantError("marginal caching test: direct and rearranged forms disagree");
  }
  return report;
}

CachePlan optimal_cache_size_scan(const EmbeddingDistribution& dist,
                                  const DeviceModel& device, const WorkloadSpec& spec) {
  const PlanProblem prob{dist, device, spec.num_samples, spec.lookups_per_sample};
  const std::int64_t k_max = prob.max_feasible_cache();
  if (k_max < 0) return infeasible_plan();

  std::int64_t best_k = 0;
  double best_total = prob.cost_at(0).total;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double total = prob.cost_at(k).total;
    if (total < best_total) {
      best_total = total;
      best_k = k;
    }
  }
  return prob.plan_at(best_k);
}

CachePlan optimal_cache_size_search(const EmbeddingDistribution& dist,
                                    const DeviceModel& device, const WorkloadSpec& spec) {
  const PlanProblem prob{dist, device, spec.num_samples, spec.lookups_per_sample};
  const std::int64_t k_max = prob.max_feasible_cache();
  if (k_max < 0) return infeasible_plan();
  if (k_max == 0) return prob.plan_at(0);

  std::unordered_map<std::int64_t, double> memo;
  auto total_at = [&](std::int64_t k) {
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    const double t = prob.cost_at(k).total;
    memo.emplace(k, t);
    return t;
  };
  // Marginal sign at k: does growing the cache from k to k+1 stop paying off?
  auto marginal_nonneg = [&](std::int64_t k) { return total_at(k + 1) >= total_at(k); };

  // Probe the marginal signs: every k when the range is small, otherwise a
  // uniform sample. A non-monotone sign pattern means the cost curve is not
  // unimodal and the binary search cannot be trusted.
  std::vector<std::int64_t> probes;
  constexpr std::int64_t kExhaustiveLimit = 1024;
  constexpr std::int64_t kSampleCount = 64;
  if (k_max <= kExhaustiveLimit) {
    probes.resize(static_cast<std::size_t>(k_max));
    for (std::int64_t i = 0; i < k_max; ++i) probes[static_cast<std::size_t>(i)] = i;
  } else {
    for (std::int64_t i = 0; i < kSampleCount; ++i) {
      probes.push_back(i * (k_max - 1) / (kSampleCount - 1));
    }
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  }

  bool seen_nonneg = false;
  bool monotone = true;
  std::int64_t last_neg = -1;
  std::int64_t first_nonneg = k_max;  // as a marginal index: none found
  for (const std::int64_t k : probes) {
    if (marginal_nonneg(k)) {
      if (!seen_nonneg) first_nonneg = k;
      seen_nonneg = true;
    } else {
      if (seen_nonneg) {
        monotone = false;
        break;
      }
      last_neg = k;
    }
  }

  if (!monotone) {
    CachePlan plan = optimal_cache_size_scan(dist, device, spec);
    plan.used_scan_fallback = true;
    return plan;
  }

  // First marginal index with a non-negative sign inside (last_neg,
  // first_nonneg]; the predicate is monotone on a unimodal curve.
  std::int64_t lo = last_neg + 1;
  std::int64_t hi = first_nonneg;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (marginal_nonneg(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  std::int64_t best_k = lo;  // == k_max when every marginal is negative

  // Guard against curvature the probes missed: keep the cheapest point among
  // everything actually evaluated.
  double best_total = total_at(best_k);
  std::vector<std::pair<std::int64_t, double>> evaluated(memo.begin(), memo.end());
  std::sort(evaluated.begin(), evaluated.end());
  for (const auto& [k, total] : evaluated) {
    if (total < best_total) {
      best_total = total;
      best_k = k;
    }
  }
  return prob.plan_at(best_k);
}

double memory_io_proxy(const EmbeddingDistribution& dist, const WorkloadSpec& spec,
                       std::span<const std::uint32_t> cache_ids) {
  return cached_epoch_cost(dist, spec, cache_ids).embedding_cost;
}

}  // namespace embcomm
