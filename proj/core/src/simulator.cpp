#include "embcomm/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "embcomm/error.hpp"

namespace embcomm {

namespace {

// Distinct-id marker with O(1) reset between uses.
class UniqueCounter {
 public:
  explicit UniqueCounter(std::size_t size) : stamps_(size, 0) {}

  void fresh() {
    if (++epoch_ == 0) {
      std::fill(stamps_.begin(), stamps_.end(), 0);
      epoch_ = 1;
    }
  }

  bool mark(std::uint32_t id) {
    if (stamps_[id] == epoch_) return false;
    stamps_[id] = epoch_;
    return true;
  }

 private:
  std::vector<std::uint32_t> stamps_;
  std::uint32_t epoch_ = 0;
};

// Running mean / standard error over observations, accumulated in a fixed
// order so results are bit-stable.
class StatAccumulator {
 public:
  void add(double x) {
    ++count_;
    sum_ += x;
    sum_sq_ += x * x;
  }

  Stat finish() const {
    Stat s;
    if (count_ == 0) return s;
    const double n = static_cast<double>(count_);
    s.mean = sum_ / n;
    if (count_ > 1) {
      const double var = std::max(0.0, (sum_sq_ - n * s.mean * s.mean) / (n - 1.0));
      s.std_error = std::sqrt(var / n);
    }
    return s;
  }

 private:
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

std::vector<char> cache_mask(std::size_t vocab, std::span<const std::uint32_t> ids) {
  std::vector<char> mask(vocab, 0);
  for (std::uint32_t id : ids) {
    if (id >= vocab) {
      throw ValidationError("cache id " + std::to_string(id) + " out of range [0, " +
                            std::to_string(vocab) + ")");
    }
    mask[id] = 1;
  }
  return mask;
}

// Distinct counts for one batch laid out sample-major: per feature column,
// the number of distinct ids and the number of distinct non-cached ids,
// summed over columns.
struct BatchUnique {
  std::int64_t all = 0;
  std::int64_t non_cached = 0;
};

template <typename Observe>
BatchUnique count_batch_unique(std::span<const std::uint32_t> batch,
                               std::int64_t batch_samples, std::int64_t lookups,
                               const std::vector<char>& cached, UniqueCounter& uniq,
                               UniqueCounter& uniq_nc, Observe&& observe_column) {
  BatchUnique result;
  for (std::int64_t f = 0; f < lookups; ++f) {
    uniq.fresh();
    uniq_nc.fresh();
    std::int64_t col_all = 0;
    std::int64_t col_nc = 0;
    for (std::int64_t s = 0; s < batch_samples; ++s) {
      const std::uint32_t id = batch[static_cast<std::size_t>(s * lookups + f)];
      if (uniq.mark(id)) ++col_all;
      if (!cached[id] && uniq_nc.mark(id)) ++col_nc;
    }
    observe_column(col_all, col_nc);
    result.all += col_all;
    result.non_cached += col_nc;
  }
  return result;
}

}  // namespace

DiscreteSampler::DiscreteSampler(const EmbeddingDistribution& dist) : dist_(&dist) {
  cdf_.resize(dist.size());
  double running = 0.0;
  double carry = 0.0;
  const auto probs = dist.ranked_probs();
  for (std::size_t r = 0; r < probs.size(); ++r) {
    const double y = probs[r] - carry;
    const double t = running + y;
    carry = (t - running) - y;
    running = t;
    cdf_[r] = running;
  }
  cdf_.back() = 1.0;
}

std::uint32_t DiscreteSampler::draw(SplitMix64& rng) const {
  const double u = rng.next_double();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return dist_->id_at_rank(static_cast<std::size_t>(it - cdf_.begin()));
}

std::vector<std::uint32_t> sample_batch(const EmbeddingDistribution& dist,
                                        std::int64_t batch_size,
                                        std::int64_t lookups_per_sample,
                                        SplitMix64& rng) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (lookups_per_sample < 1) throw ValidationError("lookups per sample must be >= 1");
  const DiscreteSampler sampler(dist);
  std::vector<std::uint32_t> batch(
      static_cast<std::size_t>(batch_size * lookups_per_sample));
  for (auto& id : batch) id = sampler.draw(rng);
  return batch;
}

SimResult measure_unique(const EmbeddingDistribution& dist, std::int64_t batch_size,
                         std::int64_t trials, std::uint64_t seed) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (trials < 1) throw ValidationError("trials must be >= 1");

  const DiscreteSampler sampler(dist);
  UniqueCounter uniq(dist.size());
  StatAccumulator acc;
  for (std::int64_t t = 0; t < trials; ++t) {
    SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(t)));
    uniq.fresh();
    std::int64_t distinct = 0;
    for (std::int64_t i = 0; i < batch_size; ++i) {
      if (uniq.mark(sampler.draw(rng))) ++distinct;
    }
    acc.add(static_cast<double>(distinct));
  }

  SimResult result;
  result.unique_per_batch = acc.finish();
  result.non_cached_unique = result.unique_per_batch;
  return result;
}

SimResult simulate_epoch(const EmbeddingDistribution& dist, const WorkloadSpec& spec,
                         std::span<const std::uint32_t> cache_ids, std::int64_t epochs,
                         std::uint64_t seed) {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  const std::vector<char> cached = cache_mask(dist.size(), cache_ids);
  const DiscreteSampler sampler(dist);
  UniqueCounter uniq(dist.size());
  UniqueCounter uniq_nc(dist.size());

  StatAccumulator all_stat;
  StatAccumulator nc_stat;
  double embedding_units_total = 0.0;
  std::int64_t hot_batches = 0;
  std::int64_t total_batches = 0;
  std::vector<std::uint32_t> batch;

  for (std::int64_t e = 0; e < epochs; ++e) {
    SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(e)));
    std::int64_t remaining = spec.num_samples;
    while (remaining > 0) {
      const std::int64_t bi = std::min(spec.batch_size, remaining);
      remaining -= bi;
      batch.resize(static_cast<std::size_t>(bi * spec.lookups_per_sample));
      for (auto& id : batch) id = sampler.draw(rng);

      const bool full = bi == spec.batch_size;
      const auto counts = count_batch_unique(
          batch, bi, spec.lookups_per_sample, cached, uniq, uniq_nc,
          [&](std::int64_t col_all, std::int64_t col_nc) {
            if (full) {
              all_stat.add(static_cast<double>(col_all));
              nc_stat.add(static_cast<double>(col_nc));
            }
          });
      embedding_units_total += static_cast<double>(counts.non_cached);
      if (counts.non_cached == 0) ++hot_batches;
      ++total_batches;
    }
  }

  SimResult result;
  result.unique_per_batch = all_stat.finish();
  result.non_cached_unique = nc_stat.finish();
  result.measured_epoch_cost.index_cost = static_cast<double>(spec.num_samples);
  result.measured_epoch_cost.embedding_cost =
      embedding_units_total / static_cast<double>(epochs);
  result.measured_epoch_cost.total =
      result.measured_epoch_cost.index_cost + result.measured_epoch_cost.embedding_cost;
  result.hot_batch_fraction =
      static_cast<double>(hot_batches) / static_cast<double>(total_batches);
  return result;
}

SimResult simulate_epoch(const Trace& trace, std::int64_t batch_size,
                         std::span<const std::uint32_t> cache_ids) {
  const std::vector<char> cached = cache_mask(trace.vocab_size, cache_ids);
  const BatchSchedule schedule = build_schedule(trace, cache_ids, batch_size);
  UniqueCounter uniq(trace.vocab_size);
  UniqueCounter uniq_nc(trace.vocab_size);

  StatAccumulator all_stat;
  StatAccumulator nc_stat;
  double embedding_units_total = 0.0;
  std::int64_t hot_batches = 0;
  std::int64_t total_batches = 0;
  std::vector<std::uint32_t> batch;

  auto replay = [&](const std::vector<std::vector<std::uint32_t>>& batches) {
    for (const auto& members : batches) {
      const auto bi = static_cast<std::int64_t>(members.size());
      batch.clear();
      for (const std::uint32_t s : members) {
        const auto row = trace.sample(s);
        batch.insert(batch.end(), row.begin(), row.end());
      }
      const bool full = bi == batch_size;
      const auto counts = count_batch_unique(
          batch, bi, trace.num_features, cached, uniq, uniq_nc,
          [&](std::int64_t col_all, std::int64_t col_nc) {
            if (full) {
              all_stat.add(static_cast<double>(col_all));
              nc_stat.add(static_cast<double>(col_nc));
            }
          });
      embedding_units_total += static_cast<double>(counts.non_cached);
      if (counts.non_cached == 0) ++hot_batches;
      ++total_batches;
    }
  };
  replay(schedule.hot_batches);
  replay(schedule.normal_batches);

  SimResult result;
  result.unique_per_batch = all_stat.finish();
  result.non_cached_unique = nc_stat.finish();
  result.measured_epoch_cost.index_cost = static_cast<double>(trace.num_samples());
  result.measured_epoch_cost.embedding_cost = embedding_units_total;
  result.measured_epoch_cost.total =
      result.measured_epoch_cost.index_cost + result.measured_epoch_cost.embedding_cost;
  result.hot_batch_fraction =
      total_batches > 0
          ? static_cast<double>(hot_batches) / static_cast<double>(total_batches)
          : 0.0;
  return result;
}

double scaling_growth_bound(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::zipf:
      return 2.0;
    case DistributionKind::exponential:
    case DistributionKind::half_normal:
      return 1.5;
    case DistributionKind::empirical:
      break;
  }
  throw ValidationError("no growth bound for empirical distributions");
}

ScalingReport scaling_study(std::span<const DistributionSpec> specs,
                            std::int64_t base_batch, std::int64_t lookups_per_sample,
                            std::int64_t factor) {
  if (base_batch < 1) throw ValidationError("batch size must be >= 1");
  if (lookups_per_sample < 1) throw ValidationError("lookups per sample must be >= 1");
  if (factor < 2) throw ValidationError("scale factor must be >= 2");

  ScalingReport report;
  report.factor = factor;
  report.base_batch = base_batch;
  report.lookups_per_sample = lookups_per_sample;
  report.calibration_note =
      "default shapes zipf=2.5, exponential=100, half_normal=0.05 are calibrated so "
      "the growth bounds hold under catalog-extension scaling; earlier defaults "
      "(1, 5, 0.3) exceed the bounds";
  report.all_within_bounds = true;

  for (const DistributionSpec& spec : specs) {
    const EmbeddingDistribution base = materialize(spec);
    const EmbeddingDistribution grown = materialize_extended(spec, factor);
    const CostBreakdown base_cost = coalesced_batch_cost(base, base_batch);
    const CostBreakdown grown_cost = coalesced_batch_cost(grown, factor * base_batch);

    ScalingRow row;
    row.kind = spec.kind;
    row.shape = spec.shape;
    row.base_size = static_cast<std::int64_t>(spec.size);
    row.scaled_size = static_cast<std::int64_t>(grown.size());
    row.base_batch = base_batch;
    row.scaled_batch = factor * base_batch;
    const double d = static_cast<double>(lookups_per_sample);
    row.baseline_ratio = (static_cast<double>(factor * base_batch) * d) /
                         (static_cast<double>(base_batch) * d);
    row.embedding_ratio = grown_cost.embedding_cost / base_cost.embedding_cost;
    row.total_ratio = grown_cost.total / base_cost.total;
    row.growth_bound = scaling_growth_bound(spec.kind);
    row.within_bound = row.embedding_ratio < row.growth_bound;
    report.all_within_bounds = report.all_within_bounds && row.within_bound;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

// Portion index per embedding id: the cache is ordered by rank and split into
// near-equal contiguous chunks, hottest first. -1 marks uncached ids.
std::vector<int> portion_index(const EmbeddingDistribution& dist,
                               std::span<const std::uint32_t> cache_ids, int portions) {
  if (portions < 1) throw ValidationError("portions must be >= 1");
  if (portions > 64) throw ValidationError("at most 64 portions supported");
  if (cache_ids.empty()) throw ValidationError("portion analysis needs a non-empty cache");
  if (static_cast<std::size_t>(portions) > cache_ids.size()) {
    throw ValidationError("more portions than cached embeddings");
  }
  std::vector<std::size_t> ranks;
  ranks.reserve(cache_ids.size());
  for (std::uint32_t id : cache_ids) ranks.push_back(dist.rank_of(id));
  std::sort(ranks.begin(), ranks.end());

  std::vector<int> index(dist.size(), -1);
  const std::size_t k = ranks.size();
  const std::size_t base = k / static_cast<std::size_t>(portions);
  const std::size_t extra = k % static_cast<std::size_t>(portions);
  std::size_t pos = 0;
  for (int p = 0; p < portions; ++p) {
    const std::size_t len = base + (static_cast<std::size_t>(p) < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i, ++pos) {
      index[dist.id_at_rank(ranks[pos])] = p;
    }
  }
  return index;
}

}  // namespace

std::vector<double> portion_usage(const EmbeddingDistribution& dist,
                                  std::span<const std::uint32_t> cache_ids,
                                  int portions, std::int64_t batch_size,
                                  std::int64_t lookups_per_sample, std::int64_t trials,
                                  std::uint64_t seed) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (lookups_per_sample < 1) throw ValidationError("lookups per sample must be >= 1");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  const std::vector<int> index = portion_index(dist, cache_ids, portions);
  const DiscreteSampler sampler(dist);

  std::vector<double> sums(static_cast<std::size_t>(portions), 0.0);
  for (std::int64_t t = 0; t < trials; ++t) {
    SplitMix64 rng(substream_seed(seed, static_cast<std::uint64_t>(t)));
    for (std::int64_t s = 0; s < batch_size; ++s) {
      std::uint64_t touched = 0;
      for (std::int64_t f = 0; f < lookups_per_sample; ++f) {
        const int p = index[sampler.draw(rng)];
        if (p >= 0) touched |= std::uint64_t{1} << p;
      }
      while (touched != 0) {
        const int p = std::countr_zero(touched);
        sums[static_cast<std::size_t>(p)] += 1.0;
        touched &= touched - 1;
      }
    }
  }
  for (double& v : sums) v /= static_cast<double>(trials);
  return sums;
}

std::vector<double> portion_usage(const Trace& trace,
                                  std::span<const std::uint32_t> cache_ids,
                                  int portions, std::int64_t batch_size) {
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  const SkewTable table = build_skew_table(trace);
  const EmbeddingDistribution dist = estimate_distribution(table, trace.vocab_size);
  const std::vector<int> index = portion_index(dist, cache_ids, portions);

  const std::size_t n = trace.num_samples();
  const auto b = static_cast<std::size_t>(batch_size);
  const std::size_t full_batches = n / b;
  if (full_batches == 0) {
    throw ValidationError("trace shorter than one batch of " +
                          std::to_string(batch_size));
  }

  std::vector<double> sums(static_cast<std::size_t>(portions), 0.0);
  for (std::size_t batch = 0; batch < full_batches; ++batch) {
    for (std::size_t s = batch * b; s < (batch + 1) * b; ++s) {
      std::uint64_t touched = 0;
      for (const std::uint32_t id : trace.sample(s)) {
        const int p = index[id];
        if (p >= 0) touched |= std::uint64_t{1} << p;
      }
      while (touched != 0) {
        const int p = std::countr_zero(touched);
        sums[static_cast<std::size_t>(p)] += 1.0;
        touched &= touched - 1;
      }
    }
  }
  for (double& v : sums) v /= static_cast<double>(full_batches);
  return sums;
}

}  // namespace embcomm
