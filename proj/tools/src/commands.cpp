#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "embcomm/cache_planner.hpp"
#include "embcomm/cost_model.hpp"
#include "embcomm/distribution_spec.hpp"
#include "embcomm/error.hpp"
#include "embcomm/rng.hpp"
#include "embcomm/simulator.hpp"
#include "embcomm/trace.hpp"
#include "json_out.hpp"

namespace embcomm::cli {

namespace {

using nlohmann::ordered_json;

constexpr const char* kIndexUnitsNote =
    "index cost counts one unit per sample, not one per lookup";

void write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw ValidationError("cannot write output file " + *path);
  out << text;
}

ordered_json opt_json(const std::optional<std::string>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}
ordered_json opt_json(const std::optional<std::int64_t>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<std::string> param_opt_string(const ordered_json& params, const char* key) {
  if (!params.contains(key) || params[key].is_null()) return std::nullopt;
  return params[key].get<std::string>();
}
std::optional<std::int64_t> param_opt_int(const ordered_json& params, const char* key) {
  if (!params.contains(key) || params[key].is_null()) return std::nullopt;
  return params[key].get<std::int64_t>();
}
std::optional<double> param_opt_double(const ordered_json& params, const char* key) {
  if (!params.contains(key) || params[key].is_null()) return std::nullopt;
  return params[key].get<double>();
}

template <typename T>
T param_require(const ordered_json& params, const char* key) {
  if (!params.contains(key) || params[key].is_null()) {
    throw ValidationError(std::string("manifest parameters missing \"") + key + "\"");
  }
  return params[key].get<T>();
}

Manifest finish_manifest(const char* command, ordered_json params,
                         std::optional<std::uint64_t> seed, ordered_json digests,
                         const std::optional<Manifest>& reuse) {
  if (reuse) {
    if (reuse->command != command) {
      throw ValidationError("manifest is for command \"" + reuse->command +
                            "\", not \"" + command + "\"");
    }
    if (reuse->input_digests != digests) {
      throw ValidationError("input files changed since the original run "
                            "(digest mismatch); outputs would differ");
    }
    return *reuse;
  }
  Manifest manifest;
  manifest.command = command;
  manifest.parameters = std::move(params);
  manifest.seed = seed;
  manifest.input_digests = std::move(digests);
  manifest.timestamp = now_utc_iso8601();
  return manifest;
}

void emit_report(ordered_json payload, const Manifest& manifest,
                 const std::optional<std::string>& out,
                 const OutputOverride& redirect) {
  payload["manifest"] = manifest_to_json(manifest);
  write_text(redirect.out ? redirect.out : out, payload.dump(2) + "\n");
}

struct ResolvedSource {
  EmbeddingDistribution dist;
  std::optional<Trace> trace;
  std::int64_t samples = 0;
  std::int64_t lookups = 0;
  ordered_json echo;
};

// Exactly one of --dist / --trace. A distribution needs the workload spelled
// out; a trace carries its own sample count and lookup arity.
ResolvedSource load_source(const std::optional<std::string>& dist_path,
                           const std::optional<std::string>& trace_path,
                           const std::optional<std::int64_t>& samples,
                           const std::optional<std::int64_t>& lookups,
                           ordered_json& digests) {
  if (dist_path.has_value() == trace_path.has_value()) {
    throw ValidationError("give exactly one of --dist or --trace");
  }
  if (dist_path) {
    digests["dist"] = file_digest(*dist_path);
    const auto spec = DistributionSpec::load(*dist_path);
    if (!samples) throw ValidationError("--samples is required with --dist");
    if (!lookups) throw ValidationError("--lookups is required with --dist");
    ordered_json echo;
    echo["source"] = "distribution";
    echo["kind"] = to_string(spec.kind);
    echo["size"] = spec.size;
    if (spec.kind != DistributionKind::empirical) echo["shape"] = spec.shape;
    return {materialize(spec), std::nullopt, *samples, *lookups, std::move(echo)};
  }
  if (samples || lookups) {
    throw ValidationError("with --trace the workload comes from the file; "
                          "drop --samples/--lookups");
  }
  digests["trace"] = file_digest(*trace_path);
  Trace trace = load_trace(*trace_path);
  auto dist = estimate_distribution(build_skew_table(trace), trace.vocab_size);
  ordered_json echo;
  echo["source"] = "trace";
  echo["size"] = trace.vocab_size;
  const auto q = static_cast<std::int64_t>(trace.num_samples());
  const auto d = trace.num_features;
  echo["num_samples"] = q;
  echo["lookups_per_sample"] = d;
  return {std::move(dist), std::move(trace), q, d, std::move(echo)};
}

double relative_error(double measured, double analytical) {
  if (analytical == 0.0) return measured == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(measured - analytical) / std::abs(analytical);
}

GenDistArgs gen_dist_from_params(const ordered_json& p) {
  GenDistArgs args;
  args.kind = param_require<std::string>(p, "kind");
  args.size = param_require<std::uint64_t>(p, "size");
  args.shape = param_opt_double(p, "shape");
  args.out = param_require<std::string>(p, "out");
  return args;
}

GenTraceArgs gen_trace_from_params(const ordered_json& p) {
  GenTraceArgs args;
  args.dist = param_require<std::string>(p, "dist");
  args.samples = param_require<std::int64_t>(p, "samples");
  args.lookups = param_require<std::int64_t>(p, "lookups");
  args.seed = param_require<std::uint64_t>(p, "seed");
  args.out = param_require<std::string>(p, "out");
  return args;
}

AnalyzeArgs analyze_from_params(const ordered_json& p) {
  AnalyzeArgs args;
  args.dist = param_opt_string(p, "dist");
  args.trace = param_opt_string(p, "trace");
  args.samples = param_opt_int(p, "samples");
  args.lookups = param_opt_int(p, "lookups");
  args.batch_size = param_require<std::int64_t>(p, "batch_size");
  args.out = param_opt_string(p, "out");
  return args;
}

PlanArgs plan_from_params(const ordered_json& p) {
  PlanArgs args;
  args.dist = param_opt_string(p, "dist");
  args.trace = param_opt_string(p, "trace");
  args.memory = param_require<std::int64_t>(p, "memory");
  args.activation = param_require<std::int64_t>(p, "activation");
  args.embed_params = param_require<std::int64_t>(p, "embed_params");
  args.samples = param_opt_int(p, "samples");
  args.lookups = param_opt_int(p, "lookups");
  args.eta = param_require<double>(p, "eta");
  args.exhaustive = param_require<bool>(p, "exhaustive");
  args.out = param_opt_string(p, "out");
  return args;
}

SimulateArgs simulate_from_params(const ordered_json& p) {
  SimulateArgs args;
  args.plan = param_require<std::string>(p, "plan");
  args.dist = param_opt_string(p, "dist");
  args.trace = param_opt_string(p, "trace");
  args.epochs = param_require<std::int64_t>(p, "epochs");
  args.seed = param_require<std::uint64_t>(p, "seed");
  args.out = param_opt_string(p, "out");
  args.csv = param_opt_string(p, "csv");
  return args;
}

ScaleStudyArgs scale_study_from_params(const ordered_json& p) {
  ScaleStudyArgs args;
  args.kinds = param_require<std::string>(p, "kinds");
  args.factor = param_require<std::int64_t>(p, "factor");
  args.base_size = param_require<std::int64_t>(p, "base_size");
  args.batch_size = param_require<std::int64_t>(p, "batch_size");
  args.lookups = param_require<std::int64_t>(p, "lookups");
  args.zipf_s = param_opt_double(p, "zipf_s");
  args.exp_lambda = param_opt_double(p, "exp_lambda");
  args.hn_sigma = param_opt_double(p, "hn_sigma");
  args.out = param_opt_string(p, "out");
  args.csv = param_opt_string(p, "csv");
  return args;
}

ScheduleArgs schedule_from_params(const ordered_json& p) {
  ScheduleArgs args;
  args.trace = param_require<std::string>(p, "trace");
  args.cache_size = param_require<std::int64_t>(p, "cache_size");
  args.batch_size = param_require<std::int64_t>(p, "batch_size");
  args.out = param_opt_string(p, "out");
  args.csv = param_opt_string(p, "csv");
  return args;
}

}  // namespace

void run_gen_dist(const GenDistArgs& args, const std::optional<Manifest>& reuse,
                  const OutputOverride& redirect) {
  const auto kind = kind_from_string(args.kind);
  if (!kind) throw ValidationError("unknown distribution kind \"" + args.kind + "\"");
  if (*kind == DistributionKind::empirical) {
    throw ValidationError("gen-dist generates parametric kinds; write empirical "
                          "distribution JSON directly");
  }
  const double shape = args.shape ? *args.shape : default_shape(*kind);
  const auto spec =
      DistributionSpec::parametric(*kind, static_cast<std::size_t>(args.size), shape);
  materialize(spec);  // full validation before anything is written

  ordered_json params;
  params["kind"] = to_string(*kind);
  params["size"] = args.size;
  params["shape"] = shape;
  params["out"] = args.out;
  const Manifest manifest = finish_manifest("gen-dist", std::move(params), std::nullopt,
                                            ordered_json::object(), reuse);

  ordered_json doc;
  doc["kind"] = to_string(*kind);
  doc["size"] = args.size;
  doc["shape"] = shape;
  doc["manifest"] = manifest_to_json(manifest);
  write_text(redirect.out ? redirect.out : std::optional<std::string>(args.out),
             doc.dump(2) + "\n");
}

void run_gen_trace(const GenTraceArgs& args, const std::optional<Manifest>& reuse,
                   const OutputOverride& redirect) {
  if (args.samples < 1) throw ValidationError("--samples must be >= 1");
  if (args.lookups < 1) throw ValidationError("--lookups must be >= 1");
  ordered_json digests;
  digests["dist"] = file_digest(args.dist);
  const auto dist = materialize(DistributionSpec::load(args.dist));

  SplitMix64 rng(args.seed);
  Trace trace;
  trace.num_features = args.lookups;
  trace.vocab_size = dist.size();
  trace.ids = sample_batch(dist, args.samples, args.lookups, rng);

  ordered_json params;
  params["dist"] = args.dist;
  params["samples"] = args.samples;
  params["lookups"] = args.lookups;
  params["seed"] = args.seed;
  params["out"] = args.out;
  const Manifest manifest = finish_manifest("gen-trace", std::move(params), args.seed,
                                            std::move(digests), reuse);

  const std::string out_path = redirect.out ? *redirect.out : args.out;
  std::ostringstream text;
  write_trace(text, trace);
  write_text(out_path, text.str());

  // The trace format has no room for metadata, so the manifest rides along in
  // a sidecar file.
  ordered_json side;
  side["manifest"] = manifest_to_json(manifest);
  write_text(out_path + ".manifest.json", side.dump(2) + "\n");
}

void run_analyze(const AnalyzeArgs& args, const std::optional<Manifest>& reuse,
                 const OutputOverride& redirect) {
  ordered_json digests;
  const ResolvedSource src =
      load_source(args.dist, args.trace, args.samples, args.lookups, digests);
  const WorkloadSpec spec(src.samples, args.batch_size, src.lookups);

  const double baseline = baseline_epoch_cost(spec);
  const CostBreakdown coalesced = coalesced_epoch_cost(src.dist, spec);
  const double expected_unique = expected_unique_per_batch(src.dist, spec.batch_size);

  ordered_json params;
  params["dist"] = opt_json(args.dist);
  params["trace"] = opt_json(args.trace);
  params["samples"] = opt_json(args.samples);
  params["lookups"] = opt_json(args.lookups);
  params["batch_size"] = args.batch_size;
  params["out"] = opt_json(args.out);
  const Manifest manifest = finish_manifest("analyze", std::move(params), std::nullopt,
                                            std::move(digests), reuse);

  ordered_json payload;
  payload["report"] = "analyze";
  payload["distribution"] = src.echo;
  ordered_json workload;
  workload["num_samples"] = spec.num_samples;
  workload["batch_size"] = spec.batch_size;
  workload["lookups_per_sample"] = spec.lookups_per_sample;
  payload["workload"] = workload;
  payload["expected_unique_per_batch"] = round12(expected_unique);
  payload["baseline_epoch_cost"] = round12(baseline);
  payload["coalesced_epoch_cost"] = cost_to_json(coalesced);
  payload["savings_ratio"] = round12(baseline / coalesced.total);
  payload["index_units_note"] = kIndexUnitsNote;
  emit_report(std::move(payload), manifest, args.out, redirect);
}

void run_plan(const PlanArgs& args, const std::optional<Manifest>& reuse,
              const OutputOverride& redirect) {
  ordered_json digests;
  const ResolvedSource src =
      load_source(args.dist, args.trace, args.samples, args.lookups, digests);
  const DeviceModel device(args.memory, args.activation, args.embed_params, args.eta);
  const WorkloadSpec spec(src.samples, 1, src.lookups);

  const CachePlan plan = args.exhaustive
                             ? optimal_cache_size_scan(src.dist, device, spec)
                             : optimal_cache_size_search(src.dist, device, spec);
  if (!plan.feasible) {
    throw ValidationError("no feasible batch: the usable memory cannot hold a "
                          "single sample");
  }

  ordered_json params;
  params["dist"] = opt_json(args.dist);
  params["trace"] = opt_json(args.trace);
  params["memory"] = args.memory;
  params["activation"] = args.activation;
  params["embed_params"] = args.embed_params;
  params["samples"] = opt_json(args.samples);
  params["lookups"] = opt_json(args.lookups);
  params["eta"] = args.eta;
  params["exhaustive"] = args.exhaustive;
  params["out"] = opt_json(args.out);
  const Manifest manifest =
      finish_manifest("plan", std::move(params), std::nullopt, std::move(digests), reuse);

  ordered_json payload;
  payload["report"] = "plan";
  ordered_json device_echo;
  device_echo["total_params"] = device.total_params;
  device_echo["activation_params_per_sample"] = device.activation_params_per_sample;
  device_echo["embedding_params"] = device.embedding_params;
  device_echo["memory_efficiency"] = round12(device.memory_efficiency);
  payload["device"] = device_echo;
  ordered_json workload;
  workload["num_samples"] = spec.num_samples;
  workload["lookups_per_sample"] = spec.lookups_per_sample;
  payload["workload"] = workload;
  payload["distribution"] = src.echo;
  payload["feasible"] = plan.feasible;
  payload["cache_size"] = plan.cache_size;
  payload["batch_size"] = plan.batch_size;
  payload["expected_epoch_cost"] = cost_to_json(plan.expected_epoch_cost);
  payload["expected_main_memory_lookups"] =
      round12(plan.expected_epoch_cost.embedding_cost);
  payload["search_mode"] = args.exhaustive ? "scan" : "binary-search";
  payload["used_scan_fallback"] = plan.used_scan_fallback;
  payload["cached_ids"] = plan.cached_ids;
  emit_report(std::move(payload), manifest, args.out, redirect);
}

void run_simulate(const SimulateArgs& args, const std::optional<Manifest>& reuse,
                  const OutputOverride& redirect) {
  if (args.epochs < 1) throw ValidationError("--epochs must be >= 1");
  if (args.dist.has_value() == args.trace.has_value()) {
    throw ValidationError("give exactly one of --dist or --trace");
  }
  ordered_json digests;
  digests["plan"] = file_digest(args.plan);

  ordered_json plan_doc;
  {
    std::ifstream in(args.plan);
    if (!in) throw ValidationError("cannot open plan file " + args.plan);
    try {
      plan_doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("invalid plan JSON: ") + e.what());
    }
  }
  if (!plan_doc.contains("batch_size") || !plan_doc.contains("cached_ids") ||
      !plan_doc.contains("workload")) {
    throw ValidationError("plan JSON needs batch_size, cached_ids and workload");
  }
  const auto batch_size = plan_doc["batch_size"].get<std::int64_t>();
  const auto cache_ids = plan_doc["cached_ids"].get<std::vector<std::uint32_t>>();
  const auto q = plan_doc["workload"]["num_samples"].get<std::int64_t>();
  const auto d = plan_doc["workload"]["lookups_per_sample"].get<std::int64_t>();
  const WorkloadSpec spec(q, batch_size, d);

  std::optional<Trace> trace;
  EmbeddingDistribution dist = [&] {
    if (args.dist) {
      digests["dist"] = file_digest(*args.dist);
      return materialize(DistributionSpec::load(*args.dist));
    }
    digests["trace"] = file_digest(*args.trace);
    trace = load_trace(*args.trace);
    if (trace->num_features != d ||
        static_cast<std::int64_t>(trace->num_samples()) != q) {
      throw ValidationError("trace does not match the plan's workload (samples or "
                            "lookups differ)");
    }
    return estimate_distribution(build_skew_table(*trace), trace->vocab_size);
  }();

  const SimResult result =
      trace ? simulate_epoch(*trace, batch_size, cache_ids)
            : simulate_epoch(dist, spec, cache_ids, args.epochs, args.seed);
  const CostBreakdown analytical = cached_epoch_cost(dist, spec, cache_ids);

  ordered_json params;
  params["plan"] = args.plan;
  params["dist"] = opt_json(args.dist);
  params["trace"] = opt_json(args.trace);
  params["epochs"] = args.epochs;
  params["seed"] = args.seed;
  params["out"] = opt_json(args.out);
  params["csv"] = opt_json(args.csv);
  const Manifest manifest = finish_manifest("simulate", std::move(params), args.seed,
                                            std::move(digests), reuse);

  ordered_json payload;
  payload["report"] = "simulate";
  payload["rng"] = kRngAlgorithm;
  payload["seed"] = args.seed;
  payload["epochs"] = args.epochs;
  payload["source"] = args.dist ? "distribution" : "trace";
  ordered_json workload;
  workload["num_samples"] = q;
  workload["batch_size"] = batch_size;
  workload["lookups_per_sample"] = d;
  payload["workload"] = workload;
  payload["cache_size"] = cache_ids.size();
  payload["measured_epoch_cost"] = cost_to_json(result.measured_epoch_cost);
  ordered_json uniq;
  uniq["mean"] = round12(result.unique_per_batch.mean);
  uniq["std_error"] = round12(result.unique_per_batch.std_error);
  payload["unique_per_batch"] = uniq;
  ordered_json nc;
  nc["mean"] = round12(result.non_cached_unique.mean);
  nc["std_error"] = round12(result.non_cached_unique.std_error);
  payload["non_cached_unique"] = nc;
  payload["hot_batch_fraction"] = round12(result.hot_batch_fraction);
  payload["analytical_epoch_cost"] = cost_to_json(analytical);
  ordered_json agreement;
  agreement["analytical_total"] = round12(analytical.total);
  agreement["measured_total"] = round12(result.measured_epoch_cost.total);
  agreement["relative_error"] =
      round12(relative_error(result.measured_epoch_cost.total, analytical.total));
  agreement["analytical_embedding"] = round12(analytical.embedding_cost);
  agreement["measured_embedding"] = round12(result.measured_epoch_cost.embedding_cost);
  agreement["embedding_relative_error"] = round12(relative_error(
      result.measured_epoch_cost.embedding_cost, analytical.embedding_cost));
  payload["agreement"] = agreement;

  if (args.csv || redirect.csv) {
    std::ostringstream csv;
    csv << "measured_total,measured_embedding,analytical_total,analytical_embedding,"
           "relative_error,unique_mean,unique_std_error,non_cached_mean,"
           "non_cached_std_error,hot_batch_fraction\n";
    csv << csv_number(result.measured_epoch_cost.total) << ','
        << csv_number(result.measured_epoch_cost.embedding_cost) << ','
        << csv_number(analytical.total) << ','
        << csv_number(analytical.embedding_cost) << ','
        << csv_number(relative_error(result.measured_epoch_cost.total, analytical.total))
        << ',' << csv_number(result.unique_per_batch.mean) << ','
        << csv_number(result.unique_per_batch.std_error) << ','
        << csv_number(result.non_cached_unique.mean) << ','
        << csv_number(result.non_cached_unique.std_error) << ','
        << csv_number(result.hot_batch_fraction) << '\n';
    write_text(redirect.csv ? redirect.csv : args.csv, csv.str());
  }
  emit_report(std::move(payload), manifest, args.out, redirect);
}

void run_scale_study(const ScaleStudyArgs& args, const std::optional<Manifest>& reuse,
                     const OutputOverride& redirect) {
  std::vector<DistributionSpec> specs;
  std::stringstream kinds(args.kinds);
  std::string token;
  while (std::getline(kinds, token, ',')) {
    const auto kind = kind_from_string(token);
    if (!kind || *kind == DistributionKind::empirical) {
      throw ValidationError("scale-study kinds must be parametric, got \"" + token + "\"");
    }
    double shape = default_shape(*kind);
    if (*kind == DistributionKind::zipf && args.zipf_s) shape = *args.zipf_s;
    if (*kind == DistributionKind::exponential && args.exp_lambda) shape = *args.exp_lambda;
    if (*kind == DistributionKind::half_normal && args.hn_sigma) shape = *args.hn_sigma;
    specs.push_back(DistributionSpec::parametric(
        *kind, static_cast<std::size_t>(args.base_size), shape));
  }
  if (specs.empty()) throw ValidationError("no kinds given");

  const ScalingReport report =
      scaling_study(specs, args.batch_size, args.lookups, args.factor);

  ordered_json params;
  params["kinds"] = args.kinds;
  params["factor"] = args.factor;
  params["base_size"] = args.base_size;
  params["batch_size"] = args.batch_size;
  params["lookups"] = args.lookups;
  params["zipf_s"] = args.zipf_s ? ordered_json(*args.zipf_s) : ordered_json(nullptr);
  params["exp_lambda"] =
      args.exp_lambda ? ordered_json(*args.exp_lambda) : ordered_json(nullptr);
  params["hn_sigma"] = args.hn_sigma ? ordered_json(*args.hn_sigma) : ordered_json(nullptr);
  params["out"] = opt_json(args.out);
  params["csv"] = opt_json(args.csv);
  const Manifest manifest = finish_manifest("scale-study", std::move(params),
                                            std::nullopt, ordered_json::object(), reuse);

  ordered_json payload;
  payload["report"] = "scale-study";
  payload["factor"] = report.factor;
  payload["base_size"] = args.base_size;
  payload["base_batch"] = report.base_batch;
  payload["lookups_per_sample"] = report.lookups_per_sample;
  payload["calibration_note"] = report.calibration_note;
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["kind"] = to_string(row.kind);
    r["shape"] = round12(row.shape);
    r["base_size"] = row.base_size;
    r["scaled_size"] = row.scaled_size;
    r["base_batch"] = row.base_batch;
    r["scaled_batch"] = row.scaled_batch;
    r["baseline_ratio"] = round12(row.baseline_ratio);
    r["embedding_ratio"] = round12(row.embedding_ratio);
    r["total_ratio"] = round12(row.total_ratio);
    r["growth_bound"] = round12(row.growth_bound);
    r["within_bound"] = row.within_bound;
    rows.push_back(std::move(r));
  }
  payload["rows"] = rows;
  payload["all_within_bounds"] = report.all_within_bounds;

  if (args.csv || redirect.csv) {
    std::ostringstream csv;
    csv << "kind,shape,base_size,scaled_size,base_batch,scaled_batch,baseline_ratio,"
           "embedding_ratio,total_ratio,growth_bound,within_bound\n";
    for (const auto& row : report.rows) {
      csv << to_string(row.kind) << ',' << csv_number(row.shape) << ',' << row.base_size
          << ',' << row.scaled_size << ',' << row.base_batch << ',' << row.scaled_batch
          << ',' << csv_number(row.baseline_ratio) << ','
          << csv_number(row.embedding_ratio) << ',' << csv_number(row.total_ratio) << ','
          << csv_number(row.growth_bound) << ','
          << (row.within_bound ? "true" : "false") << '\n';
    }
    write_text(redirect.csv ? redirect.csv : args.csv, csv.str());
  }
  emit_report(std::move(payload), manifest, args.out, redirect);
}

void run_schedule(const ScheduleArgs& args, const std::optional<Manifest>& reuse,
                  const OutputOverride& redirect) {
  if (args.cache_size < 0) throw ValidationError("--cache-size must be >= 0");
  if (args.batch_size < 1) throw ValidationError("--batch-size must be >= 1");
  ordered_json digests;
  digests["trace"] = file_digest(args.trace);
  const Trace trace = load_trace(args.trace);
  if (static_cast<std::size_t>(args.cache_size) > trace.vocab_size) {
    throw ValidationError("--cache-size exceeds the vocabulary");
  }

  std::vector<std::uint32_t> cache;
  if (args.cache_size > 0) {
    const auto dist = estimate_distribution(build_skew_table(trace), trace.vocab_size);
    cache = dist.top_ids(static_cast<std::size_t>(args.cache_size));
  }
  const BatchSchedule schedule = build_schedule(trace, cache, args.batch_size);

  std::size_t hot_samples = 0;
  for (const auto& batch : schedule.hot_batches) hot_samples += batch.size();
  std::size_t normal_samples = 0;
  for (const auto& batch : schedule.normal_batches) normal_samples += batch.size();
  const std::size_t total_batches =
      schedule.hot_batches.size() + schedule.normal_batches.size();

  ordered_json params;
  params["trace"] = args.trace;
  params["cache_size"] = args.cache_size;
  params["batch_size"] = args.batch_size;
  params["out"] = opt_json(args.out);
  params["csv"] = opt_json(args.csv);
  const Manifest manifest = finish_manifest("schedule", std::move(params), std::nullopt,
                                            std::move(digests), reuse);

  ordered_json payload;
  payload["report"] = "schedule";
  payload["num_samples"] = trace.num_samples();
  payload["lookups_per_sample"] = trace.num_features;
  payload["vocab_size"] = trace.vocab_size;
  payload["batch_size"] = args.batch_size;
  payload["cache_size"] = args.cache_size;
  payload["cached_ids"] = cache;
  payload["hot_samples"] = hot_samples;
  payload["normal_samples"] = normal_samples;
  payload["hot_sample_fraction"] =
      round12(static_cast<double>(hot_samples) / static_cast<double>(trace.num_samples()));
  payload["hot_batches"] = schedule.hot_batches.size();
  payload["normal_batches"] = schedule.normal_batches.size();
  payload["hot_batch_fraction"] = round12(
      total_batches > 0
          ? static_cast<double>(schedule.hot_batches.size()) / static_cast<double>(total_batches)
          : 0.0);

  if (args.csv || redirect.csv) {
    std::ostringstream csv;
    csv << "batch_kind,batch_index,sample_index\n";
    for (std::size_t i = 0; i < schedule.hot_batches.size(); ++i) {
      for (const auto s : schedule.hot_batches[i]) {
        csv << "hot," << i << ',' << s << '\n';
      }
    }
    for (std::size_t i = 0; i < schedule.normal_batches.size(); ++i) {
      for (const auto s : schedule.normal_batches[i]) {
        csv << "normal," << i << ',' << s << '\n';
      }
    }
    write_text(redirect.csv ? redirect.csv : args.csv, csv.str());
  }
  emit_report(std::move(payload), manifest, args.out, redirect);
}

void run_rerun(const std::string& manifest_path, const OutputOverride& redirect) {
  ordered_json doc;
  {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("cannot open manifest file " + manifest_path);
    try {
      doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("invalid manifest JSON: ") + e.what());
    }
  }
  ordered_json manifest_doc;
  if (doc.is_object() && doc.contains("command") && doc.contains("parameters")) {
    manifest_doc = doc;
  } else if (doc.is_object() && doc.contains("manifest")) {
    manifest_doc = doc["manifest"];
  } else {
    throw ValidationError("no manifest found in " + manifest_path);
  }
  const Manifest manifest = manifest_from_json(manifest_doc);
  const auto& p = manifest.parameters;

  if (manifest.command == "gen-dist") {
    run_gen_dist(gen_dist_from_params(p), manifest, redirect);
  } else if (manifest.command == "gen-trace") {
    run_gen_trace(gen_trace_from_params(p), manifest, redirect);
  } else if (manifest.command == "analyze") {
    run_analyze(analyze_from_params(p), manifest, redirect);
  } else if (manifest.command == "plan") {
    run_plan(plan_from_params(p), manifest, redirect);
  } else if (manifest.command == "simulate") {
    run_simulate(simulate_from_params(p), manifest, redirect);
  } else if (manifest.command == "scale-study") {
    run_scale_study(scale_study_from_params(p), manifest, redirect);
  } else if (manifest.command == "schedule") {
    run_schedule(schedule_from_params(p), manifest, redirect);
  } else {
    throw ValidationError("manifest names unknown command \"" + manifest.command + "\"");
  }
}

}  // namespace embcomm::cli
