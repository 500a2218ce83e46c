#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "manifest.hpp"

namespace embcomm::cli {

struct GenDistArgs {
  std::string kind;
  std::uint64_t size = 0;
  std::optional<double> shape;  // per-kind default when absent
  std::string out;
};

struct GenTraceArgs {
  std::string dist;
  std::int64_t samples = 0;
  std::int64_t lookups = 1;
  std::uint64_t seed = 0;
  std::string out;
};

struct AnalyzeArgs {
  std::optional<std::string> dist;
  std::optional<std::string> trace;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> lookups;
  std::int64_t batch_size = 0;
  std::optional<std::string> out;
};

struct PlanArgs {
  std::optional<std::string> dist;
  std::optional<std::string> trace;
  std::int64_t memory = 0;
  std::int64_t activation = 0;
  std::int64_t embed_params = 0;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> lookups;
  double eta = 1.0;
  bool exhaustive = false;
  std::optional<std::string> out;
};

struct SimulateArgs {
  std::string plan;
  std::optional<std::string> dist;
  std::optional<std::string> trace;
  std::int64_t epochs = 20;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::optional<std::string> csv;
};

struct ScaleStudyArgs {
  std::string kinds = "zipf,exponential,half_normal";
  std::int64_t factor = 5;
  std::int64_t base_size = 1000;
  std::int64_t batch_size = 256;
  std::int64_t lookups = 4;
  std::optional<double> zipf_s;
  std::optional<double> exp_lambda;
  std::optional<double> hn_sigma;
  std::optional<std::string> out;
  std::optional<std::string> csv;
};

struct ScheduleArgs {
  std::string trace;
  std::int64_t cache_size = 0;
  std::int64_t batch_size = 0;
  std::optional<std::string> out;
  std::optional<std::string> csv;
};

// Where rerun redirects output without touching the recorded parameters.
struct OutputOverride {
  std::optional<std::string> out;
  std::optional<std::string> csv;
};

void run_gen_dist(const GenDistArgs& args, const std::optional<Manifest>& reuse = {},
                  const OutputOverride& redirect = {});
void run_gen_trace(const GenTraceArgs& args, const std::optional<Manifest>& reuse = {},
                   const OutputOverride& redirect = {});
void run_analyze(const AnalyzeArgs& args, const std::optional<Manifest>& reuse = {},
                 const OutputOverride& redirect = {});
void run_plan(const PlanArgs& args, const std::optional<Manifest>& reuse = {},
              const OutputOverride& redirect = {});
void run_simulate(const SimulateArgs& args, const std::optional<Manifest>& reuse = {},
                  const OutputOverride& redirect = {});
void run_scale_study(const ScaleStudyArgs& args, const std::optional<Manifest>& reuse = {},
                     const OutputOverride& redirect = {});
void run_schedule(const ScheduleArgs& args, const std::optional<Manifest>& reuse = {},
                  const OutputOverride& redirect = {});

// Re-executes the command recorded in a manifest (taken from a report's
// "manifest" key, a sidecar file, or a bare manifest object) and writes the
// byte-identical output to the redirect target.
void run_rerun(const std::string& manifest_path, const OutputOverride& redirect);

}  // namespace embcomm::cli
