#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "embcomm/error.hpp"
#include "manifest.hpp"

namespace {

using namespace embcomm::cli;

// CLI11 binds to plain members; optionals are resolved from presence flags
// after parsing.
template <typename T>
std::optional<T> if_set(const CLI::Option* opt, const T& value) {
  return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embcomm: communication-cost models, cache planning and simulation "
               "for embedding-table lookups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("embcomm ") + kToolVersion);

  // gen-dist
  auto* gen_dist = app.add_subcommand("gen-dist", "Write a distribution spec JSON");
  std::string gd_kind;
  std::uint64_t gd_size = 0;
  double gd_shape = 0.0;
  std::string gd_out;
  gen_dist->add_option("--kind", gd_kind, "zipf | exponential | half_normal")->required();
  gen_dist->add_option("--size", gd_size, "vocabulary size E")->required();
  auto* gd_shape_opt =
      gen_dist->add_option("--shape", gd_shape, "shape parameter (per-kind default)");
  gen_dist->add_option("--out", gd_out, "output path")->required();

  // gen-trace
  auto* gen_trace = app.add_subcommand("gen-trace", "Sample a lookup trace from a distribution");
  std::string gt_dist, gt_out;
  std::int64_t gt_samples = 0, gt_lookups = 1;
  std::uint64_t gt_seed = 0;
  gen_trace->add_option("--dist", gt_dist, "distribution spec JSON")->required();
  gen_trace->add_option("--samples", gt_samples, "number of samples Q")->required();
  gen_trace->add_option("--lookups", gt_lookups, "lookups per sample d")->required();
  gen_trace->add_option("--seed", gt_seed, "RNG seed (required; no implicit default)")
      ->required();
  gen_trace->add_option("--out", gt_out, "output trace path")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Closed-form epoch cost report");
  std::string an_dist, an_trace, an_out;
  std::int64_t an_samples = 0, an_lookups = 0, an_batch = 0;
  auto* an_dist_opt = analyze->add_option("--dist", an_dist, "distribution spec JSON");
  auto* an_trace_opt = analyze->add_option("--trace", an_trace, "trace file");
  an_dist_opt->excludes(an_trace_opt);
  auto* an_samples_opt = analyze->add_option("--samples", an_samples, "samples Q (with --dist)");
  auto* an_lookups_opt = analyze->add_option("--lookups", an_lookups, "lookups d (with --dist)");
  analyze->add_option("--batch-size", an_batch, "batch size b")->required();
  auto* an_out_opt = analyze->add_option("--out", an_out, "report path (stdout if absent)");

  // plan
  auto* plan = app.add_subcommand("plan", "Choose cache and batch size under a memory budget");
  std::string pl_dist, pl_trace, pl_out;
  std::int64_t pl_memory = 0, pl_activation = 0, pl_embed = 0, pl_samples = 0, pl_lookups = 0;
  double pl_eta = 1.0;
  bool pl_exhaustive = false;
  auto* pl_dist_opt = plan->add_option("--dist", pl_dist, "distribution spec JSON");
  auto* pl_trace_opt = plan->add_option("--trace", pl_trace, "trace file");
  pl_dist_opt->excludes(pl_trace_opt);
  plan->add_option("--memory", pl_memory, "device parameter budget M")->required();
  plan->add_option("--activation", pl_activation, "activation params per sample a")->required();
  plan->add_option("--embed-params", pl_embed, "params per cached embedding")->required();
  auto* pl_samples_opt = plan->add_option("--samples", pl_samples, "samples Q (with --dist)");
  auto* pl_lookups_opt = plan->add_option("--lookups", pl_lookups, "lookups d (with --dist)");
  plan->add_option("--eta", pl_eta, "usable-memory fraction (default 1.0)");
  plan->add_flag("--exhaustive", pl_exhaustive, "scan every cache size instead of searching");
  auto* pl_out_opt = plan->add_option("--out", pl_out, "plan path (stdout if absent)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of a cache plan");
  std::string si_plan, si_dist, si_trace, si_out, si_csv;
  std::int64_t si_epochs = 20;
  std::uint64_t si_seed = 0;
  simulate->add_option("--plan", si_plan, "plan JSON from the plan command")->required();
  auto* si_dist_opt = simulate->add_option("--dist", si_dist, "distribution spec JSON");
  auto* si_trace_opt = simulate->add_option("--trace", si_trace, "trace file");
  si_dist_opt->excludes(si_trace_opt);
  simulate->add_option("--epochs", si_epochs, "epochs to simulate (default 20)");
  simulate->add_option("--seed", si_seed, "RNG seed (required; no implicit default)")
      ->required();
  auto* si_out_opt = simulate->add_option("--out", si_out, "report path (stdout if absent)");
  auto* si_csv_opt = simulate->add_option("--csv", si_csv, "flat CSV row for plotting");

  // scale-study
  auto* scale = app.add_subcommand("scale-study", "Cost growth when vocabulary and batch scale");
  std::string sc_kinds = "zipf,exponential,half_normal", sc_out, sc_csv;
  std::int64_t sc_factor = 5, sc_base_size = 1000, sc_batch = 256, sc_lookups = 4;
  double sc_zipf = 0.0, sc_exp = 0.0, sc_hn = 0.0;
  scale->add_option("--kinds", sc_kinds, "comma list of parametric kinds");
  scale->add_option("--factor", sc_factor, "growth factor (default 5)");
  scale->add_option("--base-size", sc_base_size, "base vocabulary size");
  scale->add_option("--batch-size", sc_batch, "base batch size");
  scale->add_option("--lookups", sc_lookups, "lookups per sample");
  auto* sc_zipf_opt = scale->add_option("--zipf-s", sc_zipf, "zipf exponent override");
  auto* sc_exp_opt = scale->add_option("--exp-lambda", sc_exp, "exponential rate override");
  auto* sc_hn_opt = scale->add_option("--hn-sigma", sc_hn, "half-normal sigma override");
  auto* sc_out_opt = scale->add_option("--out", sc_out, "report path (stdout if absent)");
  auto* sc_csv_opt = scale->add_option("--csv", sc_csv, "ratio table CSV");

  // schedule
  auto* schedule = app.add_subcommand("schedule", "Hot/normal mini-batch schedule for a trace");
  std::string sd_trace, sd_out, sd_csv;
  std::int64_t sd_cache = 0, sd_batch = 0;
  schedule->add_option("--trace", sd_trace, "trace file")->required();
  schedule->add_option("--cache-size", sd_cache, "number of hottest ids to cache")->required();
  schedule->add_option("--batch-size", sd_batch, "batch size b")->required();
  auto* sd_out_opt = schedule->add_option("--out", sd_out, "report path (stdout if absent)");
  auto* sd_csv_opt = schedule->add_option("--csv", sd_csv, "full batch assignment CSV");

  // rerun
  auto* rerun = app.add_subcommand("rerun", "Re-execute a run from an embedded manifest");
  std::string rr_manifest, rr_out, rr_csv;
  rerun->add_option("--manifest", rr_manifest, "report, sidecar, or bare manifest JSON")
      ->required();
  rerun->add_option("--out", rr_out, "where to write the reproduced output")->required();
  auto* rr_csv_opt = rerun->add_option("--csv", rr_csv, "where to write a reproduced CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_dist->parsed()) {
      GenDistArgs args;
      args.kind = gd_kind;
      args.size = gd_size;
      args.shape = if_set(gd_shape_opt, gd_shape);
      args.out = gd_out;
      run_gen_dist(args);
    } else if (gen_trace->parsed()) {
      GenTraceArgs args;
      args.dist = gt_dist;
      args.samples = gt_samples;
      args.lookups = gt_lookups;
      args.seed = gt_seed;
      args.out = gt_out;
      run_gen_trace(args);
    } else if (analyze->parsed()) {
      AnalyzeArgs args;
      args.dist = if_set(an_dist_opt, an_dist);
      args.trace = if_set(an_trace_opt, an_trace);
      args.samples = if_set(an_samples_opt, an_samples);
      args.lookups = if_set(an_lookups_opt, an_lookups);
      args.batch_size = an_batch;
      args.out = if_set(an_out_opt, an_out);
      run_analyze(args);
    } else if (plan->parsed()) {
      PlanArgs args;
      args.dist = if_set(pl_dist_opt, pl_dist);
      args.trace = if_set(pl_trace_opt, pl_trace);
      args.memory = pl_memory;
      args.activation = pl_activation;
      args.embed_params = pl_embed;
      args.samples = if_set(pl_samples_opt, pl_samples);
      args.lookups = if_set(pl_lookups_opt, pl_lookups);
      args.eta = pl_eta;
      args.exhaustive = pl_exhaustive;
      args.out = if_set(pl_out_opt, pl_out);
      run_plan(args);
    } else if (simulate->parsed()) {
      SimulateArgs args;
      args.plan = si_plan;
      args.dist = if_set(si_dist_opt, si_dist);
      args.trace = if_set(si_trace_opt, si_trace);
      args.epochs = si_epochs;
      args.seed = si_seed;
      args.out = if_set(si_out_opt, si_out);
      args.csv = if_set(si_csv_opt, si_csv);
      run_simulate(args);
    } else if (scale->parsed()) {
      ScaleStudyArgs args;
      args.kinds = sc_kinds;
      args.factor = sc_factor;
      args.base_size = sc_base_size;
      args.batch_size = sc_batch;
      args.lookups = sc_lookups;
      args.zipf_s = if_set(sc_zipf_opt, sc_zipf);
      args.exp_lambda = if_set(sc_exp_opt, sc_exp);
      args.hn_sigma = if_set(sc_hn_opt, sc_hn);
      args.out = if_set(sc_out_opt, sc_out);
      args.csv = if_set(sc_csv_opt, sc_csv);
      run_scale_study(args);
    } else if (schedule->parsed()) {
      ScheduleArgs args;
      args.trace = sd_trace;
      args.cache_size = sd_cache;
      args.batch_size = sd_batch;
      args.out = if_set(sd_out_opt, sd_out);
      args.csv = if_set(sd_csv_opt, sd_csv);
      run_schedule(args);
    } else if (rerun->parsed()) {
      OutputOverride redirect;
      redirect.out = rr_out;
      redirect.csv = if_set(rr_csv_opt, rr_csv);
      run_rerun(rr_manifest, redirect);
    }
  } catch (const embcomm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const embcomm::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
