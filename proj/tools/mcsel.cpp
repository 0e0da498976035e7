// Command line for the crowdsourcing worker-selection simulator.
//
//   mcsel run    -- run a policy x instance grid and write traces + summary
//   mcsel bounds -- print the analytical guarantee values for given inputs
//
// `run` reads an optional key=value spec file; flags override file values and
// the MCSEL_OUT_DIR environment variable overrides the output directory.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcsel/bounds.hpp"
#include "mcsel/experiment.hpp"

namespace {

struct RunFlags {
  std::string spec_file;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void print_bounds_row(long T, const mcsel::bounds::BoundInputs& inputs, double factor) {
  mcsel::bounds::BoundInputs in = inputs;
  in.horizon = T;
  const auto regret = mcsel::bounds::regret_bound(in);
  const int dims = in.dims.front();
  std::printf("%10ld  %14.6g  %14.6g  %14.6g  %14.6g\n", T, regret.total,
              mcsel::bounds::assessment_bound(T, in.alpha, dims),
              mcsel::bounds::assessment_bound_scaled(T, in.alpha, dims, factor),
              mcsel::bounds::storage_bound(T, in.alpha, dims));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdsourcing worker-selection simulator"};
  app.require_subcommand(1);

  // --- run -------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run an experiment grid");
  std::string spec_file;
  run->add_option("--spec", spec_file, "key=value experiment spec file");
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_override = [&](const std::string& key) {
    return [&overrides, key](const std::string& value) { overrides.emplace_back(key, value); };
  };
  for (const char* key :
       {"workers", "tasks", "availability", "availability_sweep", "instances", "seed", "out_dir",
        "policies", "model", "source", "checkin_file", "apply_bbox", "exploration_factor",
        "lambda_linucb", "lambda_auer", "epsilon", "alpha", "threads", "truth_bins",
        "location_weights", "price_low", "price_high", "price_split", "budget_mean", "budget_sd",
        "budget_min", "budget_max", "q_min", "q_max", "bbox_lat_lo", "bbox_lat_hi", "bbox_lon_lo",
        "bbox_lon_hi"}) {
    std::string flag = "--" + std::string(key);
    for (auto& c : flag)
      if (c == '_') c = '-';
    run->add_option_function<std::string>(flag, add_override(key), key);
  }

  // --- bounds ----------------------------------------------------------------
  auto* bounds_cmd = app.add_subcommand("bounds", "evaluate the analytical guarantees");
  mcsel::bounds::BoundInputs inputs;
  inputs.dims = {3};
  double factor = 0.003;
  bool sweep_decades = false;
  bounds_cmd->add_option("--tasks", inputs.horizon, "horizon T")->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--workers", inputs.workers, "worker count W");
  bounds_cmd->add_option("--alpha", inputs.alpha, "smoothness exponent (default 1; modeling input)");
  bounds_cmd->add_option("--hoelder", inputs.hoelder_constant,
                         "smoothness constant L (default 5; modeling input)");
  bounds_cmd->add_option("--qmax", inputs.q_max, "maximum quality");
  int dims = 3;
  bounds_cmd->add_option("--dims", dims, "joint context dimension per worker");
  bounds_cmd->add_option("--factor", factor, "exploration factor for the scaled assessment bound");
  bounds_cmd->add_flag("--sweep-decades", sweep_decades, "print rows for T, T*10, T*100");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      mcsel::ExperimentSpec spec =
          spec_file.empty() ? mcsel::ExperimentSpec{} : mcsel::parse_spec_file(spec_file);
      for (const auto& [key, value] : overrides) mcsel::apply_config_key(spec, key, value);
      if (const char* dir = std::getenv("MCSEL_OUT_DIR"); dir != nullptr && *dir != '\0')
        spec.output_dir = dir;

      const mcsel::ExperimentResult result = mcsel::run_experiment(spec);
      for (const auto& sweep : result.sweeps) {
        std::printf("availability %.2f\n", sweep.availability);
        const mcsel::PolicyAggregate* hcl = nullptr;
        for (const auto& agg : sweep.policies)
          if (agg.policy == mcsel::PolicyKind::Hcl) hcl = &agg;
        for (const auto& agg : sweep.policies) {
          std::printf("  %-10s  cumulative %12.2f   final avg %7.4f   regret %12.2f",
                      mcsel::to_string(agg.policy), agg.cumulative_performance_mean,
                      agg.final_average_performance_mean, agg.expected_regret_mean);
          if (hcl != nullptr && hcl->cumulative_performance_mean > 0.0)
            std::printf("   ratio %.4f",
                        agg.cumulative_performance_mean / hcl->cumulative_performance_mean);
          std::printf("\n");
        }
      }
      std::printf("outputs written to %s\n", spec.output_dir.c_str());
      return 0;
    }

    inputs.dims = {dims};
    mcsel::bounds::validate(inputs);
    std::printf("%10s  %14s  %14s  %14s  %14s\n", "T", "regret", "assessments",
                "assessments(f)", "storage");
    print_bounds_row(inputs.horizon, inputs, factor);
    if (sweep_decades) {
      print_bounds_row(inputs.horizon * 10, inputs, factor);
      print_bounds_row(inputs.horizon * 100, inputs, factor);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
