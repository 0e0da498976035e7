#pragma once

// Experiment orchestration: run a (availability, policy, instance) grid, write
// one trace CSV per instance plus a JSON summary with per-policy aggregates and
// the cumulative-performance ratio table.
//
// Seed scheme (stable across platforms):
//   environment seed = hash(master, "env",    bits(rho), instance)
//   policy seed      = hash(master, "policy", bits(rho), policy_tag, instance)
// The environment seed does not depend on the policy, so all policies of one
// instance share the same world.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mcsel/sim.hpp"

namespace mcsel {

struct ExperimentSpec {
  EnvConfig env;
  PolicyParams params;
  std::vector<PolicyKind> policies{std::begin(kAllPolicies), std::end(kAllPolicies)};
  int instances = 10;
  std::uint64_t master_seed = 1;
  std::vector<double> availability_sweep;  // empty: just env.availability
  std::string output_dir = "out";
  int threads = 0;  // 0: hardware concurrency
};

inline Seeds derive_seeds(std::uint64_t master, double rho, PolicyKind kind, int instance) {
  Seeds seeds;
  seeds.environment = derive_seed(
      master, {stream_tag("env"), seed_part(rho), static_cast<std::uint64_t>(instance)});
  seeds.policy = derive_seed(master, {stream_tag("policy"), seed_part(rho),
                                      stream_tag(to_string(kind)),
                                      static_cast<std::uint64_t>(instance)});
  return seeds;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string rho_label(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", rho);
  return buf;
}

}  // namespace detail

inline std::string trace_csv(const RunTrace& trace) {
  std::string out = "t,phase,W_t,m_t,perf_sum,theta_sum,oracle_theta_sum,comm,assessments\n";
  for (const auto& row : trace.tasks) {
    double perf = 0.0;
    for (double p : row.observed) perf += p;
    out += std::to_string(row.t);
    out += ',';
    out += to_string(row.phase);
    out += ',';
    out += std::to_string(row.available_count());
    out += ',';
    out += std::to_string(row.quota);
    out += ',';
    out += detail::format_double(perf);
    out += ',';
    out += detail::format_double(row.selected_theta_sum);
    out += ',';
    out += detail::format_double(row.oracle_theta_sum);
    out += ',';
    out += std::to_string(row.comm);
    out += ',';
    out += std::to_string(row.assessments);
    out += '\n';
  }
  return out;
}

struct InstanceSummary {
  double cumulative_performance = 0.0;
  double expected_regret = 0.0;
  double final_average_performance = 0.0;
};

struct PolicyAggregate {
  PolicyKind policy = PolicyKind::Random;
  std::vector<InstanceSummary> instances;
  double cumulative_performance_mean = 0.0;
  double expected_regret_mean = 0.0;
  double final_average_performance_mean = 0.0;
};

struct SweepResult {
  double availability = 0.0;
  std::vector<PolicyAggregate> policies;

  const PolicyAggregate& aggregate(PolicyKind kind) const {
    for (const auto& p : policies)
      if (p.policy == kind) return p;
    throw std::out_of_range("no aggregate for policy");
  }
};

struct ExperimentResult {
  std::vector<SweepResult> sweeps;
};

inline void validate(const ExperimentSpec& spec) {
  validate(spec.env);
  validate(spec.params);
  if (spec.policies.empty()) throw std::invalid_argument("ExperimentSpec: no policies");
  if (spec.instances < 1) throw std::invalid_argument("ExperimentSpec: instances must be >= 1");
  for (double rho : spec.availability_sweep)
    if (!(rho > 0.0) || rho > 1.0)
      throw std::invalid_argument("ExperimentSpec: sweep availability must be in (0,1]");
  if (spec.output_dir.empty()) throw std::invalid_argument("ExperimentSpec: output_dir empty");
}

// Runs the grid (in parallel over instances), writes per-instance CSVs and the
// summary JSON, and returns the aggregates.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  namespace fs = std::filesystem;

  std::vector<CheckinRecord> checkins;
  const std::vector<CheckinRecord>* checkin_ptr = nullptr;
  if (spec.env.source == WorkerSource::Checkin) {
    std::ifstream in(spec.env.checkin_path);
    if (!in) throw std::runtime_error("cannot open check-in file " + spec.env.checkin_path);
    checkins = load_checkins(in);
    if (spec.env.apply_bbox)
      checkins = filter_bbox(checkins, spec.env.bbox_lat_lo, spec.env.bbox_lat_hi,
                             spec.env.bbox_lon_lo, spec.env.bbox_lon_hi);
    checkin_ptr = &checkins;
  }

  std::vector<double> sweep = spec.availability_sweep;
  if (sweep.empty()) sweep = {spec.env.availability};

  struct Job {
    std::size_t sweep_index;
    std::size_t policy_index;
    int instance;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < sweep.size(); ++s)
    for (std::size_t p = 0; p < spec.policies.size(); ++p)
      for (int k = 0; k < spec.instances; ++k) jobs.push_back({s, p, k});

  ExperimentResult result;
  result.sweeps.resize(sweep.size());
  for (std::size_t s = 0; s < sweep.size(); ++s) {
    result.sweeps[s].availability = sweep[s];
    result.sweeps[s].policies.resize(spec.policies.size());
    for (std::size_t p = 0; p < spec.policies.size(); ++p) {
      result.sweeps[s].policies[p].policy = spec.policies[p];
      result.sweeps[s].policies[p].instances.resize(static_cast<std::size_t>(spec.instances));
    }
  }

  const fs::path out_root(spec.output_dir);
  fs::create_directories(out_root);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size() || failed.load()) return;
      const Job job = jobs[j];
      try {
        EnvConfig env = spec.env;
        env.availability = sweep[job.sweep_index];
        const PolicyKind kind = spec.policies[job.policy_index];
        const Seeds seeds = derive_seeds(spec.master_seed, env.availability, kind, job.instance);
        RunResult run = run_instance(env, kind, spec.params, seeds, checkin_ptr);

        InstanceSummary summary;
        const long T = env.horizon;
        summary.cumulative_performance = cumulative_performance(run.trace, T);
        summary.expected_regret = expected_regret(run.trace, T);
        summary.final_average_performance = average_performance_up_to(run.trace, T);
        result.sweeps[job.sweep_index].policies[job.policy_index]
            .instances[static_cast<std::size_t>(job.instance)] = summary;

        char name[64];
        std::snprintf(name, sizeof(name), "%s_%03d.csv", to_string(kind), job.instance);
        const fs::path path = out_root / ("rho_" + detail::rho_label(env.availability)) / name;
        detail::write_atomic(path, trace_csv(run.trace));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) failure = e.what();
      }
    }
  };

  unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> threads;
  for (unsigned i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (failed.load()) throw std::runtime_error("experiment failed: " + failure);

  for (auto& sweep_result : result.sweeps) {
    for (auto& agg : sweep_result.policies) {
      double perf = 0.0;
      double regret = 0.0;
      double avg = 0.0;
      for (const auto& inst : agg.instances) {
        perf += inst.cumulative_performance;
        regret += inst.expected_regret;
        avg += inst.final_average_performance;
      }
      const double n = static_cast<double>(agg.instances.size());
      agg.cumulative_performance_mean = perf / n;
      agg.expected_regret_mean = regret / n;
      agg.final_average_performance_mean = avg / n;
    }
  }

  // Summary JSON: per-sweep aggregates plus the ratio table against hcl.
  nlohmann::ordered_json doc;
  doc["experiment"] = {
      {"workers", spec.env.workers},
      {"tasks", spec.env.horizon},
      {"model", spec.env.model == PerformanceModel::Discrete ? "discrete" : "hybrid"},
      {"source", spec.env.source == WorkerSource::Synthetic ? "synthetic" : "checkin"},
      {"instances", spec.instances},
      {"master_seed", spec.master_seed},
      {"parameters",
       {{"alpha", spec.params.alpha},
        {"exploration_factor", spec.params.exploration_factor},
        {"lambda_linucb", spec.params.lambda_linucb},
        {"lambda_auer", spec.params.lambda_auer},
        {"epsilon", spec.params.epsilon}}}};
  doc["sweeps"] = nlohmann::ordered_json::array();
  for (const auto& sweep_result : result.sweeps) {
    nlohmann::ordered_json entry;
    entry["availability"] = sweep_result.availability;
    entry["policies"] = nlohmann::ordered_json::object();
    for (const auto& agg : sweep_result.policies) {
      nlohmann::ordered_json per_instance = nlohmann::ordered_json::array();
      for (const auto& inst : agg.instances)
        per_instance.push_back({{"cumulative_performance", inst.cumulative_performance},
                                {"expected_regret", inst.expected_regret},
                                {"final_average_performance", inst.final_average_performance}});
      entry["policies"][to_string(agg.policy)] = {
          {"cumulative_performance_mean", agg.cumulative_performance_mean},
          {"expected_regret_mean", agg.expected_regret_mean},
          {"final_average_performance_mean", agg.final_average_performance_mean},
          {"instances", per_instance}};
    }
    const PolicyAggregate* hcl = nullptr;
    for (const auto& agg : sweep_result.policies)
      if (agg.policy == PolicyKind::Hcl) hcl = &agg;
    if (hcl != nullptr && hcl->cumulative_performance_mean > 0.0) {
      nlohmann::ordered_json ratios;
      for (const auto& agg : sweep_result.policies)
        ratios[to_string(agg.policy)] =
            agg.cumulative_performance_mean / hcl->cumulative_performance_mean;
      entry["performance_ratios"] = ratios;
    }
    doc["sweeps"].push_back(entry);
  }
  detail::write_atomic(out_root / "summary.json", doc.dump(2) + "\n");

  return result;
}

// --- flat key=value configuration ---------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream stream(value);
  while (std::getline(stream, current, ',')) {
    const auto begin = current.find_first_not_of(" \t");
    const auto end = current.find_last_not_of(" \t");
    parts.push_back(begin == std::string::npos ? "" : current.substr(begin, end - begin + 1));
  }
  return parts;
}

}  // namespace detail

// Applies one configuration key. Shared by the file parser and CLI overrides.
inline void apply_config_key(ExperimentSpec& spec, const std::string& key,
                             const std::string& value) {
  auto as_double = [&] { return std::stod(value); };
  auto as_long = [&] { return std::stol(value); };
  auto as_int = [&] { return std::stoi(value); };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: boolean expected for " + key);
  };

  if (key == "workers") spec.env.workers = as_int();
  else if (key == "tasks") spec.env.horizon = as_long();
  else if (key == "availability") spec.env.availability = as_double();
  else if (key == "price_low") spec.env.price_low = as_double();
  else if (key == "price_high") spec.env.price_high = as_double();
  else if (key == "price_split") spec.env.price_split = as_double();
  else if (key == "budget_mean") spec.env.budget_mean = as_double();
  else if (key == "budget_sd") spec.env.budget_sd = as_double();
  else if (key == "budget_min") spec.env.budget_min = as_double();
  else if (key == "budget_max") spec.env.budget_max = as_double();
  else if (key == "q_min") spec.env.quality.min_quality = as_double();
  else if (key == "q_max") spec.env.quality.max_quality = as_double();
  else if (key == "truth_bins") spec.env.truth_bins = as_int();
  else if (key == "model") {
    if (value == "discrete") spec.env.model = PerformanceModel::Discrete;
    else if (value == "hybrid") spec.env.model = PerformanceModel::Hybrid;
    else throw std::invalid_argument("config: model must be discrete or hybrid");
  } else if (key == "source") {
    if (value == "synthetic") spec.env.source = WorkerSource::Synthetic;
    else if (value == "checkin") spec.env.source = WorkerSource::Checkin;
    else throw std::invalid_argument("config: source must be synthetic or checkin");
  } else if (key == "checkin_file") spec.env.checkin_path = value;
  else if (key == "apply_bbox") spec.env.apply_bbox = as_bool();
  else if (key == "bbox_lat_lo") spec.env.bbox_lat_lo = as_double();
  else if (key == "bbox_lat_hi") spec.env.bbox_lat_hi = as_double();
  else if (key == "bbox_lon_lo") spec.env.bbox_lon_lo = as_double();
  else if (key == "bbox_lon_hi") spec.env.bbox_lon_hi = as_double();
  else if (key == "location_weights") {
    spec.env.location_weights.clear();
    for (const auto& part : detail::split_csv(value))
      spec.env.location_weights.push_back(std::stod(part));
  } else if (key == "alpha") spec.params.alpha = as_double();
  else if (key == "exploration_factor") spec.params.exploration_factor = as_double();
  else if (key == "lambda_linucb") spec.params.lambda_linucb = as_double();
  else if (key == "lambda_auer") spec.params.lambda_auer = as_double();
  else if (key == "epsilon") spec.params.epsilon = as_double();
  else if (key == "policies") {
    spec.policies.clear();
    for (const auto& part : detail::split_csv(value)) spec.policies.push_back(parse_policy(part));
  } else if (key == "instances") spec.instances = as_int();
  else if (key == "seed") spec.master_seed = std::stoull(value);
  else if (key == "availability_sweep") {
    spec.availability_sweep.clear();
    for (const auto& part : detail::split_csv(value))
      spec.availability_sweep.push_back(std::stod(part));
  } else if (key == "out_dir") spec.output_dir = value;
  else if (key == "threads") spec.threads = as_int();
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

// Flat key=value file; '#' starts a comment, blank lines are ignored.
inline ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path);
  ExperimentSpec spec;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("spec line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_key(spec, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("spec line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return spec;
}

}  // namespace mcsel
