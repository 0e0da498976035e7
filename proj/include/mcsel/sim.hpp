#pragma once

// Experiment engine: runs one (policy, environment, seed) instance over the
// task sequence, records the trace, and computes the evaluation metrics.
//
// Randomness is split into three documented streams so that every policy faces
// the same world for a given environment seed:
//   - environment stream (seeds.environment): tasks, availability, contexts,
//     ground-truth sampling, check-in user choice;
//   - noise stream: one generator per (task, worker), derived as
//     hash(environment_seed, "noise", t, worker) -- identical across policies;
//   - policy stream (seeds.policy): the policy's own random choices.

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcsel/core.hpp"
#include "mcsel/env.hpp"
#include "mcsel/hcl.hpp"
#include "mcsel/policies.hpp"
#include "mcsel/rng.hpp"

namespace mcsel {

enum class PolicyKind { Hcl, Oracle, LinUcb, Auer, EpsGreedy, Myopic, Random };

inline constexpr PolicyKind kAllPolicies[] = {
    PolicyKind::Hcl,    PolicyKind::Oracle, PolicyKind::LinUcb, PolicyKind::Auer,
    PolicyKind::EpsGreedy, PolicyKind::Myopic, PolicyKind::Random};

inline const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Hcl: return "hcl";
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::LinUcb: return "linucb";
    case PolicyKind::Auer: return "auer";
    case PolicyKind::EpsGreedy: return "epsgreedy";
    case PolicyKind::Myopic: return "myopic";
    case PolicyKind::Random: return "random";
  }
  return "?";
}

inline PolicyKind parse_policy(std::string_view tag) {
  for (PolicyKind kind : kAllPolicies)
    if (tag == to_string(kind)) return kind;
  throw std::invalid_argument("unknown policy tag '" + std::string(tag) + "'");
}

struct PolicyParams {
  double alpha = 1.0;                 // smoothness exponent used by hcl
  double exploration_factor = 0.003;  // f
  double lambda_linucb = 1.5;
  double lambda_auer = 0.5;
  double epsilon = 0.01;
};

inline void validate(const PolicyParams& params) {
  if (!(params.alpha > 0.0) || params.alpha > 1.0)
    throw std::invalid_argument("PolicyParams: alpha must be in (0,1]");
  if (!(params.exploration_factor > 0.0) || params.exploration_factor > 1.0)
    throw std::invalid_argument("PolicyParams: exploration_factor must be in (0,1]");
  if (!(params.lambda_linucb >= 0.0) || !(params.lambda_auer >= 0.0))
    throw std::invalid_argument("PolicyParams: lambdas must be >= 0");
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
    throw std::invalid_argument("PolicyParams: epsilon must be in (0,1)");
}

struct Seeds {
  std::uint64_t environment = 0;
  std::uint64_t policy = 0;
};

inline constexpr std::uint64_t kNoiseStream = stream_tag("noise");

// Per-(task, worker) noise generator; independent of the policy stream, so all
// policies observe the same realization when they select the same worker.
inline Rng noise_rng(std::uint64_t environment_seed, long t, WorkerId worker) {
  return Rng(derive_seed(environment_seed,
                         {kNoiseStream, static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(worker.value)}));
}

// One task's record: everything needed to audit selections, replay estimator
// state, and compute the metrics.
struct TraceTask {
  long t = 0;
  int quota = 0;  // m_t
  McspPhase phase = McspPhase::SelectAll;
  Task task;
  std::vector<AvailableWorker> available;  // sorted by worker index
  Selection selection;                     // sorted by worker index
  std::vector<double> observed;            // realized p per selected worker
  std::vector<double> true_theta;          // true theta per selected worker
  double selected_theta_sum = 0.0;
  double oracle_theta_sum = 0.0;  // brute benchmark value for this task
  long comm = 0;                  // scalars transmitted this round
  int assessments = 0;            // quality assessments this round

  int available_count() const { return static_cast<int>(available.size()); }
};

struct RunTrace {
  std::vector<TraceTask> tasks;
  int workers = 0;
  int task_dims = 1;
  int joint_dims = 3;
};

struct RunResult {
  RunTrace trace;
  std::vector<LocalController> controllers;  // hcl runs only
  std::unique_ptr<Policy> policy;            // other policies
  PolicyKind kind = PolicyKind::Random;
};

enum class CommModel { Hierarchical, Centralized };

// Scalars per round: hierarchical C + W_t + m_t; centralized sum_i D_i + m_t + C.
inline long comm_scalars(const TraceTask& row, CommModel model, int task_dims, int joint_dims) {
  if (model == CommModel::Hierarchical)
    return static_cast<long>(task_dims) + row.available_count() + row.quota;
  return static_cast<long>(row.available_count()) * joint_dims + row.quota + task_dims;
}

namespace detail {

inline double top_k_theta_sum(std::vector<double> thetas, int k) {
  std::sort(thetas.begin(), thetas.end(), std::greater<double>());
  double sum = 0.0;
  for (int j = 0; j < k; ++j) sum += thetas[static_cast<std::size_t>(j)];
  return sum;
}

}  // namespace detail

inline RunResult run_instance(const EnvConfig& config, PolicyKind kind, const PolicyParams& params,
                              Seeds seeds,
                              const std::vector<CheckinRecord>* checkins = nullptr) {
  validate(config);
  validate(params);
  if (config.source == WorkerSource::Checkin && checkins == nullptr)
    throw std::invalid_argument("run_instance: check-in source requires records");

  Rng env_rng(seeds.environment);
  const WorkerPool pool = config.source == WorkerSource::Synthetic
                              ? WorkerPool::synthetic(config)
                              : WorkerPool::from_checkins(config, *checkins, env_rng);
  const GroundTruth truth = GroundTruth::sample(config, pool.locations_per_worker(), env_rng);
  Rng policy_rng(seeds.policy);

  const int joint_dims = config.personal_dims + config.task_dims;

  RunResult result;
  result.kind = kind;
  if (kind == PolicyKind::Hcl) {
    const LcParams lc{params.alpha, params.exploration_factor, config.horizon};
    result.controllers.reserve(static_cast<std::size_t>(config.workers));
    for (int i = 0; i < config.workers; ++i)
      result.controllers.emplace_back(WorkerId{i}, config.personal_dims, config.task_dims, lc,
                                      config.quality);
  } else {
    switch (kind) {
      case PolicyKind::Oracle:
        result.policy = std::make_unique<OraclePolicy>(
            [&truth](WorkerId id, const JointContext& joint) { return truth.value(id, joint); });
        break;
      case PolicyKind::LinUcb:
        result.policy = std::make_unique<LinUcbPolicy>(config.workers, joint_dims,
                                                       params.lambda_linucb);
        break;
      case PolicyKind::Auer:
        result.policy = std::make_unique<AuerPolicy>(config.workers, params.lambda_auer);
        break;
      case PolicyKind::EpsGreedy:
        result.policy = std::make_unique<EpsGreedyPolicy>(config.workers, params.epsilon);
        break;
      case PolicyKind::Myopic:
        result.policy = std::make_unique<MyopicPolicy>(config.workers);
        break;
      case PolicyKind::Random:
        result.policy = std::make_unique<RandomPolicy>();
        break;
      case PolicyKind::Hcl:
        break;
    }
  }

  RunTrace& trace = result.trace;
  trace.workers = config.workers;
  trace.task_dims = config.task_dims;
  trace.joint_dims = joint_dims;
  trace.tasks.reserve(static_cast<std::size_t>(config.horizon));

  for (long t = 1; t <= config.horizon; ++t) {
    TraceTask row;
    row.t = t;
    row.task = gen_task(t, config, env_rng);
    row.available = pool.sample_available(env_rng);
    row.quota = compute_worker_quota(row.task.budget, row.task.price);
    const int present = static_cast<int>(row.available.size());
    const int to_select = std::min(row.quota, present);

    // True expected performances and the benchmark optimum for this round.
    std::vector<JointContext> joints;
    joints.reserve(row.available.size());
    std::vector<double> thetas(row.available.size());
    for (std::size_t i = 0; i < row.available.size(); ++i) {
      joints.push_back(JointContext::concat(row.available[i].context, row.task.context));
      thetas[i] = truth.value(row.available[i].id, joints[i]);
    }
    row.oracle_theta_sum = detail::top_k_theta_sum(thetas, to_select);

    std::vector<CellId> cells;  // hcl: per-available reported cell
    if (kind == PolicyKind::Hcl) {
      std::vector<LcMessage> messages;
      messages.reserve(row.available.size());
      cells.reserve(row.available.size());
      for (const auto& w : row.available) {
        auto report = result.controllers[static_cast<std::size_t>(w.id.value)].report(
            w.context, row.task.context, t);
        messages.push_back(std::move(report.message));
        cells.push_back(std::move(report.cell));
      }
      auto [selection, phase] = mcsp_select(messages, row.quota, policy_rng);
      row.selection = std::move(selection);
      row.phase = phase;
      row.comm = comm_scalars(row, CommModel::Hierarchical, config.task_dims, joint_dims);
    } else {
      row.selection = result.policy->select(row.available, row.task.context, row.quota, t,
                                            policy_rng);
      row.phase = present <= row.quota ? McspPhase::SelectAll : McspPhase::Exploitation;
      row.comm = comm_scalars(row, CommModel::Centralized, config.task_dims, joint_dims);
    }

    // Outcomes and feedback. Both the selection and the available list are
    // sorted by worker index, so a linear merge finds each member's context.
    row.observed.reserve(row.selection.size());
    row.true_theta.reserve(row.selection.size());
    std::size_t cursor = 0;
    for (const auto& member : row.selection.workers) {
      while (row.available[cursor].id < member.worker) ++cursor;
      const double theta = thetas[cursor];
      Rng noise = noise_rng(seeds.environment, t, member.worker);
      const Outcome outcome = sample_outcome(theta, config.quality, noise);
      const double p = outcome.accepted ? outcome.quality : 0.0;
      if (kind == PolicyKind::Hcl) {
        if (member.explored) {
          result.controllers[static_cast<std::size_t>(member.worker.value)].record(
              cells[cursor], outcome.accepted,
              outcome.accepted ? std::optional<double>(outcome.quality) : std::nullopt);
          ++row.assessments;
        }
      } else {
        result.policy->observe(member.worker, joints[cursor], outcome.accepted, p);
        ++row.assessments;
      }
      row.observed.push_back(p);
      row.true_theta.push_back(theta);
      row.selected_theta_sum += theta;
    }

    trace.tasks.push_back(std::move(row));
  }
  return result;
}

// --- metrics -----------------------------------------------------------------

inline double cumulative_performance(const RunTrace& trace, long upto) {
  if (upto < 0 || upto > static_cast<long>(trace.tasks.size()))
    throw std::invalid_argument("cumulative_performance: T exceeds trace");
  double total = 0.0;
  for (long i = 0; i < upto; ++i)
    for (double p : trace.tasks[static_cast<std::size_t>(i)].observed) total += p;
  return total;
}

inline double average_performance_up_to(const RunTrace& trace, long t) {
  if (t < 1 || t > static_cast<long>(trace.tasks.size()))
    throw std::invalid_argument("average_performance_up_to: t out of range");
  double total = 0.0;
  long selections = 0;
  for (long i = 0; i < t; ++i) {
    const auto& row = trace.tasks[static_cast<std::size_t>(i)];
    for (double p : row.observed) total += p;
    selections += static_cast<long>(row.observed.size());
  }
  return total / static_cast<double>(selections);
}

// Expected regret from true values: sum_t (oracle theta sum - selected theta sum).
inline double expected_regret(const RunTrace& trace, long upto) {
  if (upto < 0 || upto > static_cast<long>(trace.tasks.size()))
    throw std::invalid_argument("expected_regret: T exceeds trace");
  double total = 0.0;
  for (long i = 0; i < upto; ++i) {
    const auto& row = trace.tasks[static_cast<std::size_t>(i)];
    total += row.oracle_theta_sum - row.selected_theta_sum;
  }
  return total;
}

// Quality assessments per worker up to task `upto` (explored selections).
inline std::vector<long> assessment_counts(const RunTrace& trace, long upto) {
  if (upto < 0 || upto > static_cast<long>(trace.tasks.size()))
    throw std::invalid_argument("assessment_counts: T exceeds trace");
  std::vector<long> counts(static_cast<std::size_t>(trace.workers), 0);
  for (long i = 0; i < upto; ++i)
    for (const auto& member : trace.tasks[static_cast<std::size_t>(i)].selection.workers)
      if (member.explored) ++counts[static_cast<std::size_t>(member.worker.value)];
  return counts;
}

struct MetricSeries {
  std::vector<double> cumulative_performance;  // Gamma_t
  std::vector<double> average_performance;     // Gamma_t / selections up to t
  std::vector<double> expected_regret;         // R(t)
  std::vector<long> cumulative_comm;
  std::vector<long> assessments;  // per worker, at the end of the run
};

inline MetricSeries build_metrics(const RunTrace& trace) {
  MetricSeries series;
  const std::size_t n = trace.tasks.size();
  series.cumulative_performance.resize(n);
  series.average_performance.resize(n);
  series.expected_regret.resize(n);
  series.cumulative_comm.resize(n);
  double perf = 0.0;
  double regret = 0.0;
  long comm = 0;
  long selections = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = trace.tasks[i];
    for (double p : row.observed) perf += p;
    selections += static_cast<long>(row.observed.size());
    regret += row.oracle_theta_sum - row.selected_theta_sum;
    comm += row.comm;
    series.cumulative_performance[i] = perf;
    series.average_performance[i] = perf / static_cast<double>(selections);
    series.expected_regret[i] = regret;
    series.cumulative_comm[i] = comm;
  }
  series.assessments = assessment_counts(trace, static_cast<long>(n));
  return series;
}

}  // namespace mcsel
