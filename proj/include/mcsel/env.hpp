#pragma once

// The ground-truth world: task generation, worker availability and contexts
// (synthetic or check-in driven), the discrete and hybrid expected-performance
// models, and instantaneous outcome sampling.
//
// Worker context layout is (battery, location); the joint context seen by
// learners and models is (battery, location, task...). Locations are encoded
// as bin centers (j + 0.5) / l so that an l-way split of the location axis
// recovers the location index exactly.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsel/checkin.hpp"
#include "mcsel/core.hpp"
#include "mcsel/rng.hpp"

namespace mcsel {

enum class PerformanceModel { Discrete, Hybrid };
enum class WorkerSource { Synthetic, Checkin };

struct EnvConfig {
  int workers = 100;
  long horizon = 10000;
  double availability = 0.7;  // per-task availability probability rho

  int task_dims = 1;      // C
  int personal_dims = 2;  // X: battery, location

  double price_low = 0.75;
  double price_high = 1.0;
  double price_split = 0.5;  // first task coordinate <= split pays price_low

  double budget_mean = 20.0;
  double budget_sd = 5.0;
  double budget_min = 1.0;
  double budget_max = 100.0;

  QualityRange quality;  // [0, 5]

  // Synthetic location distribution (application used different amounts of
  // time in different places); index j encodes to coordinate (j + 0.5) / n.
  std::vector<double> location_weights = {1.0 / 2, 1.0 / 3, 1.0 / 12, 1.0 / 24, 1.0 / 24};

  int truth_bins = 5;  // discrete-model splits along task and battery axes

  PerformanceModel model = PerformanceModel::Discrete;
  WorkerSource source = WorkerSource::Synthetic;
  std::string checkin_path;

  // Check-in preprocessing box (a city extent); applied when enabled.
  bool apply_bbox = true;
  double bbox_lat_lo = 40.4774;
  double bbox_lat_hi = 40.9176;
  double bbox_lon_lo = -74.2591;
  double bbox_lon_hi = -73.7004;
};

inline void validate(const EnvConfig& config) {
  if (config.workers < 1) throw std::invalid_argument("EnvConfig: workers must be >= 1");
  if (config.horizon < 1) throw std::invalid_argument("EnvConfig: horizon must be >= 1");
  if (!(config.availability > 0.0) || config.availability > 1.0)
    throw std::invalid_argument("EnvConfig: availability must be in (0,1]");
  if (config.task_dims != 1 || config.personal_dims != 2)
    throw std::invalid_argument(
        "EnvConfig: performance models are defined on (battery, location, task); "
        "task_dims must be 1 and personal_dims 2");
  if (!(config.price_low > 0.0) || config.price_high < config.price_low)
    throw std::invalid_argument("EnvConfig: prices must satisfy 0 < low <= high");
  if (config.location_weights.empty())
    throw std::invalid_argument("EnvConfig: location_weights must be non-empty");
  if (config.truth_bins < 1) throw std::invalid_argument("EnvConfig: truth_bins must be >= 1");
  if (config.quality.max_quality < config.quality.min_quality)
    throw std::invalid_argument("EnvConfig: quality range inverted");
}

// Bin of x in an n-way uniform split of [0,1], top face closed.
inline int axis_bin(double x, int n) {
  int b = static_cast<int>(std::floor(x * n));
  if (b > n - 1) b = n - 1;
  if (b < 0) b = 0;
  return b;
}

inline double location_coordinate(int index, int locations) {
  return (static_cast<double>(index) + 0.5) / static_cast<double>(locations);
}

inline int sample_location_index(std::span<const double> weights, Rng& rng) {
  return rng.weighted_index(weights);
}

// True expected performance per worker; immutable once built.
class GroundTruth {
 public:
  struct HybridWorker {
    double mean = 0.5;                    // preferred task context
    double sd = 0.05;                     // width of the preference
    std::vector<double> location_weight;  // one factor in [0.5, 1] per location
  };

  // Discrete model: bins x bins x l_i grid per worker, each cell value drawn
  // uniformly from [0, q_max].
  static GroundTruth sample_discrete(const EnvConfig& config,
                                     std::span<const int> locations_per_worker, Rng& rng) {
    GroundTruth truth;
    truth.model_ = PerformanceModel::Discrete;
    truth.bins_ = config.truth_bins;
    truth.q_max_ = config.quality.max_quality;
    truth.locations_.assign(locations_per_worker.begin(), locations_per_worker.end());
    truth.grid_.reserve(truth.locations_.size());
    for (int l : truth.locations_) {
      std::vector<double> cells(static_cast<std::size_t>(truth.bins_) * truth.bins_ * l);
      for (auto& v : cells) v = rng.uniform(0.0, truth.q_max_);
      truth.grid_.push_back(std::move(cells));
    }
    return truth;
  }

  // Hybrid model: theta = q_max * w(location) * gauss(task; mean, sd) * sqrt(battery)
  // with the Gaussian scaled to peak at 1, w per location uniform in [0.5, 1],
  // mean uniform in [0.1, 0.9] and sd = 0.1 * mean.
  static GroundTruth sample_hybrid(const EnvConfig& config,
                                   std::span<const int> locations_per_worker, Rng& rng) {
    GroundTruth truth;
    truth.model_ = PerformanceModel::Hybrid;
    truth.q_max_ = config.quality.max_quality;
    truth.locations_.assign(locations_per_worker.begin(), locations_per_worker.end());
    truth.hybrid_.reserve(truth.locations_.size());
    for (int l : truth.locations_) {
      HybridWorker w;
      w.mean = rng.uniform(0.1, 0.9);
      w.sd = 0.1 * w.mean;
      w.location_weight.resize(static_cast<std::size_t>(l));
      for (auto& lw : w.location_weight) lw = rng.uniform(0.5, 1.0);
      truth.hybrid_.push_back(std::move(w));
    }
    return truth;
  }

  static GroundTruth sample(const EnvConfig& config, std::span<const int> locations_per_worker,
                            Rng& rng) {
    return config.model == PerformanceModel::Discrete
               ? sample_discrete(config, locations_per_worker, rng)
               : sample_hybrid(config, locations_per_worker, rng);
  }

  // Direct construction, mainly for tests with pinned parameters.
  static GroundTruth from_discrete(int bins, double q_max, std::vector<int> locations,
                                   std::vector<std::vector<double>> grid) {
    GroundTruth truth;
    truth.model_ = PerformanceModel::Discrete;
    truth.bins_ = bins;
    truth.q_max_ = q_max;
    truth.locations_ = std::move(locations);
    truth.grid_ = std::move(grid);
    return truth;
  }

  static GroundTruth from_hybrid(double q_max, std::vector<HybridWorker> workers) {
    GroundTruth truth;
    truth.model_ = PerformanceModel::Hybrid;
    truth.q_max_ = q_max;
    truth.hybrid_ = std::move(workers);
    truth.locations_.reserve(truth.hybrid_.size());
    for (const auto& w : truth.hybrid_)
      truth.locations_.push_back(static_cast<int>(w.location_weight.size()));
    return truth;
  }

  PerformanceModel model() const { return model_; }
  int workers() const { return static_cast<int>(locations_.size()); }
  int locations(WorkerId worker) const { return locations_[static_cast<std::size_t>(worker.value)]; }

  // Expected performance for joint context (battery, location, task).
  double value(WorkerId worker, const JointContext& joint) const {
    if (joint.dimension() < 3)
      throw std::invalid_argument("GroundTruth::value: joint context must be (battery, location, task)");
    const double battery = joint.values[0];
    const double location = joint.values[1];
    const double task = joint.values[2];
    return model_ == PerformanceModel::Discrete ? discrete_value(worker, battery, location, task)
                                                : hybrid_value(worker, battery, location, task);
  }

  double discrete_value(WorkerId worker, double battery, double location, double task) const {
    const auto i = static_cast<std::size_t>(worker.value);
    const int l = locations_[i];
    const int tb = axis_bin(task, bins_);
    const int bb = axis_bin(battery, bins_);
    const int lb = axis_bin(location, l);
    return grid_[i][(static_cast<std::size_t>(tb) * bins_ + bb) * l + lb];
  }

  double hybrid_value(WorkerId worker, double battery, double location, double task) const {
    const auto& w = hybrid_[static_cast<std::size_t>(worker.value)];
    const int lb = axis_bin(location, static_cast<int>(w.location_weight.size()));
    const double z = (task - w.mean) / w.sd;
    return q_max_ * w.location_weight[static_cast<std::size_t>(lb)] * std::exp(-0.5 * z * z) *
           std::sqrt(battery);
  }

 private:
  PerformanceModel model_ = PerformanceModel::Discrete;
  int bins_ = 5;
  double q_max_ = 5.0;
  std::vector<int> locations_;                // l_i per worker
  std::vector<std::vector<double>> grid_;     // discrete: task-major, then battery, then location
  std::vector<HybridWorker> hybrid_;
};

// Worker arrival process: who is available for a task and with which context.
class WorkerPool {
 public:
  static WorkerPool synthetic(const EnvConfig& config) {
    validate(config);
    WorkerPool pool;
    pool.config_ = config;
    pool.source_ = WorkerSource::Synthetic;
    pool.locations_per_worker_.assign(static_cast<std::size_t>(config.workers),
                                      static_cast<int>(config.location_weights.size()));
    return pool;
  }

  // Picks `workers` distinct users from the records (uniformly, seeded) and
  // keeps their check-ins; a user's distinct location count becomes l_i.
  static WorkerPool from_checkins(const EnvConfig& config, std::span<const CheckinRecord> records,
                                  Rng& rng) {
    validate(config);
    std::vector<long> users;
    {
      std::set<long> distinct;
      for (const auto& r : records) distinct.insert(r.user_id);
      users.assign(distinct.begin(), distinct.end());
    }
    if (static_cast<int>(users.size()) < config.workers)
      throw std::invalid_argument("WorkerPool: check-in pool has fewer than " +
                                  std::to_string(config.workers) + " distinct users");

    WorkerPool pool;
    pool.config_ = config;
    pool.source_ = WorkerSource::Checkin;
    std::vector<long> chosen;
    for (int idx : rng.sample_indices(static_cast<int>(users.size()), config.workers))
      chosen.push_back(users[static_cast<std::size_t>(idx)]);
    std::sort(chosen.begin(), chosen.end());

    std::map<long, int> worker_of_user;
    for (int i = 0; i < config.workers; ++i) worker_of_user[chosen[static_cast<std::size_t>(i)]] = i;
    pool.user_ids_ = std::move(chosen);
    pool.user_records_.resize(static_cast<std::size_t>(config.workers));
    std::vector<std::set<long>> locations(static_cast<std::size_t>(config.workers));
    for (const auto& r : records) {
      auto it = worker_of_user.find(r.user_id);
      if (it == worker_of_user.end()) continue;
      pool.user_records_[static_cast<std::size_t>(it->second)].push_back(r);
      locations[static_cast<std::size_t>(it->second)].insert(r.location_id);
    }
    pool.locations_per_worker_.resize(static_cast<std::size_t>(config.workers));
    pool.location_index_.resize(static_cast<std::size_t>(config.workers));
    for (int i = 0; i < config.workers; ++i) {
      int next = 0;
      for (long loc : locations[static_cast<std::size_t>(i)])
        pool.location_index_[static_cast<std::size_t>(i)][loc] = next++;
      pool.locations_per_worker_[static_cast<std::size_t>(i)] = next;
    }
    // Flat record list for uniform with-replacement draws.
    for (int i = 0; i < config.workers; ++i)
      for (const auto& r : pool.user_records_[static_cast<std::size_t>(i)])
        pool.flat_records_.push_back({i, r.location_id});
    return pool;
  }

  int workers() const { return config_.workers; }
  const std::vector<int>& locations_per_worker() const { return locations_per_worker_; }
  long user_id(WorkerId worker) const { return user_ids_[static_cast<std::size_t>(worker.value)]; }

  const std::vector<CheckinRecord>& records_of(WorkerId worker) const {
    return user_records_[static_cast<std::size_t>(worker.value)];
  }

  int location_index(WorkerId worker, long location_id) const {
    return location_index_[static_cast<std::size_t>(worker.value)].at(location_id);
  }

  // One task's worth of arrivals, sorted by worker index. At least one worker
  // is always available (the draw is repeated otherwise).
  std::vector<AvailableWorker> sample_available(Rng& rng) const {
    return source_ == WorkerSource::Synthetic ? sample_synthetic(rng) : sample_checkin(rng);
  }

 private:
  std::vector<AvailableWorker> sample_synthetic(Rng& rng) const {
    std::vector<int> present;
    while (present.empty()) {
      for (int i = 0; i < config_.workers; ++i)
        if (rng.bernoulli(config_.availability)) present.push_back(i);
    }
    std::vector<AvailableWorker> out;
    out.reserve(present.size());
    for (int i : present) {
      AvailableWorker w;
      w.id = WorkerId{i};
      const double battery = rng.uniform01();
      const int loc = sample_location_index(config_.location_weights, rng);
      w.context.values = {battery,
                          location_coordinate(loc, static_cast<int>(config_.location_weights.size()))};
      out.push_back(std::move(w));
    }
    return out;
  }

  std::vector<AvailableWorker> sample_checkin(Rng& rng) const {
    int count = 0;
    while (count == 0) count = rng.binomial(config_.workers, config_.availability);

    // Draw records with replacement until `count` distinct users have appeared;
    // a user's location is the one of her first sampled record.
    std::vector<int> first_location(static_cast<std::size_t>(config_.workers), -1);
    std::vector<int> order;
    while (static_cast<int>(order.size()) < count) {
      const auto pick = flat_records_[rng.below(flat_records_.size())];
      if (first_location[static_cast<std::size_t>(pick.worker)] < 0) {
        first_location[static_cast<std::size_t>(pick.worker)] =
            location_index_[static_cast<std::size_t>(pick.worker)].at(pick.location_id);
        order.push_back(pick.worker);
      }
    }
    std::sort(order.begin(), order.end());
    std::vector<AvailableWorker> out;
    out.reserve(order.size());
    for (int i : order) {
      AvailableWorker w;
      w.id = WorkerId{i};
      const double battery = rng.uniform01();
      const int l = locations_per_worker_[static_cast<std::size_t>(i)];
      w.context.values = {battery,
                          location_coordinate(first_location[static_cast<std::size_t>(i)], l)};
      out.push_back(std::move(w));
    }
    return out;
  }

  struct FlatRecord {
    int worker;
    long location_id;
  };

  EnvConfig config_;
  WorkerSource source_ = WorkerSource::Synthetic;
  std::vector<int> locations_per_worker_;
  std::vector<long> user_ids_;                         // check-in mode only
  std::vector<std::vector<CheckinRecord>> user_records_;
  std::vector<std::map<long, int>> location_index_;
  std::vector<FlatRecord> flat_records_;
};

inline double price_for(const EnvConfig& config, const TaskContext& context) {
  return context.values.at(0) <= config.price_split ? config.price_low : config.price_high;
}

// Truncated-normal budget: redrawn until inside [budget_min, budget_max], then
// clamped into [price, workers * price] so every task affords 1..W workers.
inline double sample_budget(const EnvConfig& config, double price, Rng& rng) {
  double budget;
  do {
    budget = rng.normal(config.budget_mean, config.budget_sd);
  } while (budget < config.budget_min || budget > config.budget_max);
  return std::clamp(budget, price, static_cast<double>(config.workers) * price);
}

inline Task gen_task(long t, const EnvConfig& config, Rng& rng) {
  Task task;
  task.id = t;
  task.context.values.resize(static_cast<std::size_t>(config.task_dims));
  for (auto& v : task.context.values) v = rng.uniform01();
  task.price = price_for(config, task.context);
  task.budget = sample_budget(config, task.price, rng);
  return task;
}

struct Outcome {
  bool accepted = false;
  double quality = 0.0;  // meaningful when accepted
};

// Realized performance: theta plus symmetric uniform noise, truncated so the
// draw stays inside [0, q_max] and its mean stays exactly theta.
inline Outcome sample_outcome(double theta, const QualityRange& range, Rng& rng) {
  if (!(theta >= 0.0 && theta <= range.max_quality + 1e-12))
    throw std::invalid_argument("sample_outcome: theta outside [0, q_max]");
  const double delta = std::min({1.0, theta, range.max_quality - theta});
  Outcome outcome;
  outcome.accepted = true;
  outcome.quality = delta > 0.0 ? theta + rng.uniform(-delta, delta) : theta;
  return outcome;
}

}  // namespace mcsel
