#pragma once

// Domain types shared across the library, plus the budget-to-quota rule.
//
// Conventions: money and context coordinates are doubles; worker indices are
// 0-based in memory and printed 1-based in any emitted output.

#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcsel {

struct WorkerId {
  int value = 0;
  friend constexpr auto operator<=>(WorkerId, WorkerId) = default;
};

inline void require_unit_coords(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument(std::string(what) + ": coordinate outside [0,1]");
  }
}

// Task feature vector, each coordinate in [0,1].
struct TaskContext {
  std::vector<double> values;
};

// Worker's personal feature vector (battery state, location, ...), in [0,1].
struct WorkerContext {
  std::vector<double> values;
};

// Personal context followed by task context; the domain of expected performance.
struct JointContext {
  std::vector<double> values;

  static JointContext concat(const WorkerContext& worker, const TaskContext& task) {
    JointContext joint;
    joint.values.reserve(worker.values.size() + task.values.size());
    joint.values.insert(joint.values.end(), worker.values.begin(), worker.values.end());
    joint.values.insert(joint.values.end(), task.values.begin(), task.values.end());
    return joint;
  }

  int dimension() const { return static_cast<int>(values.size()); }
};

struct QualityRange {
  double min_quality = 0.0;
  double max_quality = 5.0;
};

struct Task {
  long id = 0;          // 1-based task index
  double budget = 0.0;  // what the owner pays in total
  TaskContext context;
  double price = 0.0;   // per completing worker, fixed by the task context
};

struct SelectedWorker {
  WorkerId worker;
  bool explored = false;  // true when the selection triggers a quality assessment
};

struct Selection {
  std::vector<SelectedWorker> workers;

  std::size_t size() const { return workers.size(); }

  bool contains(WorkerId id) const {
    for (const auto& w : workers)
      if (w.worker == id) return true;
    return false;
  }
};

struct AvailableWorker {
  WorkerId id;
  WorkerContext context;
};

// Maximum number of workers the budget affords: floor(budget / price).
// The caller guarantees budget <= W * price, so the result is in {1, ..., W}.
inline int compute_worker_quota(double budget, double price) {
  if (!(price > 0.0)) throw std::invalid_argument("compute_worker_quota: price must be positive");
  if (budget < price)
    throw std::invalid_argument("compute_worker_quota: budget below price, quota would be 0");
  return static_cast<int>(std::floor(budget / price));
}

}  // namespace mcsel
