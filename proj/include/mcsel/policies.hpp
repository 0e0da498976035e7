#pragma once

// Reference selection policies behind one interface: pick min(quota, available)
// workers for a task, then take feedback for each worker of the own selection.
// The oracle doubles as the regret benchmark.
//
// All of these are centralized: they see worker contexts directly, observe the
// realized performance of every selected worker (declines count as 0), and when
// quota >= available they select everyone.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcsel/core.hpp"
#include "mcsel/linalg.hpp"
#include "mcsel/rng.hpp"

namespace mcsel {

// Indices of the k best scores, ties toward the smaller worker id.
inline std::vector<int> top_k_indices(std::span<const double> scores,
                                      std::span<const AvailableWorker> workers, int k) {
  std::vector<int> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return workers[a].id < workers[b].id;
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

inline Selection make_selection(std::span<const AvailableWorker> workers,
                                std::span<const int> indices) {
  Selection selection;
  selection.workers.reserve(indices.size());
  for (int i : indices) selection.workers.push_back(SelectedWorker{workers[i].id, true});
  std::sort(selection.workers.begin(), selection.workers.end(),
            [](const SelectedWorker& a, const SelectedWorker& b) { return a.worker < b.worker; });
  return selection;
}

inline Selection random_subset(std::span<const AvailableWorker> workers, int k, Rng& rng) {
  return make_selection(workers, rng.sample_indices(static_cast<int>(workers.size()), k));
}

class Policy {
 public:
  virtual ~Policy() = default;

  // Exactly min(quota, available) distinct available workers.
  virtual Selection select(std::span<const AvailableWorker> available, const TaskContext& task,
                           int quota, long t, Rng& rng) = 0;

  // Feedback for a worker of this policy's own selection; performance is the
  // realized p (0 on decline).
  virtual void observe(WorkerId worker, const JointContext& context, bool accepted,
                       double performance) = 0;
};

// Omniscient benchmark: ranks available workers by true expected performance.
class OraclePolicy final : public Policy {
 public:
  using TruthFn = std::function<double(WorkerId, const JointContext&)>;

  explicit OraclePolicy(TruthFn truth) : truth_(std::move(truth)) {}

  Selection select(std::span<const AvailableWorker> available, const TaskContext& task, int quota,
                   long /*t*/, Rng& /*rng*/) override {
    if (available.empty()) throw std::invalid_argument("OraclePolicy::select: no available workers");
    const int k = std::min<int>(quota, static_cast<int>(available.size()));
    std::vector<double> scores(available.size());
    for (std::size_t i = 0; i < available.size(); ++i)
      scores[i] = truth_(available[i].id, JointContext::concat(available[i].context, task));
    return make_selection(available, top_k_indices(scores, available, k));
  }

  void observe(WorkerId, const JointContext&, bool, double) override {}

 private:
  TruthFn truth_;
};

// Disjoint per-worker ridge model on the raw joint-context feature with an
// upper-confidence width: index = theta^T x + lambda * sqrt(x^T A^-1 x).
class LinUcbPolicy final : public Policy {
 public:
  LinUcbPolicy(int workers, int dimension, double lambda)
      : dimension_(dimension), lambda_(lambda) {
    gram_.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) gram_.push_back(identity_matrix(dimension));
    response_.assign(static_cast<std::size_t>(workers),
                     std::vector<double>(static_cast<std::size_t>(dimension), 0.0));
  }

  double index(WorkerId worker, std::span<const double> feature) const {
    const auto& gram = gram_[static_cast<std::size_t>(worker.value)];
    const auto& response = response_[static_cast<std::size_t>(worker.value)];
    const std::vector<double> theta = cholesky_solve(gram, response);
    const std::vector<double> gram_inv_x = cholesky_solve(gram, feature);
    return dot(theta, feature) + lambda_ * std::sqrt(dot(feature, gram_inv_x));
  }

  Selection select(std::span<const AvailableWorker> available, const TaskContext& task, int quota,
                   long /*t*/, Rng& /*rng*/) override {
    const int k = std::min<int>(quota, static_cast<int>(available.size()));
    std::vector<double> scores(available.size());
    for (std::size_t i = 0; i < available.size(); ++i)
      scores[i] = index(available[i].id, JointContext::concat(available[i].context, task).values);
    return make_selection(available, top_k_indices(scores, available, k));
  }

  void observe(WorkerId worker, const JointContext& context, bool accepted,
               double performance) override {
    if (context.dimension() != dimension_)
      throw std::invalid_argument("LinUcbPolicy::observe: feature dimension mismatch");
    const double p = accepted ? performance : 0.0;
    auto& gram = gram_[static_cast<std::size_t>(worker.value)];
    auto& response = response_[static_cast<std::size_t>(worker.value)];
    add_outer_product(gram, context.values);
    for (int d = 0; d < dimension_; ++d) response[static_cast<std::size_t>(d)] += p * context.values[d];
  }

  const std::vector<double>& gram(WorkerId worker) const {
    return gram_[static_cast<std::size_t>(worker.value)];
  }
  const std::vector<double>& response(WorkerId worker) const {
    return response_[static_cast<std::size_t>(worker.value)];
  }

 private:
  int dimension_;
  double lambda_;
  std::vector<std::vector<double>> gram_;
  std::vector<std::vector<double>> response_;
};

// Context-free upper confidence bounds over intermittently available workers.
// Never-pulled workers get an infinite index (ties toward the smaller id).
class AuerPolicy final : public Policy {
 public:
  AuerPolicy(int workers, double lambda)
      : lambda_(lambda),
        mean_(static_cast<std::size_t>(workers), 0.0),
        pulls_(static_cast<std::size_t>(workers), 0) {}

  double index(WorkerId worker, long t) const {
    const auto i = static_cast<std::size_t>(worker.value);
    if (pulls_[i] == 0) return std::numeric_limits<double>::infinity();
    return mean_[i] + lambda_ * std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                                          static_cast<double>(pulls_[i]));
  }

  Selection select(std::span<const AvailableWorker> available, const TaskContext& /*task*/,
                   int quota, long t, Rng& /*rng*/) override {
    const int k = std::min<int>(quota, static_cast<int>(available.size()));
    std::vector<double> scores(available.size());
    for (std::size_t i = 0; i < available.size(); ++i) scores[i] = index(available[i].id, t);
    return make_selection(available, top_k_indices(scores, available, k));
  }

  void observe(WorkerId worker, const JointContext&, bool accepted, double performance) override {
    const double p = accepted ? performance : 0.0;
    const auto i = static_cast<std::size_t>(worker.value);
    const double n = static_cast<double>(pulls_[i]);
    mean_[i] = (mean_[i] * n + p) / (n + 1.0);
    pulls_[i] += 1;
  }

  double mean(WorkerId worker) const { return mean_[static_cast<std::size_t>(worker.value)]; }
  long pulls(WorkerId worker) const { return pulls_[static_cast<std::size_t>(worker.value)]; }

 private:
  double lambda_;
  std::vector<double> mean_;
  std::vector<long> pulls_;
};

// Random subset with probability epsilon, otherwise greedy on context-free
// means with never-pulled workers ranked above all pulled ones.
class EpsGreedyPolicy final : public Policy {
 public:
  EpsGreedyPolicy(int workers, double epsilon)
      : epsilon_(epsilon),
        mean_(static_cast<std::size_t>(workers), 0.0),
        pulls_(static_cast<std::size_t>(workers), 0) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw std::invalid_argument("EpsGreedyPolicy: epsilon must be in (0,1)");
  }

  Selection select(std::span<const AvailableWorker> available, const TaskContext& /*task*/,
                   int quota, long /*t*/, Rng& rng) override {
    const int k = std::min<int>(quota, static_cast<int>(available.size()));
    if (rng.uniform01() < epsilon_) {
      ++random_rounds_;
      return random_subset(available, k, rng);
    }
    std::vector<double> scores(available.size());
    for (std::size_t i = 0; i < available.size(); ++i) {
      const auto w = static_cast<std::size_t>(available[i].id.value);
      scores[i] = pulls_[w] == 0 ? std::numeric_limits<double>::infinity() : mean_[w];
    }
    return make_selection(available, top_k_indices(scores, available, k));
  }

  void observe(WorkerId worker, const JointContext&, bool accepted, double performance) override {
    const double p = accepted ? performance : 0.0;
    const auto i = static_cast<std::size_t>(worker.value);
    const double n = static_cast<double>(pulls_[i]);
    mean_[i] = (mean_[i] * n + p) / (n + 1.0);
    pulls_[i] += 1;
  }

  double mean(WorkerId worker) const { return mean_[static_cast<std::size_t>(worker.value)]; }
  long pulls(WorkerId worker) const { return pulls_[static_cast<std::size_t>(worker.value)]; }
  long random_rounds() const { return random_rounds_; }

 private:
  double epsilon_;
  std::vector<double> mean_;
  std::vector<long> pulls_;
  long random_rounds_ = 0;
};

// Remembers only the last interaction per worker: rank the available workers
// whose last request was accepted by their last completed performance, fill the
// remainder randomly.
class MyopicPolicy final : public Policy {
 public:
  struct Record {
    bool last_accepted = false;
    bool ever_completed = false;
    double last_performance = 0.0;
  };

  explicit MyopicPolicy(int workers) : records_(static_cast<std::size_t>(workers)) {}

  Selection select(std::span<const AvailableWorker> available, const TaskContext& /*task*/,
                   int quota, long t, Rng& rng) override {
    const int k = std::min<int>(quota, static_cast<int>(available.size()));
    if (t <= 1) return random_subset(available, k, rng);

    std::vector<int> acceptors;
    std::vector<int> rest;
    for (std::size_t i = 0; i < available.size(); ++i) {
      const auto& rec = records_[static_cast<std::size_t>(available[i].id.value)];
      if (rec && rec->last_accepted && rec->ever_completed)
        acceptors.push_back(static_cast<int>(i));
      else
        rest.push_back(static_cast<int>(i));
    }
    std::sort(acceptors.begin(), acceptors.end(), [&](int a, int b) {
      const auto& ra = *records_[static_cast<std::size_t>(available[a].id.value)];
      const auto& rb = *records_[static_cast<std::size_t>(available[b].id.value)];
      if (ra.last_performance != rb.last_performance)
        return ra.last_performance > rb.last_performance;
      return available[a].id < available[b].id;
    });

    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    for (int i : acceptors) {
      if (static_cast<int>(chosen.size()) == k) break;
      chosen.push_back(i);
    }
    if (static_cast<int>(chosen.size()) < k) {
      const int missing = k - static_cast<int>(chosen.size());
      for (int pick : rng.sample_indices(static_cast<int>(rest.size()), missing))
        chosen.push_back(rest[static_cast<std::size_t>(pick)]);
    }
    return make_selection(available, chosen);
  }

  void observe(WorkerId worker, const JointContext&, bool accepted, double performance) override {
    auto& rec = records_[static_cast<std::size_t>(worker.value)];
    if (!rec) rec.emplace();
    rec->last_accepted = accepted;
    if (accepted) {
      rec->ever_completed = true;
      rec->last_performance = performance;
    }
  }

  const std::optional<Record>& record(WorkerId worker) const {
    return records_[static_cast<std::size_t>(worker.value)];
  }

 private:
  std::vector<std::optional<Record>> records_;
};

class RandomPolicy final : public Policy {
 public:
  Selection select(std::span<const AvailableWorker> available, const TaskContext& /*task*/,
                   int quota, long /*t*/, Rng& rng) override {
    const int k = std::min<int>(quota, static_cast<int>(available.size()));
    return random_subset(available, k, rng);
  }

  void observe(WorkerId, const JointContext&, bool, double) override {}
};

}  // namespace mcsel
