#pragma once

// Hierarchical context-aware learning: per-worker local controllers that keep
// counter/estimate tables over a partition of the joint context space, and the
// central selection step that turns their estimate/explore messages into a
// worker set.
//
// Protocol per task: the platform broadcasts the task context; every available
// controller answers with one scalar estimate or the explore sentinel; the
// platform replies with selection notices. A controller updates its table only
// when its worker was selected while its message was "explore" (that selection
// carries the quality assessment).

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mcsel/core.hpp"
#include "mcsel/partition.hpp"
#include "mcsel/rng.hpp"

namespace mcsel {

// Exploration threshold K(t) = factor * t^(2a/(3a+D)) * ln(t).
// A cell whose counter has not exceeded K(t) still needs exploration.
inline double control_threshold(long t, double alpha, int dimension, double factor) {
  if (t < 1) throw std::invalid_argument("control_threshold: t must be >= 1");
  if (!(factor > 0.0) || factor > 1.0)
    throw std::invalid_argument("control_threshold: factor must be in (0,1]");
  const double exponent = 2.0 * alpha / (3.0 * alpha + dimension);
  const double td = static_cast<double>(t);
  return factor * std::pow(td, exponent) * std::log(td);
}

struct LcMessage {
  WorkerId worker;
  std::optional<double> estimate;  // empty = explore request

  bool is_explore() const { return !estimate.has_value(); }
};

enum class McspPhase { SelectAll, Exploitation, Exploration };

inline const char* to_string(McspPhase phase) {
  switch (phase) {
    case McspPhase::SelectAll: return "select_all";
    case McspPhase::Exploitation: return "exploitation";
    case McspPhase::Exploration: return "exploration";
  }
  return "?";
}

struct LcParams {
  double alpha = 1.0;
  double exploration_factor = 0.003;  // the f in K(t)
  long horizon = 10000;
};

// Learning state of one worker's controller: a dense counter table and a dense
// estimate table over the cells of its joint-context partition.
class LocalController {
 public:
  LocalController(WorkerId worker, int personal_dims, int task_dims, LcParams params,
                  QualityRange quality)
      : worker_(worker),
        params_(params),
        quality_(quality),
        partition_(UniformPartition::for_horizon(params.horizon, params.alpha,
                                                 personal_dims + task_dims)),
        counts_(partition_.cell_count(), 0),
        estimates_(partition_.cell_count(), 0.0) {}

  struct Report {
    LcMessage message;
    CellId cell;
  };

  // Locate the joint-context cell and answer estimate-or-explore for task t.
  Report report(const WorkerContext& worker_ctx, const TaskContext& task_ctx, long t) const {
    const JointContext joint = JointContext::concat(worker_ctx, task_ctx);
    CellId cell = partition_.locate(joint);
    const std::size_t flat = partition_.flatten(cell);
    const double threshold = control_threshold(t, params_.alpha, partition_.dimension(),
                                               params_.exploration_factor);
    LcMessage message;
    message.worker = worker_;
    if (static_cast<double>(counts_[flat]) > threshold) message.estimate = estimates_[flat];
    return Report{std::move(message), std::move(cell)};
  }

  // Record one explored selection: p = quality if accepted, else 0.
  // estimate <- (estimate * n + p) / (n + 1), counter <- n + 1.
  void record(const CellId& cell, bool accepted, std::optional<double> quality) {
    if (accepted != quality.has_value())
      throw std::invalid_argument("LocalController::record: quality must be present iff accepted");
    double p = 0.0;
    if (accepted) {
      if (!(*quality >= quality_.min_quality && *quality <= quality_.max_quality))
        throw std::invalid_argument("LocalController::record: quality outside range");
      p = *quality;
    }
    const std::size_t flat = partition_.flatten(cell);
    const double n = static_cast<double>(counts_[flat]);
    estimates_[flat] = (estimates_[flat] * n + p) / (n + 1.0);
    counts_[flat] += 1;
  }

  WorkerId worker() const { return worker_; }
  const UniformPartition& partition() const { return partition_; }
  const LcParams& params() const { return params_; }

  long count(const CellId& cell) const { return counts_[partition_.flatten(cell)]; }
  double estimate(const CellId& cell) const { return estimates_[partition_.flatten(cell)]; }

  long total_recorded() const {
    long total = 0;
    for (long c : counts_) total += c;
    return total;
  }

  // Stored scalars: one counter and one estimate per cell.
  std::size_t table_entries() const { return 2 * partition_.cell_count(); }

 private:
  WorkerId worker_;
  LcParams params_;
  QualityRange quality_;
  UniformPartition partition_;
  std::vector<long> counts_;
  std::vector<double> estimates_;
};

// Senders of explore messages: the available workers whose current cell counter
// has not exceeded the control threshold.
inline std::vector<WorkerId> under_explored_set(std::span<const LcMessage> messages) {
  std::vector<WorkerId> out;
  for (const auto& m : messages)
    if (m.is_explore()) out.push_back(m.worker);
  return out;
}

// Central worker selection from one round of controller messages.
//
//   W_t <= m_t            -> select every sender            (select-all)
//   no explore messages   -> m_t best estimates             (exploitation)
//   n_ue >= m_t           -> m_t random under-explored      (exploration)
//   0 < n_ue < m_t        -> all under-explored + best rest (exploration)
//
// Estimate ties break toward the smaller worker index. Members are returned
// sorted by worker index with explored flags copied from the messages.
inline std::pair<Selection, McspPhase> mcsp_select(std::span<const LcMessage> messages, int quota,
                                                   Rng& rng) {
  if (messages.empty()) throw std::invalid_argument("mcsp_select: empty message set");
  if (quota < 1) throw std::invalid_argument("mcsp_select: quota must be >= 1");

  std::vector<const LcMessage*> senders;
  senders.reserve(messages.size());
  for (const auto& m : messages) senders.push_back(&m);
  std::sort(senders.begin(), senders.end(),
            [](const LcMessage* a, const LcMessage* b) { return a->worker < b->worker; });
  for (std::size_t i = 1; i < senders.size(); ++i)
    if (senders[i]->worker == senders[i - 1]->worker)
      throw std::invalid_argument("mcsp_select: duplicate message for one worker");

  const int available = static_cast<int>(senders.size());

  auto finish = [](std::vector<const LcMessage*> chosen, McspPhase phase) {
    std::sort(chosen.begin(), chosen.end(),
              [](const LcMessage* a, const LcMessage* b) { return a->worker < b->worker; });
    Selection selection;
    selection.workers.reserve(chosen.size());
    for (const LcMessage* m : chosen)
      selection.workers.push_back(SelectedWorker{m->worker, m->is_explore()});
    return std::make_pair(std::move(selection), phase);
  };

  if (available <= quota) return finish(senders, McspPhase::SelectAll);

  std::vector<const LcMessage*> explorers;
  std::vector<const LcMessage*> estimators;
  for (const LcMessage* m : senders)
    (m->is_explore() ? explorers : estimators).push_back(m);

  auto best_estimates = [&](int k) {
    std::vector<const LcMessage*> ranked = estimators;
    std::sort(ranked.begin(), ranked.end(), [](const LcMessage* a, const LcMessage* b) {
      if (*a->estimate != *b->estimate) return *a->estimate > *b->estimate;
      return a->worker < b->worker;
    });
    ranked.resize(static_cast<std::size_t>(k));
    return ranked;
  };

  if (explorers.empty()) return finish(best_estimates(quota), McspPhase::Exploitation);

  if (static_cast<int>(explorers.size()) >= quota) {
    std::vector<const LcMessage*> chosen;
    chosen.reserve(static_cast<std::size_t>(quota));
    for (int idx : rng.sample_indices(static_cast<int>(explorers.size()), quota))
      chosen.push_back(explorers[static_cast<std::size_t>(idx)]);
    return finish(std::move(chosen), McspPhase::Exploration);
  }

  std::vector<const LcMessage*> chosen = explorers;
  for (const LcMessage* m : best_estimates(quota - static_cast<int>(explorers.size())))
    chosen.push_back(m);
  return finish(std::move(chosen), McspPhase::Exploration);
}

}  // namespace mcsel
