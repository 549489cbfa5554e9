/* Copyright 2026 The PhyLSTM Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include "phylstm/optim/schedule.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "phylstm/core/error.hpp"
#include "phylstm/core/rng.hpp"

namespace phylstm::optim {

using physics::LossBatch;
using physics::LossTerms;

namespace {

// Fisher-Yates with the library RNG so shuffles are identical everywhere.
std::vector<std::size_t> permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

std::vector<LossBatch> make_batches(const LossBatch& full, std::size_t count, RngStream& rng) {
  if (count == 1) return {full};
  const std::size_t nm = full.measured(), nc = full.samples() - nm;
  const std::vector<std::size_t> pm = permutation(nm, rng), pc = permutation(nc, rng);
  std::vector<LossBatch> out;
  for (std::size_t b = 0; b < count; ++b) {
    std::vector<std::size_t> rows, measured;
    for (std::size_t i = b; i < nm; i += count) measured.push_back(pm[i]);
    rows = measured;
    for (std::size_t i = b; i < nc; i += count) rows.push_back(nm + pc[i]);
    LossBatch lb;
    lb.ag = select_samples(full.ag, rows);
    lb.u = select_samples(full.u, measured);
    lb.udot = select_samples(full.udot, measured);
    lb.dt = full.dt;
    out.push_back(std::move(lb));
  }
  return out;
}

void clip(std::span<double> g, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm)
    for (double& v : g) v *= max_norm / norm;
}

void add_terms(LossTerms& acc, const LossTerms& t) {
  acc.total += t.total;
  acc.data += t.data;
  acc.equality += t.equality;
  acc.governing += t.governing;
  acc.hysteretic += t.hysteretic;
}

class Tracker {
 public:
  Tracker(std::vector<double> theta0, const ProgressFn& progress, TrainResult& result)
      : progress_(progress), result_(result) {
    result_.theta = std::move(theta0);
    result_.best_val = std::numeric_limits<double>::infinity();
  }

  void record(HistoryRow row, std::span<const double> theta) {
    row.epoch = result_.history.size() + 1;
    if (row.val_j < result_.best_val) {
      result_.best_val = row.val_j;
      result_.best_epoch = row.epoch;
      result_.theta.assign(theta.begin(), theta.end());
    }
    result_.history.push_back(row);
    if (progress_) progress_(result_.history.back());
  }

 private:
  const ProgressFn& progress_;
  TrainResult& result_;
};

}  // namespace

const char* to_string(TrainStatus status) noexcept {
  return status == TrainStatus::Completed ? "completed" : "diverged";
}

void ScheduleConfig::validate() const {
  for (const AdamPhase& p : adam)
    require(p.lr > 0.0 && p.decay >= 0.0, "schedule: Adam phases need lr > 0 and decay >= 0");
  require(batches_per_epoch >= 1, "schedule: batches_per_epoch must be at least 1");
  require(clip_norm >= 0.0, "schedule: clip_norm must be non-negative");
  require(divergence_threshold > 0.0, "schedule: divergence threshold must be positive");
  weights.validate();
}

TrainResult train_schedule(const physics::PhyModel& model, std::vector<double> theta0,
                           const TrainData& data, const ScheduleConfig& config,
                           const ProgressFn& progress) {
  config.validate();
  require(theta0.size() == model.parameter_count(), "train: initial parameters have the wrong size");
  require(config.batches_per_epoch <= data.train.measured(),
          "train: batches_per_epoch cannot exceed the number of measured samples");
  const LossBatch& val_batch = data.validation ? *data.validation : data.train;

  TrainResult result;
  Tracker tracker(theta0, progress, result);
  std::vector<double> theta = std::move(theta0);
  std::vector<double> grad(theta.size());
  const RngStream root(config.seed);

  auto diverged = [&](const std::string& why) {
    result.status = TrainStatus::Diverged;
    result.message = why;
    return result;
  };
  auto too_big = [&](double v) { return !std::isfinite(v) || v > config.divergence_threshold; };

  std::size_t epoch = 0;
  for (std::size_t ph = 0; ph < config.adam.size(); ++ph) {
    const AdamPhase& phase = config.adam[ph];
    const std::string name = "adam" + std::to_string(ph + 1);
    Adam adam(theta.size(), AdamOptions{phase.lr, phase.decay});
    for (std::size_t e = 0; e < phase.epochs; ++e, ++epoch) {
      RngStream shuffle = root.derive("epoch", epoch);
      HistoryRow row;
      row.phase = name;
      try {
        for (const LossBatch& b : make_batches(data.train, config.batches_per_epoch, shuffle)) {
          const LossTerms t = model.loss(theta, b, config.weights, grad);
          if (too_big(t.total)) return diverged(fmt::format("{} epoch {}: training loss {}", name, e + 1, t.total));
          add_terms(row.terms, t);
          clip(grad, config.clip_norm);
          adam.step(theta, grad);
        }
        row.val_j = model.loss(theta, val_batch, config.weights, {}).total;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::NumericFailure) throw;
        return diverged(fmt::format("{} epoch {}: {}", name, e + 1, err.what()));
      }
      if (too_big(row.val_j)) return diverged(fmt::format("{} epoch {}: validation loss {}", name, e + 1, row.val_j));
      row.train_j = row.terms.total;
      tracker.record(row, theta);
    }
  }

  if (config.lbfgs.max_iter == 0) return result;

  // The objective caches the terms of its latest evaluation so accepted
  // iterates can be logged without re-evaluating.
  std::vector<double> last_x;
  LossTerms last_terms;
  LossGradFn objective = [&](std::span<const double> x, std::span<double> g) {
    try {
      last_terms = model.loss(x, data.train, config.weights, g);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::NumericFailure) throw;
      last_x.clear();
      return std::numeric_limits<double>::infinity();
    }
    last_x.assign(x.begin(), x.end());
    return last_terms.total;
  };
  std::string stop_reason;
  LbfgsCallback on_iterate = [&](const LbfgsIterate& it) {
    HistoryRow row;
    row.phase = "lbfgs";
    row.train_j = it.loss;
    if (std::equal(last_x.begin(), last_x.end(), it.x.begin(), it.x.end()))
      row.terms = last_terms;
    else
      row.terms = model.loss(it.x, data.train, config.weights, {});
    try {
      row.val_j = model.loss(it.x, val_batch, config.weights, {}).total;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::NumericFailure) throw;
      row.val_j = std::numeric_limits<double>::infinity();
    }
    if (too_big(row.val_j)) {
      stop_reason = fmt::format("lbfgs iteration {}: validation loss {}", it.iteration, row.val_j);
      return false;
    }
    tracker.record(row, it.x);
    return true;
  };
  try {
    const LbfgsResult r = lbfgs_minimize(objective, theta, config.lbfgs, on_iterate);
    result.lbfgs_status = r.status;
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::NumericFailure) throw;
    return diverged(std::string("lbfgs: ") + err.what());
  }
  if (!stop_reason.empty()) return diverged(stop_reason);
  return result;
}

std::string history_csv(const std::vector<HistoryRow>& history) {
  std::string out = "epoch,phase,train_J,val_J,J_d,J_e,J_g,J_h\n";
  for (const HistoryRow& r : history)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.epoch, r.phase, r.train_j, r.val_j, r.terms.data,
                       r.terms.equality, r.terms.governing, r.terms.hysteretic);
  return out;
}

}  // namespace phylstm::optim
