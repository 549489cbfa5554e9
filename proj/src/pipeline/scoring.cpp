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
#include "phylstm/pipeline/scoring.hpp"

#include <cmath>

#include "phylstm/core/error.hpp"

namespace phylstm::pipeline {

namespace {

std::vector<double> column(const std::vector<double>& series, std::size_t steps, std::size_t dof,
                           std::size_t i) {
  std::vector<double> out(steps);
  for (std::size_t t = 0; t < steps; ++t) out[t] = series[t * dof + i];
  return out;
}

}  // namespace

std::vector<RecordPrediction> predict_records(const physics::PhyModel& model,
                                              std::span<const double> theta,
                                              const RecordList& records, double dt, double scale) {
  require(scale > 0.0, "predict: scale must be positive");
  const physics::Prediction p = model.predict(theta, SeqBatch(ag_tensor(records, scale), dt));
  const std::size_t dof = model.config().dof, steps = p.z.steps();
  std::vector<RecordPrediction> out(records.size());
  for (std::size_t s = 0; s < records.size(); ++s) {
    RecordPrediction& rp = out[s];
    rp.id = records[s]->id;
    rp.steps = steps;
    rp.dof = dof;
    for (auto* v : {&rp.u, &rp.u_dot, &rp.r, &rp.g}) v->resize(steps * dof);
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t i = 0; i < dof; ++i) {
        rp.u[t * dof + i] = p.z.at(s, t, i) / scale;
        rp.u_dot[t * dof + i] = p.z.at(s, t, dof + i) / scale;
        rp.r[t * dof + i] = p.z.at(s, t, 2 * dof + i) / scale;
        rp.g[t * dof + i] = p.g.at(s, t, i) / scale;
      }
  }
  return out;
}

std::vector<evaluate::RecordScore> score_predictions(const std::vector<RecordPrediction>& predictions,
                                                     const RecordList& truth) {
  require(predictions.size() == truth.size(), "score: prediction and truth counts differ");
  std::vector<evaluate::RecordScore> out;
  out.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const RecordPrediction& p = predictions[k];
    const simulate::DatasetRecord& rec = *truth[k];
    require(p.id == rec.id, "score: prediction " + p.id + " does not match record " + rec.id);
    require(rec.response.has_value(), "score: record " + rec.id + " has no simulated response");
    const simulate::Trajectory& tr = *rec.response;
    require(tr.steps == p.steps && tr.dof == p.dof, "score: shape mismatch for record " + rec.id);

    std::vector<std::vector<double>> store;
    std::vector<std::pair<std::string, std::span<const double>>> pred, ref;
    store.reserve(8 * p.dof);
    auto add = [&](const char* base, const std::vector<double>& ps, const std::vector<double>& ts) {
      for (std::size_t i = 0; i < p.dof; ++i) {
        const std::string name = simulate::channel_name(base, i);
        pred.emplace_back(name, store.emplace_back(column(ps, p.steps, p.dof, i)));
        ref.emplace_back(name, store.emplace_back(column(ts, p.steps, p.dof, i)));
      }
    };
    add("u", p.u, tr.u);
    add("udot", p.u_dot, tr.u_dot);
    add("r", p.r, tr.r);
    add("g", p.g, tr.g);
    evaluate::RecordScore score = evaluate::score_record(rec.id, pred, ref);
    const auto window = std::min<std::size_t>(p.steps, static_cast<std::size_t>(std::lround(1.0 / tr.dt)));
    for (std::size_t i = 0; i < p.dof; ++i)
      score.residual_error.push_back(evaluate::residual_error(pred[i].second, ref[i].second, window));
    out.push_back(std::move(score));
  }
  return out;
}

}  // namespace phylstm::pipeline
