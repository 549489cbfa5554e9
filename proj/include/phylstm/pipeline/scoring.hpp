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
#pragma once

#include <vector>

#include "phylstm/evaluate/metrics.hpp"
#include "phylstm/physics/physics.hpp"
#include "phylstm/pipeline/data.hpp"

namespace phylstm::pipeline {

/// Per-record physical-unit series of one model prediction.
struct RecordPrediction {
  std::string id;
  std::size_t steps = 0;
  std::size_t dof = 0;
  std::vector<double> u, u_dot, r, g;  // time-major, like simulate::Trajectory
};

/// Runs the model on the records' ground motion and divides the outputs by
/// the training scale factor.
std::vector<RecordPrediction> predict_records(const physics::PhyModel& model,
                                              std::span<const double> theta,
                                              const RecordList& records, double dt, double scale);

/// Scores u_i, udot_i, r_i and g_i against simulator truth. The residual
/// displacement error uses the final second of each record.
std::vector<evaluate::RecordScore> score_predictions(const std::vector<RecordPrediction>& predictions,
                                                     const RecordList& truth);

}  // namespace phylstm::pipeline
