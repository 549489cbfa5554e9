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

#include "phylstm/core/tensor.hpp"
#include "phylstm/optim/schedule.hpp"
#include "phylstm/physics/physics.hpp"
#include "phylstm/simulate/dataset.hpp"

namespace phylstm::pipeline {

using RecordList = std::vector<const simulate::DatasetRecord*>;

/// Ground motion of the listed records as [S, T, 1], multiplied by `scale`.
Tensor ag_tensor(const RecordList& records, double scale);

/// Displacement, velocity, restoring-force or restoring-force-per-mass
/// channels of simulated records as [S, T, DOF], multiplied by `scale`.
enum class Field { U, UDot, R, G };
Tensor response_tensor(const RecordList& records, Field field, double scale);

/// Measured records first, then the unmeasured (collocation) records. All
/// quantities share one scale factor, under which every physics residual
/// is homogeneous.
physics::LossBatch make_loss_batch(const RecordList& measured, const RecordList& unmeasured,
                                   double dt, double scale);

/// Train and collocation records for training, validation records for
/// checkpoint selection (omitted when the dataset has none). Collocation
/// records are included only for PhyLSTM models that use them.
optim::TrainData make_train_data(const simulate::Dataset& data, double scale,
                                 bool use_collocation = true);

}  // namespace phylstm::pipeline
