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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phylstm/optim/optim.hpp"
#include "phylstm/physics/physics.hpp"

namespace phylstm::optim {

struct AdamPhase {
  std::size_t epochs = 0;
  double lr = 1e-3;
  double decay = 0.0;
};

struct ScheduleConfig {
  std::vector<AdamPhase> adam{{5000, 1e-3, 0.0}, {5000, 1e-4, 0.0}};
  LbfgsOptions lbfgs;
  std::size_t batches_per_epoch = 1;  // Adam only; L-BFGS is always full batch
  double clip_norm = 0.0;             // global gradient-norm clip for Adam, 0 disables
  double divergence_threshold = 1e12;
  std::uint64_t seed = 0;             // drives mini-batch shuffling
  physics::LossWeights weights;

  void validate() const;
};

/// Training samples (measured rows first, then collocation rows) and an
/// optional validation batch of measured records only.
struct TrainData {
  physics::LossBatch train;
  std::optional<physics::LossBatch> validation;
};

struct HistoryRow {
  std::size_t epoch = 0;  // 1-based across all phases
  std::string phase;      // "adam1", "adam2", ..., "lbfgs"
  double train_j = 0.0;   // summed over the epoch's batches before each update
  double val_j = 0.0;     // after the epoch's updates
  physics::LossTerms terms;
};

enum class TrainStatus { Completed, Diverged };
const char* to_string(TrainStatus status) noexcept;

struct TrainResult {
  std::vector<double> theta;  // parameters with the lowest recorded val_j
  std::size_t best_epoch = 0; // 0 when no epoch ran
  double best_val = 0.0;
  TrainStatus status = TrainStatus::Completed;
  std::string message;
  std::optional<LbfgsStatus> lbfgs_status;
  std::vector<HistoryRow> history;
};

using ProgressFn = std::function<void(const HistoryRow&)>;

/// Adam phases in order (fresh optimizer state per phase), then full-batch
/// L-BFGS. Validation loss is the total objective on the validation batch
/// (or the training batch when none is given) and selects the returned
/// parameters. A loss above the divergence threshold or a non-finite loss
/// stops training with status Diverged and the best parameters so far.
TrainResult train_schedule(const physics::PhyModel& model, std::vector<double> theta0,
                           const TrainData& data, const ScheduleConfig& config,
                           const ProgressFn& progress = {});

/// epoch,phase,train_J,val_J,J_d,J_e,J_g,J_h with full round-trip precision.
std::string history_csv(const std::vector<HistoryRow>& history);

}  // namespace phylstm::optim
