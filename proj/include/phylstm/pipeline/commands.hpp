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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phylstm/evaluate/metrics.hpp"
#include "phylstm/optim/schedule.hpp"
#include "phylstm/pipeline/run_config.hpp"
#include "phylstm/pipeline/scoring.hpp"
#include "phylstm/simulate/dataset.hpp"

namespace phylstm::pipeline {

/// Version string written into every output manifest.
const char* tool_version() noexcept;

/// Settings shared by every command.
struct CommandContext {
  bool force = false;         // replace an existing output directory written by this tool
  std::size_t threads = 1;
  std::ostream* log = nullptr;  // progress and summaries; null silences
  std::size_t log_every = 100;  // training epochs between progress lines
};

/// Creates `dir` for a command's outputs. An existing directory is refused
/// unless `force` is set and it holds a manifest.json written by this tool.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

/// Manifest fields common to every output: format, format_version,
/// tool_version and the effective config.
nlohmann::ordered_json output_manifest(const std::string& format, const RunConfig& config);

simulate::Dataset cmd_generate(const RunConfig& config, const std::filesystem::path& out,
                               const CommandContext& ctx);

struct SelectionReport {
  std::vector<std::string> ids;
  std::vector<std::string> representatives;  // one record id per cluster
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// Spectra and k-means selection over the dataset records with the given
/// role, or over every record when `role` is empty.
SelectionReport cmd_select(const RunConfig& config, const std::filesystem::path& data_dir,
                           const std::string& role, const std::filesystem::path& out,
                           const CommandContext& ctx);

/// Writes checkpoint.phyl (lowest validation loss), history.csv and
/// manifest.json. The model is sized from the dataset's system.
optim::TrainResult cmd_train(const RunConfig& config, const std::filesystem::path& data_dir,
                             const std::filesystem::path& out, const CommandContext& ctx);

/// Writes <id>.tsb with channels u_i, udot_i, r_i, g_i for every record of
/// the role (every record when empty) plus manifest.json. Refuses records
/// whose dt differs from the checkpoint's.
std::vector<RecordPrediction> cmd_predict(const RunConfig& config,
                                          const std::filesystem::path& checkpoint,
                                          const std::filesystem::path& data_dir,
                                          const std::string& role,
                                          const std::filesystem::path& out,
                                          const CommandContext& ctx);

std::vector<RecordPrediction> read_predictions(const std::filesystem::path& dir);

struct ThresholdResult {
  Threshold rule;
  std::optional<double> value;  // empty when the channel has no defined gamma
  bool passed = false;
};

struct EvaluationReport {
  std::vector<evaluate::RecordScore> scores;
  std::vector<std::pair<std::string, std::optional<evaluate::RegressionSummary>>> summaries;
  std::vector<ThresholdResult> thresholds;
  bool passed = true;
};

/// Writes scores.csv, summary.json and hysteresis/<id>_<i>_{pred,true}.csv.
EvaluationReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& predictions_dir,
                              const std::filesystem::path& data_dir, const std::filesystem::path& out,
                              const CommandContext& ctx);

}  // namespace phylstm::pipeline
