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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phylstm/optim/schedule.hpp"
#include "phylstm/physics/physics.hpp"
#include "phylstm/simulate/dataset.hpp"

namespace phylstm::pipeline {

struct ModelSection {
  physics::ModelKind kind = physics::ModelKind::PhyLstm3;
  physics::PhiVariant phi = physics::PhiVariant::Simplified;
  std::optional<double> phi_exponent;
  std::vector<std::size_t> lstm_layers{100, 100};
  std::vector<std::size_t> fc_hidden;
  bool use_collocation = true;

  /// Network specs for a system with `dof` stories and force distribution `gamma`.
  physics::ModelConfig build(std::size_t dof, const std::vector<double>& gamma) const;
};

struct SelectionSection {
  std::size_t k = 7;
  std::size_t periods = 50;
  double t_min = 0.05;
  double t_max = 10.0;
  double damping = 0.05;
  std::size_t max_iter = 300;
};

/// One pass/fail rule for `evaluate`: metric of a channel's gamma summary
/// must be at least `at_least`.
struct Threshold {
  std::string channel;  // e.g. "u1", "g1"
  std::string metric;   // "median", "min" or "fraction_above"
  double at_least = 0.0;
};

struct EvaluateSection {
  double gamma_threshold = 0.9;  // for fraction_above
  std::vector<Threshold> thresholds{{"u1", "fraction_above", 0.95}, {"g1", "median", 0.9}};
};

struct Seeds {
  std::uint64_t data = 2020;
  std::uint64_t train = 1;
  std::uint64_t selection = 7;
};

struct Paths {
  std::string data;
  std::string checkpoint;
  std::string predictions;
};

/// Effective configuration of every command. Parsing is strict: unknown keys
/// at any level are rejected, and absent keys keep the defaults above.
struct RunConfig {
  simulate::BoucWenSystem system = simulate::BoucWenSystem::sdof_default();
  simulate::DatasetConfig data;
  ModelSection model;
  physics::LossWeights weights;
  optim::ScheduleConfig schedule;  // schedule.weights and seed are filled from the sections above
  double scale = 1.0;
  SelectionSection selection;
  EvaluateSection evaluate;
  Seeds seeds;
  Paths paths;

  void validate() const;
  /// Schedule with the loss weights and training seed applied.
  optim::ScheduleConfig effective_schedule() const;
  simulate::DatasetConfig effective_data() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace phylstm::pipeline
