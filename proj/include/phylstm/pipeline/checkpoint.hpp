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
#include <string>
#include <vector>

#include <json.hpp>

#include "phylstm/physics/physics.hpp"

namespace phylstm::pipeline {

const char* to_string(physics::ModelKind kind) noexcept;
const char* to_string(physics::PhiVariant phi) noexcept;
physics::ModelKind model_kind_from_string(const std::string& name);
physics::PhiVariant phi_from_string(const std::string& name);

nlohmann::ordered_json net_spec_to_json(const lstm::NetSpec& spec);
lstm::NetSpec net_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json model_to_json(const physics::ModelConfig& config);
physics::ModelConfig model_from_json(const nlohmann::json& j);
nlohmann::ordered_json weights_to_json(const physics::LossWeights& w);

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Trained model state.
///
/// File layout: "PHYL", u16 version, u32 header length, UTF-8 JSON header,
/// then for each network in order (LSTM1, LSTM2, LSTM3 when present) a u64
/// parameter count followed by that many fp64 little-endian values in
/// lstm::NetParams flat order.
struct Checkpoint {
  physics::ModelConfig model;
  physics::LossWeights weights;
  std::vector<double> theta;
  double dt = 0.0;
  double scale = 1.0;  // global factor applied to ag, u, udot, r and g
  std::uint64_t seed = 0;
  nlohmann::ordered_json optimizer = nlohmann::ordered_json::object();  // run summary
  nlohmann::ordered_json config = nlohmann::ordered_json::object();     // effective run config
};

std::vector<char> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& source = "checkpoint");
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace phylstm::pipeline
