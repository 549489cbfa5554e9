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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phylstm/simulate/bouc_wen.hpp"
#include "phylstm/simulate/excitation.hpp"

namespace phylstm::simulate {

enum class Role { Train, Validation, Test, Collocation };
const char* to_string(Role role) noexcept;
Role role_from_string(const std::string& name);

struct DatasetConfig {
  std::size_t n_known = 10;  // records with measured response, split train/validation
  double validation_fraction = 0.2;
  std::size_t n_collocation = 50;
  std::size_t n_test = 90;
  double duration_s = 30.0;
  double fs_hz = 50.0;
  Band band;
  double rms_min = 4.0;  // ag RMS, m/s^2, drawn log-uniformly
  double rms_max = 20.0;
  std::vector<double> intensity_scales{1.0};
  std::uint64_t seed = 2020;
  std::size_t threads = 1;

  void validate() const;
};

struct DatasetRecord {
  std::string id;
  Role role = Role::Train;
  std::uint64_t seed = 0;  // key of the stream that drew the base noise
  double rms = 0.0;        // base RMS before intensity scaling
  double scale = 1.0;
  std::vector<double> ag;
  std::optional<Trajectory> response;  // absent for collocation records
};

struct Dataset {
  BoucWenSystem system;
  DatasetConfig config;
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<DatasetRecord> records;

  std::vector<const DatasetRecord*> with_role(Role role) const;
  const DatasetRecord& find(const std::string& id) const;
};

/// Draws one BLWN record per base slot from a stream derived from
/// (seed, role group, index), replicates it at every intensity scale and
/// integrates every non-collocation record. Known records are split so that
/// the last round(n_known * validation_fraction) become validation records.
Dataset build_dataset(const BoucWenSystem& sys, const DatasetConfig& config);

inline constexpr int kDatasetFormatVersion = 1;

nlohmann::ordered_json system_to_json(const BoucWenSystem& sys);
BoucWenSystem system_from_json(const nlohmann::json& j);

/// Writes manifest.json, <id>.tsb (ag, and u_i, udot_i when simulated) and
/// <id>.latent.tsb (r_i, g_i; evaluation only). `echo` is embedded verbatim.
void write_dataset(const Dataset& data, const std::filesystem::path& dir,
                   const nlohmann::ordered_json& echo, const std::string& tool_version);
Dataset read_dataset(const std::filesystem::path& dir);

/// Channel names used in record files.
std::string channel_name(const char* base, std::size_t dof_index);

}  // namespace phylstm::simulate
