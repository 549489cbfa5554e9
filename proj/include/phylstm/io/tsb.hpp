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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace phylstm::io {

/// Multichannel time series file.
///
/// Layout (little-endian): "TSB1", u16 version, u32 n_steps, u32 n_channels,
/// then per channel a u16 name length and the name bytes, then
/// n_steps * n_channels fp64 values in time-major order.
struct TsbTable {
  std::vector<std::string> channels;
  std::size_t steps = 0;
  std::vector<double> data;  // [steps x channels]

  std::size_t channel_index(const std::string& name) const;
  std::vector<double> channel(const std::string& name) const;
  /// Appends a channel; `values` must have `steps` entries (sets steps when empty).
  void add_channel(std::string name, std::span<const double> values);
  bool operator==(const TsbTable&) const = default;
};

inline constexpr std::uint16_t kTsbVersion = 1;

std::vector<char> encode_tsb(const TsbTable& table);
TsbTable decode_tsb(std::vector<char> bytes, const std::string& source = "tsb");
void write_tsb(const std::filesystem::path& path, const TsbTable& table);
TsbTable read_tsb(const std::filesystem::path& path);

}  // namespace phylstm::io
