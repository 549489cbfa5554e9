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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace phylstm::evaluate {

/// Pearson correlation over one full history. Throws UndefinedMetric when
/// either series has zero variance and InvalidArgument on length mismatch
/// or fewer than two samples.
double correlation_coeff(std::span<const double> pred, std::span<const double> ref);

/// (max|pred| - max|ref|) / max|ref|; UndefinedMetric when ref is all zero.
double peak_relative_error(std::span<const double> pred, std::span<const double> ref);

/// Mean of pred minus mean of ref over the final `window` samples.
double residual_error(std::span<const double> pred, std::span<const double> ref, std::size_t window);

struct ChannelScore {
  std::string channel;
  std::optional<double> gamma;           // empty when undefined
  std::optional<double> peak_rel_error;  // empty when undefined
};

struct RecordScore {
  std::string id;
  std::vector<ChannelScore> channels;
  std::vector<double> residual_error;  // one per DOF, displacement channels

  const ChannelScore& channel(const std::string& name) const;
};

/// Scores named channel pairs. Undefined metrics are recorded as empty
/// values instead of thrown.
RecordScore score_record(const std::string& id,
                         const std::vector<std::pair<std::string, std::span<const double>>>& pred,
                         const std::vector<std::pair<std::string, std::span<const double>>>& ref);

inline constexpr std::size_t kHistogramBins = 40;  // 0.05 wide over [-1, 1]

struct RegressionSummary {
  std::size_t count = 0;  // defined gammas
  std::size_t undefined = 0;
  double min = 0.0;
  double median = 0.0;
  double fraction_above = 0.0;  // strictly above the threshold
  double threshold = 0.9;
  std::array<std::size_t, kHistogramBins> histogram{};
};

/// Aggregates gammas; empty entries count as undefined. Requires at least
/// one defined value. The median of an even count is the mean of the middle
/// pair. Bin b covers [-1 + 0.05 b, -1 + 0.05 (b + 1)), with 1.0 in the last bin.
RegressionSummary regression_summary(std::span<const std::optional<double>> gammas,
                                     double threshold = 0.9);
RegressionSummary regression_summary(std::span<const double> gammas, double threshold = 0.9);

/// Gammas of one channel across records.
std::vector<std::optional<double>> channel_gammas(const std::vector<RecordScore>& scores,
                                                  const std::string& channel);

/// Time-ordered (u, g) pairs.
std::vector<std::pair<double, double>> hysteresis_export(std::span<const double> u,
                                                         std::span<const double> g);

/// Trapezoid integral of g du along the path; for a dissipative cycle this
/// is the enclosed loop area.
double loop_area(std::span<const std::pair<double, double>> pairs);

std::string hysteresis_csv(std::span<const std::pair<double, double>> pairs);

/// id, then gamma_<channel> and peak_<channel> per channel, then
/// residual_u<i>; undefined values are written as "nan".
std::string scores_csv(const std::vector<RecordScore>& scores);

nlohmann::ordered_json summary_json(const RegressionSummary& summary);

}  // namespace phylstm::evaluate
