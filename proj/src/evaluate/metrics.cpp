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
#include "phylstm/evaluate/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "phylstm/core/error.hpp"

namespace phylstm::evaluate {

double correlation_coeff(std::span<const double> pred, std::span<const double> ref) {
  require(pred.size() == ref.size(), "correlation: series lengths differ");
  require(pred.size() >= 2, "correlation: need at least two samples");
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mr += ref[i];
  }
  mp /= n;
  mr /= n;
  double cov = 0.0, vp = 0.0, vr = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mp, dr = ref[i] - mr;
    cov += dp * dr;
    vp += dp * dp;
    vr += dr * dr;
  }
  if (!(vr > 0.0)) throw_error(ErrorKind::UndefinedMetric, "correlation: reference has zero variance");
  if (!(vp > 0.0)) throw_error(ErrorKind::UndefinedMetric, "correlation: prediction has zero variance");
  return std::clamp(cov / std::sqrt(vp * vr), -1.0, 1.0);
}

double peak_relative_error(std::span<const double> pred, std::span<const double> ref) {
  require(pred.size() == ref.size(), "peak error: series lengths differ");
  double pp = 0.0, pr = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pp = std::max(pp, std::abs(pred[i]));
    pr = std::max(pr, std::abs(ref[i]));
  }
  if (!(pr > 0.0)) throw_error(ErrorKind::UndefinedMetric, "peak error: reference is identically zero");
  return (pp - pr) / pr;
}

double residual_error(std::span<const double> pred, std::span<const double> ref, std::size_t window) {
  require(pred.size() == ref.size(), "residual error: series lengths differ");
  require(window >= 1 && window <= ref.size(), "residual error: window must lie in [1, length]");
  double acc = 0.0;
  for (std::size_t i = ref.size() - window; i < ref.size(); ++i) acc += pred[i] - ref[i];
  return acc / static_cast<double>(window);
}

const ChannelScore& RecordScore::channel(const std::string& name) const {
  for (const ChannelScore& c : channels)
    if (c.channel == name) return c;
  throw_error(ErrorKind::InvalidArgument, "record " + id + " has no channel " + name);
}

namespace {

template <typename F>
std::optional<double> defined(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UndefinedMetric) throw;
    return std::nullopt;
  }
}

// Edges are b / 20 - 1; comparing against them directly keeps decimal
// values such as 0.9 in the bin they start.
double bin_edge(std::size_t b) { return static_cast<double>(b) / 20.0 - 1.0; }

std::size_t histogram_bin(double g) {
  auto bin = static_cast<std::size_t>(std::clamp(std::floor((g + 1.0) * 20.0), 0.0, 39.0));
  while (bin + 1 < kHistogramBins && g >= bin_edge(bin + 1)) ++bin;
  while (bin > 0 && g < bin_edge(bin)) --bin;
  return bin;
}

std::string opt_str(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : "nan"; }

}  // namespace

RecordScore score_record(const std::string& id,
                         const std::vector<std::pair<std::string, std::span<const double>>>& pred,
                         const std::vector<std::pair<std::string, std::span<const double>>>& ref) {
  require(pred.size() == ref.size(), "score_record: channel counts differ for " + id);
  RecordScore out;
  out.id = id;
  for (std::size_t c = 0; c < pred.size(); ++c) {
    require(pred[c].first == ref[c].first, "score_record: channel order differs for " + id);
    ChannelScore s;
    s.channel = pred[c].first;
    s.gamma = defined([&] { return correlation_coeff(pred[c].second, ref[c].second); });
    s.peak_rel_error = defined([&] { return peak_relative_error(pred[c].second, ref[c].second); });
    out.channels.push_back(std::move(s));
  }
  return out;
}

RegressionSummary regression_summary(std::span<const std::optional<double>> gammas, double threshold) {
  RegressionSummary s;
  s.threshold = threshold;
  std::vector<double> v;
  for (const auto& g : gammas) {
    if (!g) {
      ++s.undefined;
      continue;
    }
    require(*g >= -1.0 && *g <= 1.0, "regression summary: gamma outside [-1, 1]");
    v.push_back(*g);
  }
  require(!v.empty(), "regression summary: no defined gamma values");
  std::sort(v.begin(), v.end());
  s.count = v.size();
  s.min = v.front();
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  std::size_t above = 0;
  for (double g : v) {
    if (g > threshold) ++above;
    ++s.histogram[histogram_bin(g)];
  }
  s.fraction_above = static_cast<double>(above) / static_cast<double>(v.size());
  return s;
}

RegressionSummary regression_summary(std::span<const double> gammas, double threshold) {
  std::vector<std::optional<double>> opt(gammas.begin(), gammas.end());
  return regression_summary(opt, threshold);
}

std::vector<std::optional<double>> channel_gammas(const std::vector<RecordScore>& scores,
                                                  const std::string& channel) {
  std::vector<std::optional<double>> out;
  out.reserve(scores.size());
  for (const RecordScore& r : scores) out.push_back(r.channel(channel).gamma);
  return out;
}

std::vector<std::pair<double, double>> hysteresis_export(std::span<const double> u,
                                                         std::span<const double> g) {
  require(u.size() == g.size(), "hysteresis: u and g lengths differ");
  std::vector<std::pair<double, double>> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = {u[i], g[i]};
  return out;
}

double loop_area(std::span<const std::pair<double, double>> pairs) {
  double area = 0.0;
  for (std::size_t i = 1; i < pairs.size(); ++i)
    area += 0.5 * (pairs[i].second + pairs[i - 1].second) * (pairs[i].first - pairs[i - 1].first);
  return area;
}

std::string hysteresis_csv(std::span<const std::pair<double, double>> pairs) {
  std::string out = "u,g\n";
  for (const auto& [u, g] : pairs) out += fmt::format("{},{}\n", u, g);
  return out;
}

std::string scores_csv(const std::vector<RecordScore>& scores) {
  if (scores.empty()) return "id\n";
  const RecordScore& first = scores.front();
  std::string out = "id";
  for (const ChannelScore& c : first.channels) out += ",gamma_" + c.channel;
  for (const ChannelScore& c : first.channels) out += ",peak_" + c.channel;
  for (std::size_t i = 0; i < first.residual_error.size(); ++i) out += fmt::format(",residual_u{}", i + 1);
  out += '\n';
  for (const RecordScore& r : scores) {
    require(r.channels.size() == first.channels.size() &&
                r.residual_error.size() == first.residual_error.size(),
            "scores_csv: records have different channel layouts");
    out += r.id;
    for (const ChannelScore& c : r.channels) out += "," + opt_str(c.gamma);
    for (const ChannelScore& c : r.channels) out += "," + opt_str(c.peak_rel_error);
    for (double e : r.residual_error) out += fmt::format(",{}", e);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json summary_json(const RegressionSummary& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["undefined"] = s.undefined;
  j["min"] = s.min;
  j["median"] = s.median;
  j["threshold"] = s.threshold;
  j["fraction_above"] = s.fraction_above;
  j["histogram_edges"] = {-1.0, 1.0, 0.05};
  j["histogram"] = s.histogram;
  return j;
}

}  // namespace phylstm::evaluate
