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
#include "phylstm/selection/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "phylstm/core/error.hpp"
#include "phylstm/core/parallel.hpp"

namespace phylstm::selection {

SpectrumGrid SpectrumGrid::log_spaced(std::size_t count, double t_min, double t_max, double damping) {
  require(count >= 2 && t_min > 0.0 && t_max > t_min, "spectrum grid: need count >= 2 and 0 < t_min < t_max");
  SpectrumGrid g;
  g.damping = damping;
  g.periods.resize(count);
  const double a = std::log(t_min), b = std::log(t_max);
  for (std::size_t i = 0; i < count; ++i)
    g.periods[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.periods.front() = t_min;
  g.periods.back() = t_max;
  g.validate();
  return g;
}

void SpectrumGrid::validate() const {
  require(!periods.empty(), "spectrum grid: no periods");
  require(damping >= 0.0 && damping < 1.0, "spectrum grid: damping must lie in [0, 1)");
  for (std::size_t i = 0; i < periods.size(); ++i) {
    require(periods[i] > 0.0 && std::isfinite(periods[i]), "spectrum grid: periods must be positive");
    require(i == 0 || periods[i] > periods[i - 1], "spectrum grid: periods must be strictly ascending");
  }
}

namespace {

// Exact recurrence for u'' + 2 zeta w u' + w^2 u = p(t) with p linear over
// each step (standard interpolation-of-excitation coefficients).
struct Recurrence {
  double a, b, c, d, a1, b1, c1, d1;
};

Recurrence recurrence(double w, double zeta, double dt) {
  const double k = w * w;
  const double sq = std::sqrt(1.0 - zeta * zeta);
  const double wd = w * sq;
  const double e = std::exp(-zeta * w * dt);
  const double s = std::sin(wd * dt), c = std::cos(wd * dt);
  const double z = zeta / sq;
  Recurrence r{};
  r.a = e * (z * s + c);
  r.b = e * s / wd;
  r.c = (2.0 * zeta / (w * dt) +
         e * (((1.0 - 2.0 * zeta * zeta) / (wd * dt) - z) * s - (1.0 + 2.0 * zeta / (w * dt)) * c)) / k;
  r.d = (1.0 - 2.0 * zeta / (w * dt) + e * ((2.0 * zeta * zeta - 1.0) / (wd * dt) * s + 2.0 * zeta / (w * dt) * c)) / k;
  r.a1 = -e * (w / sq) * s;
  r.b1 = e * (c - z * s);
  r.c1 = (-1.0 / dt + e * ((w / sq + zeta / (dt * sq)) * s + c / dt)) / k;
  r.d1 = (1.0 - e * (z * s + c)) / (k * dt);
  return r;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::size_t nearest(const std::vector<double>& p, const Matrix& centroids, double* dist) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(p, centroids[c]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  if (dist) *dist = bd;
  return best;
}

}  // namespace

std::vector<double> response_spectrum(std::span<const double> ag, double dt, const SpectrumGrid& grid) {
  grid.validate();
  require(dt > 0.0, "response spectrum: dt must be positive");
  std::vector<double> sa(grid.periods.size(), 0.0);
  for (std::size_t j = 0; j < grid.periods.size(); ++j) {
    const double w = 2.0 * std::numbers::pi / grid.periods[j], zeta = grid.damping;
    const Recurrence r = recurrence(w, zeta, dt);
    double u = 0.0, v = 0.0, peak = 0.0;
    for (std::size_t i = 0; i + 1 < ag.size(); ++i) {
      const double p0 = -ag[i], p1 = -ag[i + 1];
      const double un = r.a * u + r.b * v + r.c * p0 + r.d * p1;
      const double vn = r.a1 * u + r.b1 * v + r.c1 * p0 + r.d1 * p1;
      u = un;
      v = vn;
      peak = std::max(peak, std::abs(2.0 * zeta * w * v + w * w * u));
    }
    sa[j] = peak;
  }
  return sa;
}

Matrix response_spectra(const std::vector<std::span<const double>>& records, double dt,
                        const SpectrumGrid& grid, std::size_t threads) {
  Matrix out(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) { out[i] = response_spectrum(records[i], dt, grid); });
  return out;
}

Matrix standardize(const Matrix& rows) {
  require(!rows.empty(), "standardize: no rows");
  const std::size_t n = rows.size(), m = rows.front().size();
  Matrix out = rows;
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (const auto& r : rows) {
      require(r.size() == m, "standardize: rows differ in length");
      mean += r[j];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) out[i][j] = sd > 0.0 ? (rows[i][j] - mean) / sd : 0.0;
  }
  return out;
}

ClusterResult kmeans_cluster(const Matrix& points, std::size_t k, RngStream& rng, std::size_t max_iter) {
  const std::size_t n = points.size();
  require(k >= 1, "kmeans: k must be at least 1");
  require(k <= n, "kmeans: k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " records");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    require(p.size() == dim, "kmeans: points differ in dimension");
    for (double v : p) require(std::isfinite(v), "kmeans: points must be finite");
  }

  // k-means++: first center uniform, then proportional to squared distance.
  ClusterResult res;
  res.k = k;
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  res.centroids.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], points[first]);
  while (res.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = true;
    res.centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], points[pick]));
  }

  res.assignment.assign(n, 0);
  for (std::size_t iter = 0;; ++iter) {
    double inertia = 0.0;
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      const std::size_t c = nearest(points[i], res.centroids, &d);
      changed = changed || c != res.assignment[i];
      res.assignment[i] = c;
      inertia += d;
    }
    if (!res.inertia.empty() && inertia > res.inertia.back() * (1.0 + 1e-12) + 1e-300)
      throw_error(ErrorKind::NumericFailure,
                  fmt::format("kmeans: inertia increased from {} to {} at iteration {}", res.inertia.back(),
                              inertia, iter));
    res.inertia.push_back(inertia);
    if (!changed) {
      res.converged = true;
      break;
    }
    if (iter == max_iter) break;
    Matrix sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[res.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[res.assignment[i]][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    res.iterations = iter + 1;
  }
  return res;
}

std::vector<std::size_t> select_representatives(const ClusterResult& result, const Matrix& points) {
  require(points.size() == result.assignment.size(), "representatives: point count does not match the clustering");
  std::vector<std::size_t> rep(result.k, points.size());
  std::vector<double> best(result.k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = result.assignment[i];
    const double d = sq_dist(points[i], result.centroids[c]);
    if (d < best[c]) {
      best[c] = d;
      rep[c] = i;
    }
  }
  for (std::size_t c = 0; c < result.k; ++c)
    if (rep[c] == points.size())
      throw_error(ErrorKind::DegenerateClustering,
                  "representatives: cluster " + std::to_string(c) + " is empty; re-seed the clustering");
  return rep;
}

std::string selection_csv(const std::vector<std::string>& ids, const std::vector<double>& scales,
                          const SpectrumGrid& grid, const Matrix& spectra,
                          const ClusterResult& clusters, const std::vector<std::size_t>& representatives) {
  const std::size_t n = ids.size();
  require(scales.size() == n && spectra.size() == n && clusters.assignment.size() == n,
          "selection csv: inputs differ in record count");
  std::string out = "id,scale";
  for (double t : grid.periods) out += fmt::format(",Sa_T{}", t);
  out += ",cluster,representative\n";
  for (std::size_t i = 0; i < n; ++i) {
    require(spectra[i].size() == grid.periods.size(), "selection csv: spectrum length does not match the grid");
    out += fmt::format("{},{}", ids[i], scales[i]);
    for (double v : spectra[i]) out += fmt::format(",{}", v);
    const bool rep = std::find(representatives.begin(), representatives.end(), i) != representatives.end();
    out += fmt::format(",{},{}\n", clusters.assignment[i], rep ? 1 : 0);
  }
  return out;
}

}  // namespace phylstm::selection
