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
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "phylstm/core/error.hpp"
#include "phylstm/selection/selection.hpp"
#include "phylstm/simulate/excitation.hpp"

using namespace phylstm;
using namespace phylstm::selection;

namespace {

std::vector<double> sine(double amp, double period, double duration, double dt) {
  const auto n = static_cast<std::size_t>(std::lround(duration / dt)) + 1;
  std::vector<double> ag(n);
  for (std::size_t i = 0; i < n; ++i) ag[i] = amp * std::sin(2.0 * std::numbers::pi * i * dt / period);
  return ag;
}

// RK4 with many substeps and linearly interpolated excitation.
double rk4_peak_total_accel(const std::vector<double>& ag, double dt, double period, double zeta) {
  const double w = 2.0 * std::numbers::pi / period;
  const int sub = 1000;
  const double h = dt / sub;
  double u = 0.0, v = 0.0, peak = 0.0;
  auto acc = [&](double uu, double vv, double a) { return -a - 2.0 * zeta * w * vv - w * w * uu; };
  for (std::size_t i = 0; i + 1 < ag.size(); ++i) {
    for (int s = 0; s < sub; ++s) {
      const double a0 = ag[i] + (ag[i + 1] - ag[i]) * s / sub;
      const double am = ag[i] + (ag[i + 1] - ag[i]) * (s + 0.5) / sub;
      const double a1 = ag[i] + (ag[i + 1] - ag[i]) * (s + 1.0) / sub;
      const double k1u = v, k1v = acc(u, v, a0);
      const double k2u = v + 0.5 * h * k1v, k2v = acc(u + 0.5 * h * k1u, v + 0.5 * h * k1v, am);
      const double k3u = v + 0.5 * h * k2v, k3v = acc(u + 0.5 * h * k2u, v + 0.5 * h * k2v, am);
      const double k4u = v + h * k3v, k4v = acc(u + h * k3u, v + h * k3v, a1);
      u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    peak = std::max(peak, std::abs(2.0 * zeta * w * v + w * w * u));
  }
  return peak;
}

std::vector<double> blwn(std::uint64_t seed, double rms = 5.0, double duration = 20.0) {
  RngStream rng(seed);
  return simulate::blwn_generate(rng, duration, 50.0, rms).ag;
}

Matrix blobs(RngStream& rng, std::size_t per_blob, std::size_t dim) {
  Matrix pts;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::vector<double> p(dim);
      for (double& v : p) v = (b == 0 ? -50.0 : 50.0) + rng.uniform(-1.0, 1.0);
      pts.push_back(p);
    }
  return pts;
}

std::set<std::set<std::size_t>> partition(const std::vector<std::size_t>& assignment, std::size_t k,
                                          const std::vector<std::size_t>& label_of_row) {
  std::vector<std::set<std::size_t>> groups(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) groups[assignment[i]].insert(label_of_row[i]);
  return {groups.begin(), groups.end()};
}

}  // namespace

TEST_CASE("spectrum grid") {
  const SpectrumGrid g = SpectrumGrid::log_spaced();
  REQUIRE(g.periods.size() == 50);
  CHECK(g.periods.front() == 0.05);
  CHECK(g.periods.back() == 10.0);
  CHECK(g.damping == 0.05);
  for (std::size_t i = 1; i < g.periods.size(); ++i)
    CHECK(g.periods[i] / g.periods[i - 1] == doctest::Approx(std::pow(200.0, 1.0 / 49.0)).epsilon(1e-12));
  SpectrumGrid bad;
  bad.periods = {1.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("spectrum examples") {
  const SpectrumGrid grid = SpectrumGrid::log_spaced();
  for (double sa : response_spectrum(std::vector<double>(300, 0.0), 0.02, grid)) CHECK(sa == 0.0);

  SpectrumGrid at_t0;
  at_t0.periods = {0.5, 1.0, 2.0};
  const std::vector<double> ag = sine(1.0, 1.0, 60.0, 0.01);
  const std::vector<double> sa = response_spectrum(ag, 0.01, at_t0);
  const double amplification = sa[1] / 1.0;
  CHECK(std::abs(amplification - 10.0) < 1.0);
  CHECK(sa[1] > sa[0]);
  CHECK(sa[1] > sa[2]);

  SpectrumGrid flexible;
  flexible.periods = {1000.0};
  const std::vector<double> short_rec = blwn(3, 5.0, 10.0);
  double pga = 0.0;
  for (double a : short_rec) pga = std::max(pga, std::abs(a));
  CHECK(response_spectrum(short_rec, 0.02, flexible)[0] < 1e-3 * pga);
}

TEST_CASE("spectrum matches a fine RK4 oracle") {
  const std::vector<double> ag = blwn(11, 5.0, 10.0);
  SpectrumGrid grid;
  grid.periods = {0.05, 0.3, 1.0, 3.0, 10.0};
  for (double zeta : {0.0, 0.05, 0.2}) {
    grid.damping = zeta;
    const std::vector<double> sa = response_spectrum(ag, 0.02, grid);
    for (std::size_t j = 0; j < grid.periods.size(); ++j)
      CHECK(sa[j] == doctest::Approx(rk4_peak_total_accel(ag, 0.02, grid.periods[j], zeta)).epsilon(1e-8));
  }
}

TEST_CASE("spectrum property: linear in record amplitude") {
  const SpectrumGrid grid = SpectrumGrid::log_spaced();
  const std::vector<double> ag = blwn(5);
  const std::vector<double> base = response_spectrum(ag, 0.02, grid);
  for (double s : {0.25, 3.0, 17.5}) {
    std::vector<double> scaled = ag;
    for (double& v : scaled) v *= s;
    const std::vector<double> sa = response_spectrum(scaled, 0.02, grid);
    for (std::size_t j = 0; j < sa.size(); ++j) {
      if (s == 0.25) CHECK(sa[j] == s * base[j]);
      CHECK(sa[j] == doctest::Approx(s * base[j]).epsilon(1e-12));
    }
  }
  const std::vector<std::span<const double>> recs{ag, ag};
  const Matrix par = response_spectra(recs, 0.02, grid, 2);
  CHECK(par[0] == base);
  CHECK(par[1] == base);
}

TEST_CASE("standardize") {
  const Matrix m{{1.0, 5.0, 2.0}, {3.0, 5.0, 4.0}};
  const Matrix z = standardize(m);
  CHECK(z[0] == std::vector<double>{-1.0, 0.0, -1.0});
  CHECK(z[1] == std::vector<double>{1.0, 0.0, 1.0});
}

TEST_CASE("kmeans examples") {
  RngStream rng(1);
  const Matrix pts{{0.0, 1.0}, {2.0, 3.0}, {4.0, 8.0}, {-1.0, 0.0}};
  const ClusterResult one = kmeans_cluster(pts, 1, rng);
  CHECK(one.centroids[0][0] == doctest::Approx(1.25));
  CHECK(one.centroids[0][1] == doctest::Approx(3.0));
  CHECK(one.converged);

  const ClusterResult all = kmeans_cluster(pts, 4, rng);
  CHECK(all.inertia.back() == 0.0);
  const auto reps = select_representatives(all, pts);
  CHECK(std::set<std::size_t>(reps.begin(), reps.end()).size() == 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(all.assignment[reps[c]] == c);

  RngStream brng(2);
  const Matrix two = blobs(brng, 10, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngStream r(seed);
    const ClusterResult res = kmeans_cluster(two, 2, r);
    for (std::size_t i = 1; i < 10; ++i) CHECK(res.assignment[i] == res.assignment[0]);
    for (std::size_t i = 10; i < 20; ++i) CHECK(res.assignment[i] != res.assignment[0]);
  }
  CHECK_THROWS_AS(kmeans_cluster(pts, 5, rng), Error);
  CHECK_THROWS_AS(kmeans_cluster(pts, 0, rng), Error);
}

TEST_CASE("kmeans property: inertia never increases") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    Matrix pts(60, std::vector<double>(4));
    for (auto& p : pts) rng.fill_gaussian(p);
    const ClusterResult res = kmeans_cluster(pts, 5, rng);
    for (std::size_t i = 1; i < res.inertia.size(); ++i) CHECK(res.inertia[i] <= res.inertia[i - 1]);
    CHECK(res.converged);
    CHECK(res.iterations <= 300);
  }
}

TEST_CASE("kmeans property: permutation equivariance") {
  RngStream brng(9);
  const Matrix pts = blobs(brng, 8, 2);
  std::vector<std::size_t> ident(pts.size());
  for (std::size_t i = 0; i < ident.size(); ++i) ident[i] = i;
  RngStream r0(4);
  const ClusterResult base = kmeans_cluster(pts, 2, r0);
  const auto base_part = partition(base.assignment, 2, ident);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> perm = ident;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[brng.below(i)]);
    Matrix permuted;
    for (std::size_t i : perm) permuted.push_back(pts[i]);
    RngStream r(4);
    const ClusterResult res = kmeans_cluster(permuted, 2, r);
    CHECK(partition(res.assignment, 2, perm) == base_part);
  }
}

TEST_CASE("representatives: ties and degenerate clusters") {
  const Matrix pts{{1.0}, {1.0}, {3.0}};
  ClusterResult cr;
  cr.k = 2;
  cr.centroids = {{1.5}, {3.0}};
  cr.assignment = {0, 0, 1};
  const auto reps = select_representatives(cr, pts);
  CHECK(reps == std::vector<std::size_t>{0, 2});

  cr.k = 3;
  cr.centroids.push_back({10.0});
  try {
    select_representatives(cr, pts);
    FAIL("expected degenerate clustering");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateClustering);
  }
}

TEST_CASE("selection: seven representatives from 97 synthetic records") {
  RngStream root(2020);
  std::vector<std::vector<double>> records;
  for (std::size_t i = 0; i < 97; ++i) {
    RngStream r = root.derive("record", i);
    const double rms = std::exp(r.uniform(std::log(2.0), std::log(10.0)));
    records.push_back(simulate::blwn_generate(r, 20.0, 50.0, rms, {0.1, r.uniform(2.0, 20.0)}).ag);
  }
  const std::vector<std::span<const double>> views(records.begin(), records.end());
  const SpectrumGrid grid = SpectrumGrid::log_spaced();
  const Matrix sa = response_spectra(views, 0.02, grid);
  const Matrix z = standardize(sa);
  RngStream krng(7);
  const ClusterResult res = kmeans_cluster(z, 7, krng);
  const auto reps = select_representatives(res, z);
  CHECK(reps.size() == 7);
  CHECK(std::set<std::size_t>(reps.begin(), reps.end()).size() == 7);
  for (std::size_t i = 1; i < res.inertia.size(); ++i) CHECK(res.inertia[i] <= res.inertia[i - 1]);

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 97; ++i) ids.push_back("rec-" + std::to_string(i));
  const std::string csv = selection_csv(ids, std::vector<double>(97, 1.0), grid, sa, res, reps);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 98);
  CHECK(csv.rfind("id,scale,Sa_T0.05,", 0) == 0);
}
