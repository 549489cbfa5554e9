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
#include "phylstm/simulate/bouc_wen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "phylstm/core/error.hpp"

namespace phylstm::simulate {

namespace {

// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

void BoucWenSystem::validate() const {
  require(!stories.empty(), "system: at least one story is required");
  require(lambda > 0.0 && lambda <= 1.0, "system: lambda must lie in (0, 1]");
  require(gamma.empty() || gamma.size() == stories.size(), "system: gamma must have one entry per DOF");
  for (const Story& s : stories) {
    require(s.mass > 0.0 && s.stiffness > 0.0, "system: masses and stiffnesses must be positive");
    require(s.damping >= 0.0, "system: damping must be non-negative");
    require(s.exponent >= 1.0, "system: Bouc-Wen exponent must be at least 1");
    require(std::isfinite(s.alpha) && std::isfinite(s.beta), "system: alpha and beta must be finite");
  }
  for (double g : gamma) require(std::isfinite(g), "system: gamma must be finite");
}

std::vector<double> BoucWenSystem::natural_frequencies_hz() const {
  validate();
  const std::size_t n = dof();
  // M^-1/2 K M^-1/2 for the chain stiffness matrix.
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] += stories[i].stiffness;
    if (i + 1 < n) {
      a[i * n + i] += stories[i + 1].stiffness;
      a[i * n + i + 1] -= stories[i + 1].stiffness;
      a[(i + 1) * n + i] -= stories[i + 1].stiffness;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] /= std::sqrt(stories[i].mass * stories[j].mass);
  std::vector<double> f = symmetric_eigenvalues(std::move(a), n);
  for (double& v : f) v = std::sqrt(std::max(v, 0.0)) / (2.0 * std::numbers::pi);
  return f;
}

double BoucWenSystem::saturation(std::size_t story) const {
  const Story& s = stories.at(story);
  require(s.alpha + s.beta > 0.0, "system: saturation needs alpha + beta > 0");
  return std::pow(1.0 / (s.alpha + s.beta), 1.0 / s.exponent);
}

void boucwen_rhs(const BoucWenSystem& sys, std::span<const double> state, double ag,
                 std::span<double> rates, std::span<double> g) {
  const std::size_t n = sys.dof();
  const double* u = state.data();
  const double* v = u + n;
  const double* r = v + n;
  double* du = rates.data();
  double* acc = du + n;
  double* dr = acc + n;
  double f_above = 0.0;
  // Walk from the top story down so each story force is used twice.
  for (std::size_t k = n; k-- > 0;) {
    const Story& s = sys.stories[k];
    const double drift = u[k] - (k > 0 ? u[k - 1] : 0.0);
    const double drift_rate = v[k] - (k > 0 ? v[k - 1] : 0.0);
    const double f = s.damping * drift_rate + sys.lambda * s.stiffness * drift +
                     (1.0 - sys.lambda) * s.stiffness * r[k];
    const double gk = (f - f_above) / s.mass;
    f_above = f;
    const double ar = std::abs(r[k]);
    const double rn1 = std::pow(ar, s.exponent - 1.0);
    dr[k] = drift_rate - s.alpha * std::abs(drift_rate) * rn1 * r[k] - s.beta * drift_rate * rn1 * ar;
    du[k] = v[k];
    acc[k] = -sys.gamma_at(k) * ag - gk;
    if (!g.empty()) g[k] = gk;
  }
}

Rates boucwen_rhs(const BoucWenSystem& sys, std::span<const double> state, double ag) {
  const std::size_t n = sys.dof();
  require(state.size() == 3 * n, "boucwen_rhs: state must have 3 * dof entries");
  std::vector<double> rates(3 * n);
  Rates out;
  out.g.resize(n);
  boucwen_rhs(sys, state, ag, rates, out.g);
  out.u_dot.assign(rates.begin(), rates.begin() + n);
  out.u_ddot.assign(rates.begin() + n, rates.begin() + 2 * n);
  out.r_dot.assign(rates.begin() + 2 * n, rates.end());
  return out;
}

Trajectory integrate(const BoucWenSystem& sys, std::span<const double> ag, double dt,
                     std::size_t substeps) {
  sys.validate();
  require(dt > 0.0 && std::isfinite(dt), "integrate: dt must be positive");
  require(ag.size() >= 3, "integrate: record must have at least 3 samples");
  require(substeps >= 1, "integrate: substeps must be at least 1");
  for (double a : ag) require(std::isfinite(a), "integrate: record contains non-finite samples");

  const std::size_t n = sys.dof(), m = 3 * n, steps = ag.size();
  Trajectory tr;
  tr.steps = steps;
  tr.dof = n;
  tr.dt = dt;
  for (auto* v : {&tr.u, &tr.u_dot, &tr.r, &tr.g, &tr.u_ddot}) v->assign(steps * n, 0.0);

  std::vector<double> y(m, 0.0), k1(m), k2(m), k3(m), k4(m), tmp(m), rates(m), g(n);
  auto record = [&](std::size_t t) {
    boucwen_rhs(sys, y, ag[t], rates, g);
    for (std::size_t i = 0; i < n; ++i) {
      tr.u[t * n + i] = y[i];
      tr.u_dot[t * n + i] = y[n + i];
      tr.r[t * n + i] = y[2 * n + i];
      tr.u_ddot[t * n + i] = rates[n + i];
      tr.g[t * n + i] = g[i];
    }
  };
  record(0);

  const double h = dt / static_cast<double>(substeps);
  const std::span<double> no_g;
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    for (std::size_t s = 0; s < substeps; ++s) {
      auto forcing = [&](double frac) {
        const double w = (static_cast<double>(s) + frac) / static_cast<double>(substeps);
        return (1.0 - w) * ag[t] + w * ag[t + 1];
      };
      const double a0 = forcing(0.0), a_half = forcing(0.5), a1 = forcing(1.0);
      boucwen_rhs(sys, y, a0, k1, no_g);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      boucwen_rhs(sys, tmp, a_half, k2, no_g);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      boucwen_rhs(sys, tmp, a_half, k3, no_g);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
      boucwen_rhs(sys, tmp, a1, k4, no_g);
      for (std::size_t i = 0; i < m; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (double v : y)
      if (!std::isfinite(v))
        throw_error(ErrorKind::IntegrationDiverged, "integrate: state not finite at step " + std::to_string(t + 1));
    record(t + 1);
  }
  return tr;
}

}  // namespace phylstm::simulate
