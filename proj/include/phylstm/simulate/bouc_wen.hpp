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
#include <span>
#include <vector>

namespace phylstm::simulate {

/// One story of a shear chain, SI units (kg, N*s/m, N/m).
struct Story {
  double mass = 500.0;
  double damping = 350.0;
  double stiffness = 25000.0;
  double alpha = 2.0;
  double beta = 2.0;
  double exponent = 3.0;

  bool operator==(const Story&) const = default;
};

/// Shear-chain Bouc-Wen system. Story i connects DOF i to DOF i-1 (the
/// ground for i = 0), with story force
///   f_i = c_i du_dot_i + lambda k_i du_i + (1 - lambda) k_i r_i
/// where du_i = u_i - u_{i-1}. The restoring force on DOF i is
/// h_i = f_i - f_{i+1}, and g = M^-1 h.
struct BoucWenSystem {
  std::vector<Story> stories{Story{}};
  double lambda = 0.5;        // post-yield stiffness ratio, (0, 1]
  std::vector<double> gamma;  // force distribution; empty means all ones

  static BoucWenSystem sdof_default() { return BoucWenSystem{}; }

  std::size_t dof() const noexcept { return stories.size(); }
  double gamma_at(std::size_t i) const noexcept { return gamma.empty() ? 1.0 : gamma[i]; }
  void validate() const;
  /// Undamped natural frequencies of the elastic chain (M, K), ascending, Hz.
  std::vector<double> natural_frequencies_hz() const;
  /// Saturation level of r under monotonic loading: (1 / (alpha + beta))^(1/n).
  double saturation(std::size_t story) const;

  bool operator==(const BoucWenSystem&) const = default;
};

/// State layout: u (dof) | u_dot (dof) | r (dof).
struct Rates {
  std::vector<double> u_dot, u_ddot, r_dot, g;
};

/// Time derivative of the state for ground acceleration `ag`.
void boucwen_rhs(const BoucWenSystem& sys, std::span<const double> state, double ag,
                 std::span<double> rates, std::span<double> g);
Rates boucwen_rhs(const BoucWenSystem& sys, std::span<const double> state, double ag);

/// Time-major response histories, each [steps x dof].
struct Trajectory {
  std::size_t steps = 0;
  std::size_t dof = 0;
  double dt = 0.0;
  std::vector<double> u, u_dot, r, g, u_ddot;

  double at(const std::vector<double>& series, std::size_t t, std::size_t i) const {
    return series[t * dof + i];
  }
};

/// Classical RK4 from rest. Each record interval is split into `substeps`
/// RK4 steps, with ag linearly interpolated between samples. Outputs are
/// reported at the record samples; u_ddot and g come from the same force
/// evaluation, so u_ddot + g + Gamma ag = 0 holds at every sample.
/// Throws IntegrationDiverged naming the step when the state stops being finite.
Trajectory integrate(const BoucWenSystem& sys, std::span<const double> ag, double dt,
                     std::size_t substeps = 1);

}  // namespace phylstm::simulate
