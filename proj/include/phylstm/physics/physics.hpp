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
#include <optional>
#include <span>
#include <vector>

#include "phylstm/core/rng.hpp"
#include "phylstm/core/tape.hpp"
#include "phylstm/core/tensor.hpp"
#include "phylstm/lstm/net.hpp"

namespace phylstm::physics {

/// Second-order finite-difference derivative along time: central differences
/// in the interior, one-sided three-point stencils at both ends. Exact for
/// polynomials of degree two. Requires at least three steps.
TimeStencil derivative_stencil(double dt);

SeqBatch time_derivative(const SeqBatch& x);
Var time_derivative(GradTape& tape, Var x, double dt);

/// ||z1 - u_d||^2 + ||z2 - udot_d||^2 summed over samples, steps and channels.
Var data_loss(GradTape& tape, Var z1, Var z2, Var u_d, Var udot_d);
/// ||z1_dot - z2||^2.
Var equality_loss(GradTape& tape, Var z1_dot, Var z2);
/// ||z2_dot + g + Gamma ag||^2; `gamma_ag` is the broadcast product [S, T, DOF].
Var governing_loss(GradTape& tape, Var z2_dot, Var g, Var gamma_ag);
/// ||r_dot_pred - z3_dot||^2.
Var hysteretic_loss(GradTape& tape, Var r_dot_pred, Var z3_dot);

double data_loss(const Tensor& z1, const Tensor& z2, const Tensor& u_d, const Tensor& udot_d);
double equality_loss(const Tensor& z1_dot, const Tensor& z2);
double governing_loss(const Tensor& z2_dot, const Tensor& g, const Tensor& ag,
                      std::span<const double> gamma);
double hysteretic_loss(const Tensor& r_dot_pred, const Tensor& z3_dot);

/// ag [S, T, 1] times the force distribution vector, giving [S, T, DOF].
Tensor broadcast_gamma(const Tensor& ag, std::span<const double> gamma);

enum class PhiVariant { Full, Simplified };

/// Feature library for the hysteretic ODE, built from Z = {u | udot | r}
/// with `dof` channels per group. Channels are grouped by feature:
///   Full:       {du, |du|, r, |r|^(n-1), |r|^n}
///   Simplified: {du, r}
/// where du is the story drift velocity (du_1 = udot_1, du_i = udot_i - udot_{i-1}).
Var build_phi(GradTape& tape, Var z, std::size_t dof, PhiVariant variant,
              std::optional<double> exponent);
SeqBatch build_phi(const SeqBatch& z, std::size_t dof, PhiVariant variant,
                   std::optional<double> exponent);
std::size_t phi_channels(std::size_t dof, PhiVariant variant);

enum class ModelKind { PhyLstm2, PhyLstm3 };

struct LossWeights {
  double alpha = 1.0;  // data
  double beta = 1.0;   // equality
  double gamma = 1.0;  // governing
  double eta = 1.0;    // hysteretic, PhyLSTM3 only

  void validate() const;
};

struct ModelConfig {
  ModelKind kind = ModelKind::PhyLstm3;
  PhiVariant phi = PhiVariant::Simplified;
  std::optional<double> phi_exponent;  // required for PhiVariant::Full
  std::size_t dof = 1;
  std::vector<double> gamma;  // force distribution, defaults to ones
  lstm::NetSpec net1;         // ag -> {u, udot, r}
  lstm::NetSpec net2;         // Z -> g
  lstm::NetSpec net3;         // Phi -> r_dot (PhyLSTM3 only)

  /// Every network gets the same LSTM widths and hidden FC widths; the final
  /// FC layer is sized to each network's output.
  static ModelConfig standard(ModelKind kind, PhiVariant phi, std::size_t dof,
                              std::vector<std::size_t> lstm_widths,
                              std::vector<std::size_t> fc_hidden = {},
                              std::optional<double> phi_exponent = std::nullopt);
  void validate() const;
};

/// Samples for one loss evaluation. Rows [0, n_measured) of `ag` have
/// measured {u, udot}; the remaining rows are collocation inputs.
struct LossBatch {
  Tensor ag;    // [S, T, 1]
  Tensor u;     // [n_measured, T, DOF]
  Tensor udot;  // [n_measured, T, DOF]
  double dt = 0.0;

  std::size_t samples() const noexcept { return ag.shape().samples; }
  std::size_t measured() const noexcept { return u.shape().samples; }
};

struct LossTerms {
  double total = 0.0;
  double data = 0.0;
  double equality = 0.0;
  double governing = 0.0;
  double hysteretic = 0.0;  // zero for PhyLSTM2
};

struct Prediction {
  SeqBatch z;                     // [S, T, 3 DOF]: u | udot | r
  SeqBatch g;                     // [S, T, DOF]
  std::optional<SeqBatch> r_dot;  // PhyLSTM3 only
};

/// Coupled multi-network model. Parameters live in one flat vector laid out
/// as theta1 | theta2 | theta3, each in lstm::NetParams flat order.
class PhyModel {
 public:
  explicit PhyModel(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t parameter_count() const noexcept { return n1_ + n2_ + n3_; }
  std::size_t network_count() const noexcept { return config_.kind == ModelKind::PhyLstm3 ? 3 : 2; }
  std::span<const double> network(std::span<const double> theta, std::size_t k) const;
  const lstm::NetSpec& network_spec(std::size_t k) const;

  std::vector<double> init(RngStream& rng) const;

  /// Composite objective and, when `grad` is non-empty, its gradient.
  /// Throws NumericFailure naming the first non-finite term.
  LossTerms loss(std::span<const double> theta, const LossBatch& batch,
                 const LossWeights& weights, std::span<double> grad) const;

  Prediction predict(std::span<const double> theta, const SeqBatch& ag) const;

 private:
  ModelConfig config_;
  std::size_t n1_ = 0, n2_ = 0, n3_ = 0;
};

}  // namespace phylstm::physics
