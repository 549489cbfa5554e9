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
#include "phylstm/physics/physics.hpp"

#include <cmath>
#include <string>

#include "phylstm/core/error.hpp"

namespace phylstm::physics {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), std::string(what) + ": shape mismatch " + to_string(a.shape()) +
                                      " vs " + to_string(b.shape()));
}

void require_same(GradTape& tape, Var a, Var b, const char* what) {
  require_same(tape.value(a), tape.value(b), what);
}

double sum_sq_diff(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

TimeStencil derivative_stencil(double dt) {
  require(dt > 0.0 && std::isfinite(dt), "derivative_stencil: dt must be positive");
  const double w = 1.0 / (2.0 * dt);
  TimeStencil s;
  s.interior = {{-1, -w}, {1, w}};
  s.head = {{{0, -3.0 * w}, {1, 4.0 * w}, {2, -w}}};
  s.tail = {{{0, 3.0 * w}, {-1, -4.0 * w}, {-2, w}}};
  s.min_steps = 3;
  return s;
}

Var time_derivative(GradTape& tape, Var x, double dt) {
  require(tape.value(x).shape().steps >= 3, "time_derivative: needs at least 3 steps");
  return tape.time_filter(x, derivative_stencil(dt));
}

SeqBatch time_derivative(const SeqBatch& x) {
  GradTape tape;
  const Var v = time_derivative(tape, tape.constant(x.values()), x.dt());
  return SeqBatch(tape.value(v), x.dt());
}

Var data_loss(GradTape& tape, Var z1, Var z2, Var u_d, Var udot_d) {
  require_same(tape, z1, u_d, "data_loss");
  require_same(tape, z2, udot_d, "data_loss");
  return tape.add(tape.sum_of_squares(tape.sub(z1, u_d)), tape.sum_of_squares(tape.sub(z2, udot_d)));
}

Var equality_loss(GradTape& tape, Var z1_dot, Var z2) {
  require_same(tape, z1_dot, z2, "equality_loss");
  return tape.sum_of_squares(tape.sub(z1_dot, z2));
}

Var governing_loss(GradTape& tape, Var z2_dot, Var g, Var gamma_ag) {
  require_same(tape, z2_dot, g, "governing_loss");
  require_same(tape, z2_dot, gamma_ag, "governing_loss");
  return tape.sum_of_squares(tape.add(tape.add(z2_dot, g), gamma_ag));
}

Var hysteretic_loss(GradTape& tape, Var r_dot_pred, Var z3_dot) {
  require_same(tape, r_dot_pred, z3_dot, "hysteretic_loss");
  return tape.sum_of_squares(tape.sub(r_dot_pred, z3_dot));
}

double data_loss(const Tensor& z1, const Tensor& z2, const Tensor& u_d, const Tensor& udot_d) {
  require_same(z1, u_d, "data_loss");
  require_same(z2, udot_d, "data_loss");
  return sum_sq_diff(z1, u_d) + sum_sq_diff(z2, udot_d);
}

double equality_loss(const Tensor& z1_dot, const Tensor& z2) {
  require_same(z1_dot, z2, "equality_loss");
  return sum_sq_diff(z1_dot, z2);
}

double governing_loss(const Tensor& z2_dot, const Tensor& g, const Tensor& ag,
                      std::span<const double> gamma) {
  require_same(z2_dot, g, "governing_loss");
  const Tensor gag = broadcast_gamma(ag, gamma);
  require_same(z2_dot, gag, "governing_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = z2_dot.data()[i] + g.data()[i] + gag.data()[i];
    acc += r * r;
  }
  return acc;
}

double hysteretic_loss(const Tensor& r_dot_pred, const Tensor& z3_dot) {
  require_same(r_dot_pred, z3_dot, "hysteretic_loss");
  return sum_sq_diff(r_dot_pred, z3_dot);
}

Tensor broadcast_gamma(const Tensor& ag, std::span<const double> gamma) {
  require(ag.shape().channels == 1, "broadcast_gamma: ag must have one channel");
  require(!gamma.empty(), "broadcast_gamma: empty force distribution");
  const Shape s = ag.shape();
  Tensor out({s.samples, s.steps, gamma.size()});
  for (std::size_t i = 0; i < s.samples * s.steps; ++i)
    for (std::size_t d = 0; d < gamma.size(); ++d) out.data()[i * gamma.size() + d] = gamma[d] * ag.data()[i];
  return out;
}

std::size_t phi_channels(std::size_t dof, PhiVariant variant) {
  return (variant == PhiVariant::Full ? 5 : 2) * dof;
}

Var build_phi(GradTape& tape, Var z, std::size_t dof, PhiVariant variant,
              std::optional<double> exponent) {
  require(dof >= 1 && tape.value(z).shape().channels == 3 * dof,
          "build_phi: Z must have 3 * dof channels");
  const Var drift = tape.story_drift(tape.slice_channels(z, dof, dof), dof);
  const Var r = tape.slice_channels(z, 2 * dof, dof);
  if (variant == PhiVariant::Simplified) {
    const Var parts[] = {drift, r};
    return tape.concat_channels(parts);
  }
  require(exponent.has_value() && *exponent >= 1.0,
          "build_phi: full library needs a Bouc-Wen exponent n >= 1");
  const double n = *exponent;
  const Var parts[] = {drift, tape.abs_pow(drift, 1.0), r, tape.abs_pow(r, n - 1.0), tape.abs_pow(r, n)};
  return tape.concat_channels(parts);
}

SeqBatch build_phi(const SeqBatch& z, std::size_t dof, PhiVariant variant,
                   std::optional<double> exponent) {
  GradTape tape;
  const Var phi = build_phi(tape, tape.constant(z.values()), dof, variant, exponent);
  return SeqBatch(tape.value(phi), z.dt());
}

void LossWeights::validate() const {
  for (double w : {alpha, beta, gamma, eta})
    require(w >= 0.0 && std::isfinite(w), "loss weights must be finite and non-negative");
}

ModelConfig ModelConfig::standard(ModelKind kind, PhiVariant phi, std::size_t dof,
                                  std::vector<std::size_t> lstm_widths,
                                  std::vector<std::size_t> fc_hidden,
                                  std::optional<double> phi_exponent) {
  ModelConfig c;
  c.kind = kind;
  c.phi = phi;
  c.phi_exponent = phi_exponent;
  c.dof = dof;
  c.gamma.assign(dof, 1.0);
  auto make = [&](std::size_t in, std::size_t out) {
    lstm::NetSpec s;
    s.input_channels = in;
    s.output_channels = out;
    s.lstm_layers = lstm_widths;
    s.fc_layers = fc_hidden;
    s.fc_layers.push_back(out);
    return s;
  };
  c.net1 = make(1, 3 * dof);
  c.net2 = make(3 * dof, dof);
  if (kind == ModelKind::PhyLstm3) c.net3 = make(phi_channels(dof, phi), dof);
  return c;
}

void ModelConfig::validate() const {
  require(dof >= 1, "model: dof must be at least 1");
  require(gamma.size() == dof, "model: force distribution must have dof entries");
  net1.validate();
  net2.validate();
  require(net1.input_channels == 1 && net1.output_channels == 3 * dof,
          "model: network 1 must map 1 channel to 3 * dof channels");
  require(net2.input_channels == 3 * dof && net2.output_channels == dof,
          "model: network 2 must map 3 * dof channels to dof channels");
  if (kind == ModelKind::PhyLstm3) {
    net3.validate();
    require(net3.input_channels == phi_channels(dof, phi) && net3.output_channels == dof,
            "model: network 3 must map the Phi library to dof channels");
    if (phi == PhiVariant::Full)
      require(phi_exponent.has_value() && *phi_exponent >= 1.0,
              "model: full Phi library needs an exponent n >= 1");
  }
}

PhyModel::PhyModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  n1_ = config_.net1.parameter_count();
  n2_ = config_.net2.parameter_count();
  n3_ = config_.kind == ModelKind::PhyLstm3 ? config_.net3.parameter_count() : 0;
}

std::span<const double> PhyModel::network(std::span<const double> theta, std::size_t k) const {
  require(theta.size() == parameter_count(), "model: parameter vector has the wrong size");
  require(k < network_count(), "model: no such network");
  if (k == 0) return theta.subspan(0, n1_);
  if (k == 1) return theta.subspan(n1_, n2_);
  return theta.subspan(n1_ + n2_, n3_);
}

const lstm::NetSpec& PhyModel::network_spec(std::size_t k) const {
  require(k < network_count(), "model: no such network");
  return k == 0 ? config_.net1 : k == 1 ? config_.net2 : config_.net3;
}

std::vector<double> PhyModel::init(RngStream& rng) const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  for (std::size_t k = 0; k < network_count(); ++k) {
    RngStream sub = rng.derive("network", k);
    const lstm::NetParams p = lstm::init_params(network_spec(k), sub);
    theta.insert(theta.end(), p.flat().begin(), p.flat().end());
  }
  return theta;
}

LossTerms PhyModel::loss(std::span<const double> theta, const LossBatch& batch,
                         const LossWeights& weights, std::span<double> grad) const {
  weights.validate();
  const std::size_t dof = config_.dof;
  const Shape as = batch.ag.shape();
  const std::size_t nm = batch.measured();
  require(as.channels == 1 && as.samples >= 1 && as.steps >= 3, "loss: ag must be [S, T>=3, 1]");
  require(nm >= 1 && nm <= as.samples, "loss: need 1..S measured samples");
  require(batch.u.shape() == Shape{nm, as.steps, dof} && batch.udot.shape() == batch.u.shape(),
          "loss: measured response must be [n_measured, T, dof]");
  require(batch.dt > 0.0, "loss: dt must be positive");
  require(grad.empty() || grad.size() == parameter_count(), "loss: gradient buffer has the wrong size");

  const bool train = !grad.empty();
  GradTape tape;
  std::vector<lstm::NetVars> vars;
  for (std::size_t k = 0; k < network_count(); ++k) {
    const std::span<const double> part = network(theta, k);
    const lstm::NetParams p(network_spec(k), std::vector<double>(part.begin(), part.end()));
    vars.push_back(lstm::bind(tape, p, train));
  }

  const Var ag = tape.constant(batch.ag);
  const Var z = lstm::forward(tape, config_.net1, vars[0], ag);
  const Var z_dot = time_derivative(tape, z, batch.dt);
  const Var g = lstm::forward(tape, config_.net2, vars[1], z);

  const Var z1m = tape.slice_samples(tape.slice_channels(z, 0, dof), 0, nm);
  const Var z2m = tape.slice_samples(tape.slice_channels(z, dof, dof), 0, nm);
  const Var jd = data_loss(tape, z1m, z2m, tape.constant(batch.u), tape.constant(batch.udot));
  const Var je = equality_loss(tape, tape.slice_channels(z_dot, 0, dof), tape.slice_channels(z, dof, dof));
  const Var jg = governing_loss(tape, tape.slice_channels(z_dot, dof, dof), g,
                                tape.constant(broadcast_gamma(batch.ag, config_.gamma)));

  Var total = tape.add(tape.add(tape.scale(jd, weights.alpha), tape.scale(je, weights.beta)),
                       tape.scale(jg, weights.gamma));
  Var jh;
  if (config_.kind == ModelKind::PhyLstm3) {
    const Var phi = build_phi(tape, z, dof, config_.phi, config_.phi_exponent);
    const Var r_dot = lstm::forward(tape, config_.net3, vars[2], phi);
    jh = hysteretic_loss(tape, r_dot, tape.slice_channels(z_dot, 2 * dof, dof));
    total = tape.add(total, tape.scale(jh, weights.eta));
  }

  LossTerms terms;
  terms.data = tape.value(jd).item();
  terms.equality = tape.value(je).item();
  terms.governing = tape.value(jg).item();
  terms.hysteretic = jh.valid() ? tape.value(jh).item() : 0.0;
  terms.total = tape.value(total).item();
  const std::pair<const char*, double> named[] = {{"data", terms.data},
                                                  {"equality", terms.equality},
                                                  {"governing", terms.governing},
                                                  {"hysteretic", terms.hysteretic},
                                                  {"total", terms.total}};
  for (const auto& [name, v] : named)
    if (!std::isfinite(v)) throw_error(ErrorKind::NumericFailure, std::string("loss: ") + name + " term is not finite");

  if (train) {
    tape.backward(total);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < network_count(); ++k) {
      const std::size_t n = network_spec(k).parameter_count();
      lstm::gather_gradients(tape, vars[k], grad.subspan(offset, n));
      offset += n;
    }
  }
  return terms;
}

Prediction PhyModel::predict(std::span<const double> theta, const SeqBatch& ag) const {
  require(ag.channels() == 1, "predict: ag must have one channel");
  auto params = [&](std::size_t k) {
    const std::span<const double> part = network(theta, k);
    return lstm::NetParams(network_spec(k), std::vector<double>(part.begin(), part.end()));
  };
  SeqBatch z = lstm::deep_forward(ag, params(0));
  SeqBatch g = lstm::deep_forward(z, params(1));
  std::optional<SeqBatch> r_dot;
  if (config_.kind == ModelKind::PhyLstm3)
    r_dot = lstm::deep_forward(build_phi(z, config_.dof, config_.phi, config_.phi_exponent), params(2));
  return Prediction{std::move(z), std::move(g), std::move(r_dot)};
}

}  // namespace phylstm::physics
