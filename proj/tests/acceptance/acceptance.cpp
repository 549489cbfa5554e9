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
// Acceptance suite: one PASS/FAIL line per criterion. Criteria 4 to 6 train
// the desk-scale models through the command pipeline and take hours.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "phylstm/core/error.hpp"
#include "phylstm/core/grad_check.hpp"
#include "phylstm/core/parallel.hpp"
#include "phylstm/core/rng.hpp"
#include "phylstm/io/binary.hpp"
#include "phylstm/lstm/net.hpp"
#include "phylstm/optim/optim.hpp"
#include "phylstm/physics/physics.hpp"
#include "phylstm/pipeline/commands.hpp"
#include "phylstm/selection/selection.hpp"
#include "phylstm/simulate/bouc_wen.hpp"
#include "phylstm/simulate/excitation.hpp"

#ifndef PHYLSTM_ACCEPTANCE_CONFIG
#define PHYLSTM_ACCEPTANCE_CONFIG "desk_scale.json"
#endif

namespace {

using namespace phylstm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

// Tolerances and limits, one block per criterion.
constexpr double kGradTol = 1e-4;             // 1: max relative error
constexpr double kFastRuntimeS = 60.0;        // 1, 2, 3
constexpr double kOrderRatioLow = 12.0;       // 2: mean-square ratio on halving dt, nominal 16
constexpr double kOrderRatioHigh = 20.0;
constexpr double kLinearRelTol = 1e-4;        // 3
constexpr double kReferenceFrequencyHz = 1.13;
constexpr double kFrequencyRelTol = 0.005;
constexpr double kSaturationRelTol = 0.01;
constexpr double kMedianGammaU = 0.85;        // 4
constexpr double kFractionAboveU = 0.6;
constexpr double kGammaLevel = 0.9;
constexpr double kMedianGammaG = 0.85;
constexpr std::size_t kMinTestRecords = 50;
constexpr std::size_t kMaxHidden = 50;
constexpr std::size_t kAdamEpochs = 2000;
constexpr std::size_t kMaxLbfgs = 500;
constexpr double kTargetRuntimeMin = 120.0;
constexpr std::size_t kSelectionRecords = 97;  // 7
constexpr std::size_t kClusters = 7;
constexpr double kResonanceRelTol = 0.10;
constexpr double kQuadraticGradTol = 1e-8;     // 8
constexpr std::size_t kQuadraticMaxIter = 15;
constexpr double kRosenbrockTol = 1e-10;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

lstm::NetSpec spec(std::size_t in, std::size_t out, std::vector<std::size_t> lstm_layers,
                   std::vector<std::size_t> fc) {
  lstm::NetSpec s;
  s.input_channels = in;
  s.output_channels = out;
  s.lstm_layers = std::move(lstm_layers);
  s.fc_layers = std::move(fc);
  return s;
}

Tensor random_tensor(RngStream& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  rng.fill_uniform(t.data(), lo, hi);
  return t;
}

double cell_gradient_error() {
  const std::size_t in = 3, h = 2, rows = 2;
  const lstm::NetSpec s = spec(in, h, {h}, {h});
  RngStream rng(101);
  lstm::NetParams p(s);
  rng.fill_uniform(p.flat(), -1.0, 1.0);
  const Tensor x = random_tensor(rng, {1, rows, in});
  const Tensor h0 = random_tensor(rng, {1, rows, h});
  const Tensor c0 = random_tensor(rng, {1, rows, h});
  const Tensor wh = random_tensor(rng, {1, rows, h});
  const Tensor wc = random_tensor(rng, {1, rows, h});
  const std::size_t n_layer = 4 * h * in + 4 * h * h + 4 * h;
  std::vector<double> theta(p.flat().begin(), p.flat().begin() + n_layer);
  for (const Tensor* t : {&x, &h0, &c0}) theta.insert(theta.end(), t->data().begin(), t->data().end());

  LossGradFn fn = [&](std::span<const double> v, std::span<double> g) {
    lstm::NetParams np(s);
    std::copy(v.begin(), v.begin() + n_layer, np.flat().begin());
    Tensor xv = x;
    lstm::CellState st{h0, c0};
    std::size_t o = n_layer;
    for (Tensor* t : {&xv, &st.h, &st.c}) {
      std::copy(v.begin() + o, v.begin() + o + t->size(), t->data().begin());
      o += t->size();
    }
    const lstm::CellState next = lstm::lstm_cell_step(xv, st, np.lstm_layer(0));
    double loss = 0.0;
    for (std::size_t i = 0; i < next.h.size(); ++i)
      loss += wh.data()[i] * next.h.data()[i] + wc.data()[i] * next.c.data()[i];
    if (!g.empty()) {
      const lstm::CellGradients cg = lstm::lstm_cell_backward(xv, st, np.lstm_layer(0), wh, wc);
      std::size_t k = 0;
      for (const auto* part : {&cg.w_input, &cg.w_hidden, &cg.bias})
        for (double d : *part) g[k++] = d;
      for (const Tensor* t : {&cg.x, &cg.h_prev, &cg.c_prev})
        for (double d : t->data()) g[k++] = d;
    }
    return loss;
  };
  return grad_check(fn, theta, 1e-6).max_rel_error;
}

double deep_gradient_error() {
  const lstm::NetSpec s = spec(2, 3, {4, 3}, {3, 3});
  RngStream rng(102);
  const lstm::NetParams p0 = lstm::init_params(s, rng);
  const Tensor x = random_tensor(rng, {2, 12, 2});
  const Tensor target = random_tensor(rng, {2, 12, 3});
  LossGradFn fn = [&](std::span<const double> v, std::span<double> g) {
    lstm::NetParams p(s, std::vector<double>(v.begin(), v.end()));
    GradTape tape;
    const lstm::NetVars vars = lstm::bind(tape, p, true);
    const Var y = lstm::forward(tape, s, vars, tape.constant(x));
    const Var loss = tape.sum_of_squares(tape.sub(y, tape.constant(target)));
    if (!g.empty()) {
      tape.backward(loss);
      lstm::gather_gradients(tape, vars, g);
    }
    return tape.value(loss).item();
  };
  return grad_check(fn, p0.flat(), 1e-4).max_rel_error;
}

double model_gradient_error(physics::ModelKind kind, std::uint64_t seed) {
  const physics::PhyModel model(
      physics::ModelConfig::standard(kind, physics::PhiVariant::Simplified, 1, {2, 2}, {2}));
  RngStream rng(seed);
  physics::LossBatch b;
  b.ag = random_tensor(rng, {2, 16, 1});
  b.u = random_tensor(rng, {1, 16, 1}, -0.5, 0.5);
  b.udot = random_tensor(rng, {1, 16, 1}, -0.5, 0.5);
  b.dt = 0.1;
  std::vector<double> theta = model.init(rng);
  for (double& v : theta) v += rng.uniform(-0.3, 0.3);
  const physics::LossWeights w;
  LossGradFn fn = [&](std::span<const double> th, std::span<double> g) { return model.loss(th, b, w, g).total; };
  return grad_check(fn, theta, 1e-5).max_rel_error;
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  const double cell = cell_gradient_error();
  const double deep = deep_gradient_error();
  const double m2 = model_gradient_error(physics::ModelKind::PhyLstm2, 103);
  const double m3 = model_gradient_error(physics::ModelKind::PhyLstm3, 104);
  const double secs = seconds_since(t0);
  const double worst = std::max({cell, deep, m2, m3});
  return {worst < kGradTol && secs < kFastRuntimeS,
          fmt::format("max rel error: cell {:.2e}, deep {:.2e}, PhyLSTM2 {:.2e}, PhyLSTM3 {:.2e} (< {:.0e}); {:.1f} s",
                      cell, deep, m2, m3, kGradTol, secs)};
}

// ---------------------------------------------------------------- 2

struct ResidualMeans {
  double equality = 0.0, governing = 0.0;
};

// Mean-square J_e and J_g residuals of a simulator trajectory driven by a
// smooth excitation sampled at dt, with the oracle g from the trajectory.
ResidualMeans residual_means(double dt, std::size_t substeps) {
  const simulate::BoucWenSystem sys = simulate::BoucWenSystem::sdof_default();
  const std::size_t n = simulate::sample_count(30.0, 1.0 / dt);
  std::vector<double> ag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    ag[i] = 6.0 * std::sin(2 * kPi * 0.7 * t) + 4.0 * std::sin(2 * kPi * 1.3 * t + 0.4) +
            2.0 * std::sin(2 * kPi * 2.9 * t + 1.1);
  }
  const simulate::Trajectory tr = simulate::integrate(sys, ag, dt, substeps);
  auto series = [&](const std::vector<double>& v) { return Tensor({1, n, 1}, v); };
  const Tensor u = series(tr.u), v = series(tr.u_dot), g = series(tr.g), a = series(ag);
  const Tensor u_dot = physics::time_derivative(SeqBatch(u, dt)).values();
  const Tensor v_dot = physics::time_derivative(SeqBatch(v, dt)).values();
  const std::vector<double> gamma{1.0};
  return {physics::equality_loss(u_dot, v) / static_cast<double>(n),
          physics::governing_loss(v_dot, g, a, gamma) / static_cast<double>(n)};
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  // The same internal step (dt / 32) keeps integration error far below the FD truncation.
  const ResidualMeans coarse = residual_means(0.02, 32);
  const ResidualMeans fine = residual_means(0.01, 16);
  const double re = coarse.equality / fine.equality, rg = coarse.governing / fine.governing;
  const double secs = seconds_since(t0);
  const bool ok = re > kOrderRatioLow && re < kOrderRatioHigh && rg > kOrderRatioLow && rg < kOrderRatioHigh;
  return {ok && secs < kFastRuntimeS,
          fmt::format("mean-square ratio dt/(dt/2): J_e {:.2f}, J_g {:.2f} (expected 16, accepted ({}, {})); "
                      "J_e {:.3e} -> {:.3e}, J_g {:.3e} -> {:.3e}; {:.1f} s",
                      re, rg, kOrderRatioLow, kOrderRatioHigh, coarse.equality, fine.equality, coarse.governing,
                      fine.governing, secs)};
}

// ---------------------------------------------------------------- 3

Verdict criterion3() {
  const auto t0 = Clock::now();
  simulate::BoucWenSystem sys = simulate::BoucWenSystem::sdof_default();

  // Linear system under resonant sine forcing from rest against the closed form.
  sys.lambda = 1.0;
  const double w = std::sqrt(25000.0 / 500.0), z = 350.0 / (2.0 * std::sqrt(25000.0 * 500.0));
  const double dt = 0.002;
  const std::size_t n = simulate::sample_count(30.0, 1.0 / dt);
  std::vector<double> ag(n);
  for (std::size_t i = 0; i < n; ++i) ag[i] = std::sin(w * static_cast<double>(i) * dt);
  const simulate::Trajectory tr = simulate::integrate(sys, ag, dt);
  const double a = w * w - w * w, b = 2.0 * z * w * w;  // forcing frequency equals w
  const double c = -a / (a * a + b * b), d = b / (a * a + b * b);
  const double wd = w * std::sqrt(1.0 - z * z), e = -d, f = (z * w * e - w * c) / wd;
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double exact =
        c * std::sin(w * t) + d * std::cos(w * t) + std::exp(-z * w * t) * (e * std::cos(wd * t) + f * std::sin(wd * t));
    err = std::max(err, std::abs(tr.u[i] - exact));
    peak = std::max(peak, std::abs(exact));
  }
  const double lin_rel = err / peak;

  const double fn = simulate::BoucWenSystem::sdof_default().natural_frequencies_hz().at(0);
  const double fn_rel = std::abs(fn - kReferenceFrequencyHz) / kReferenceFrequencyHz;

  // Monotonic loading: constant positive drift velocity integrated with RK4.
  const simulate::BoucWenSystem bw = simulate::BoucWenSystem::sdof_default();
  const simulate::Story& s = bw.stories[0];
  const double r_expected = std::pow(1.0 / (s.alpha + s.beta), 1.0 / s.exponent);
  auto rdot = [&](double r) { return simulate::boucwen_rhs(bw, std::vector<double>{0.0, 0.5, r}, 0.0).r_dot[0]; };
  double r = 0.0;
  const double h = 1e-3;
  for (int i = 0; i < 20000; ++i) {
    const double k1 = rdot(r), k2 = rdot(r + 0.5 * h * k1), k3 = rdot(r + 0.5 * h * k2), k4 = rdot(r + h * k3);
    r += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  const double sat_rel = std::abs(r - r_expected) / r_expected;
  const double secs = seconds_since(t0);
  const bool ok = lin_rel < kLinearRelTol && fn_rel < kFrequencyRelTol && sat_rel < kSaturationRelTol;
  return {ok && secs < kFastRuntimeS,
          fmt::format("linear rel error {:.2e} (< {:.0e}); fn {:.4f} Hz, {:.2f}% from {} Hz; r_sat {:.5f} vs {:.5f} "
                      "({:.3f}%); {:.1f} s",
                      lin_rel, kLinearRelTol, fn, 100.0 * fn_rel, kReferenceFrequencyHz, r, r_expected, 100.0 * sat_rel,
                      secs)};
}

// ---------------------------------------------------------------- 4, 5, 6

struct Workspace {
  fs::path root;
  pipeline::RunConfig config;
  pipeline::CommandContext ctx;
};

struct TrainedRun {
  optim::TrainResult result;
  pipeline::EvaluationReport report;
  double minutes = 0.0;
  fs::path train_dir, eval_dir;
};

std::optional<Workspace> g_ws;
std::optional<TrainedRun> g_run3, g_run2;
std::string g_setup_error;

std::string check_budget(const pipeline::RunConfig& c) {
  std::vector<std::string> issues;
  const simulate::DatasetConfig& d = c.data;
  const std::size_t n_val = static_cast<std::size_t>(std::llround(d.n_known * d.validation_fraction));
  if (d.n_known - n_val != 10) issues.push_back("train records must be 10");
  if (d.n_collocation != 50) issues.push_back("collocation records must be 50");
  if (d.n_test < kMinTestRecords) issues.push_back("need at least 50 test records");
  if (simulate::sample_count(d.duration_s, d.fs_hz) != 1501 || d.fs_hz != 50.0) issues.push_back("need 1501 steps at 50 Hz");
  if (d.intensity_scales != std::vector<double>{1.0}) issues.push_back("intensity scales must be {1}");
  if (!(c.system == simulate::BoucWenSystem::sdof_default())) issues.push_back("system must be the default");
  for (std::size_t w : c.model.lstm_layers)
    if (w > kMaxHidden) issues.push_back("LSTM width above 50");
  for (std::size_t w : c.model.fc_hidden)
    if (w > kMaxHidden) issues.push_back("FC width above 50");
  const auto& a = c.schedule.adam;
  if (a.size() != 2 || a[0].epochs != kAdamEpochs || a[1].epochs != kAdamEpochs)
    issues.push_back("schedule must be 2000 + 2000 Adam epochs");
  if (c.schedule.lbfgs.max_iter > kMaxLbfgs) issues.push_back("L-BFGS above 500 iterations");
  if (c.model.kind != physics::ModelKind::PhyLstm3) issues.push_back("model must be phylstm3");
  std::string out;
  for (const std::string& s : issues) out += (out.empty() ? "" : "; ") + s;
  return out;
}

bool setup(const fs::path& workdir, const fs::path& config_path, std::size_t log_every) {
  try {
    Workspace ws;
    ws.root = workdir;
    ws.config = pipeline::load_run_config(config_path.string());
    if (const std::string issues = check_budget(ws.config); !issues.empty()) {
      g_setup_error = "config outside the criterion budget: " + issues;
      return false;
    }
    ws.ctx.force = true;
    ws.ctx.threads = resolve_threads(0);
    ws.ctx.log = &std::cerr;
    ws.ctx.log_every = log_every;
    fs::create_directories(workdir);
    pipeline::cmd_generate(ws.config, workdir / "data", ws.ctx);
    g_ws = std::move(ws);
    return true;
  } catch (const std::exception& e) {
    g_setup_error = e.what();
    return false;
  }
}

TrainedRun train_and_score(physics::ModelKind kind, const std::string& name) {
  const Workspace& ws = *g_ws;
  pipeline::RunConfig c = ws.config;
  c.model.kind = kind;
  TrainedRun run;
  run.train_dir = ws.root / ("train_" + name);
  run.eval_dir = ws.root / ("eval_" + name);
  const fs::path pred_dir = ws.root / ("pred_" + name);
  std::cerr << "== training " << name << "\n";
  const auto t0 = Clock::now();
  run.result = pipeline::cmd_train(c, ws.root / "data", run.train_dir, ws.ctx);
  run.minutes = seconds_since(t0) / 60.0;
  pipeline::cmd_predict(c, run.train_dir / "checkpoint.phyl", ws.root / "data", "test", pred_dir, ws.ctx);
  run.report = pipeline::cmd_evaluate(c, pred_dir, ws.root / "data", run.eval_dir, ws.ctx);
  return run;
}

const evaluate::RegressionSummary* summary_of(const pipeline::EvaluationReport& r, const std::string& channel) {
  for (const auto& [name, s] : r.summaries)
    if (name == channel && s) return &*s;
  return nullptr;
}

Verdict criterion4() {
  if (!g_ws) return {false, "setup failed: " + g_setup_error};
  try {
    g_run3 = train_and_score(physics::ModelKind::PhyLstm3, "phylstm3");
  } catch (const std::exception& e) {
    return {false, std::string("training failed: ") + e.what()};
  }
  const TrainedRun& run = *g_run3;
  const auto* u = summary_of(run.report, "u1");
  const auto* g = summary_of(run.report, "g1");
  if (!u || !g) return {false, "displacement or restoring-force gamma undefined for every record"};
  const bool completed = run.result.status == optim::TrainStatus::Completed;
  const bool ok = completed && u->count >= kMinTestRecords && u->median >= kMedianGammaU &&
                  u->fraction_above >= kFractionAboveU && g->median >= kMedianGammaG;
  return {ok, fmt::format("{} test records; u1 median {:.4f} (>= {}), u1 fraction > {} {:.3f} (>= {}); g1 median "
                          "{:.4f} (>= {}); r1 median {:.4f}; training {} at epoch {}, {:.1f} min (target <= {:.0f})",
                          u->count, u->median, kMedianGammaU, kGammaLevel, u->fraction_above, kFractionAboveU,
                          g->median, kMedianGammaG,
                          summary_of(run.report, "r1") ? summary_of(run.report, "r1")->median : NAN,
                          optim::to_string(run.result.status), run.result.best_epoch, run.minutes,
                          kTargetRuntimeMin)};
}

Verdict criterion5() {
  if (!g_ws) return {false, "setup failed: " + g_setup_error};
  if (!g_run3) return {false, "criterion 4 run unavailable"};
  try {
    g_run2 = train_and_score(physics::ModelKind::PhyLstm2, "phylstm2");
  } catch (const std::exception& e) {
    return {false, std::string("training failed: ") + e.what()};
  }
  const auto* u3 = summary_of(g_run3->report, "u1");
  const auto* u2 = summary_of(g_run2->report, "u1");
  if (!u3 || !u2) return {false, "displacement gamma undefined"};
  return {u3->median >= u2->median,
          fmt::format("u1 median PhyLSTM3 {:.4f} vs PhyLSTM2 {:.4f} (g1 median {:.4f} vs {:.4f}); PhyLSTM2 {:.1f} min",
                      u3->median, u2->median, summary_of(g_run3->report, "g1")->median,
                      summary_of(g_run2->report, "g1") ? summary_of(g_run2->report, "g1")->median : NAN,
                      g_run2->minutes)};
}

Verdict criterion6() {
  if (!g_ws) return {false, "setup failed: " + g_setup_error};
  if (!g_run3) return {false, "criterion 4 run unavailable"};
  TrainedRun again;
  try {
    again = train_and_score(physics::ModelKind::PhyLstm3, "phylstm3_repeat");
  } catch (const std::exception& e) {
    return {false, std::string("training failed: ") + e.what()};
  }
  const bool same_ckpt = io::read_file(g_run3->train_dir / "checkpoint.phyl") ==
                         io::read_file(again.train_dir / "checkpoint.phyl");
  const bool same_scores = io::read_file(g_run3->eval_dir / "scores.csv") == io::read_file(again.eval_dir / "scores.csv");
  const bool same_history = io::read_file(g_run3->train_dir / "history.csv") ==
                            io::read_file(again.train_dir / "history.csv");
  return {same_ckpt && same_scores,
          fmt::format("checkpoint {}, scores.csv {}, history.csv {}", same_ckpt ? "identical" : "DIFFERENT",
                      same_scores ? "identical" : "DIFFERENT", same_history ? "identical" : "DIFFERENT")};
}

// ---------------------------------------------------------------- 7

Verdict criterion7() {
  const auto t0 = Clock::now();
  RngStream root(707);
  std::vector<std::vector<double>> records;
  for (std::size_t i = 0; i < kSelectionRecords; ++i) {
    RngStream rng = root.derive("record", i);
    const double rms = rng.uniform(1.0, 10.0);
    records.push_back(simulate::blwn_generate(rng, 30.0, 50.0, rms).ag);
  }
  std::vector<std::span<const double>> spans(records.begin(), records.end());
  const selection::SpectrumGrid grid = selection::SpectrumGrid::log_spaced();
  const selection::Matrix spectra = selection::response_spectra(spans, 0.02, grid, resolve_threads(0));
  const selection::Matrix features = selection::standardize(spectra);
  RngStream rng = root.derive("kmeans");
  const selection::ClusterResult cr = selection::kmeans_cluster(features, kClusters, rng);
  const std::vector<std::size_t> reps = selection::select_representatives(cr, features);
  bool monotone = true;
  for (std::size_t i = 1; i < cr.inertia.size(); ++i) monotone = monotone && cr.inertia[i] <= cr.inertia[i - 1];
  const std::set<std::size_t> distinct(reps.begin(), reps.end());

  // Resonant sine at T0 = 1 s for 60 s.
  const double t_res = 1.0, dt = 0.005;
  std::vector<double> sine(simulate::sample_count(60.0, 1.0 / dt));
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(2 * kPi * static_cast<double>(i) * dt / t_res);
  selection::SpectrumGrid one;
  one.periods = {t_res};
  one.damping = 0.05;
  const double amp = selection::response_spectrum(sine, dt, one).at(0);
  const double expected = 1.0 / (2.0 * one.damping);
  const double rel = std::abs(amp - expected) / expected;
  const bool ok = reps.size() == kClusters && distinct.size() == kClusters && monotone && rel < kResonanceRelTol;
  return {ok, fmt::format("{} records -> {} distinct representatives, {} iterations, inertia {} ({:.4g} -> {:.4g}); "
                          "resonant Sa/PGA {:.3f} vs {:.1f} ({:.2f}%); {:.1f} s",
                          kSelectionRecords, distinct.size(), cr.iterations,
                          monotone ? "non-increasing" : "INCREASED", cr.inertia.front(), cr.inertia.back(), amp,
                          expected, 100.0 * rel, seconds_since(t0))};
}

// ---------------------------------------------------------------- 8

Verdict criterion8() {
  // Random-rotation quadratic, eigenvalues geometric in [1, 3].
  const std::size_t n = 10;
  RngStream rng(808);
  std::vector<double> q(n * n), a(n * n, 0.0), x_star(n);
  rng.fill_gaussian(q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) d += q[i * n + k] * q[j * n + k];
      for (std::size_t k = 0; k < n; ++k) q[i * n + k] -= d * q[j * n + k];
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += q[i * n + k] * q[i * n + k];
    for (std::size_t k = 0; k < n; ++k) q[i * n + k] /= std::sqrt(norm);
  }
  for (std::size_t e = 0; e < n; ++e) {
    const double lambda = std::pow(3.0, static_cast<double>(e) / static_cast<double>(n - 1));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] += lambda * q[e * n + i] * q[e * n + j];
  }
  rng.fill_uniform(x_star, -3.0, 3.0);
  auto quad = [&](std::span<const double> x, std::span<double> g) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ai = 0.0;
      for (std::size_t j = 0; j < n; ++j) ai += a[i * n + j] * (x[j] - x_star[j]);
      if (!g.empty()) g[i] = ai;
      f += 0.5 * (x[i] - x_star[i]) * ai;
    }
    return f;
  };
  const optim::LbfgsResult qr = optim::lbfgs_minimize(quad, std::vector<double>(n, 0.0), optim::LbfgsOptions{});
  std::vector<double> g(n);
  quad(qr.x, g);
  double gnorm = 0.0;
  for (double v : g) gnorm += v * v;
  gnorm = std::sqrt(gnorm);

  auto rosen = [](std::span<const double> x, std::span<double> gr) {
    const double p = 1.0 - x[0], r = x[1] - x[0] * x[0];
    if (!gr.empty()) {
      gr[0] = -2.0 * p - 400.0 * x[0] * r;
      gr[1] = 200.0 * r;
    }
    return p * p + 100.0 * r * r;
  };
  const optim::LbfgsResult rr = optim::lbfgs_minimize(rosen, {-1.2, 1.0}, optim::LbfgsOptions{});

  // Three Adam steps against the textbook update evaluated by hand.
  optim::Adam adam(1, optim::AdamOptions{});
  std::vector<double> p{1.0};
  double theta = 1.0, m = 0.0, v = 0.0;
  bool exact = true;
  const double grads[] = {2.0, -1.0, 0.5};
  for (int t = 1; t <= 3; ++t) {
    const double gt = grads[t - 1];
    m = 0.9 * m + 0.1 * gt;
    v = 0.999 * v + 0.001 * gt * gt;
    theta -= 0.001 * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(v / (1.0 - std::pow(0.999, t))) + 1e-8);
    adam.step(p, std::vector<double>{gt});
    exact = exact && p[0] == theta;
  }
  const bool ok = gnorm < kQuadraticGradTol && qr.iterations <= kQuadraticMaxIter && rr.loss < kRosenbrockTol && exact;
  return {ok, fmt::format("quadratic grad norm {:.2e} in {} iterations (<= {}); Rosenbrock {:.2e} in {} iterations; "
                          "Adam 3-step trace {}",
                          gnorm, qr.iterations, kQuadraticMaxIter, rr.loss, rr.iterations,
                          exact ? "exact" : "MISMATCH")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string workdir = (fs::temp_directory_path() / "phylstm_acceptance").string();
  std::string config = PHYLSTM_ACCEPTANCE_CONFIG;
  std::size_t log_every = 250;
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_option("--workdir", workdir, "directory for the training runs");
  app.add_option("--config", config, "desk-scale training config");
  app.add_option("--log-every", log_every, "training epochs between progress lines");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int k) { return selected.empty() || selected.count(k) > 0; };

  if (wanted(4) || wanted(5) || wanted(6)) setup(workdir, config, log_every);

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8}};
  int failures = 0;
  for (const auto& [k, fn] : criteria) {
    if (!wanted(k)) continue;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("criterion %d: %s  %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
