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
#include "phylstm/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "phylstm/core/error.hpp"
#include "phylstm/io/binary.hpp"
#include "phylstm/io/tsb.hpp"
#include "phylstm/pipeline/checkpoint.hpp"
#include "phylstm/pipeline/data.hpp"
#include "phylstm/selection/selection.hpp"

#ifndef PHYLSTM_VERSION
#define PHYLSTM_VERSION "0.0.0"
#endif

namespace phylstm::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* tool_version() noexcept { return PHYLSTM_VERSION; }

namespace {

constexpr int kOutputFormatVersion = 1;

template <typename... Args>
void say(const CommandContext& ctx, fmt::format_string<Args...> f, Args&&... args) {
  if (ctx.log) *ctx.log << fmt::format(f, std::forward<Args>(args)...) << std::flush;
}

json read_json(const fs::path& path) {
  const std::vector<char> raw = io::read_file(path);
  try {
    return json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw_error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const ordered_json& j) { io::write_text(path, j.dump(2) + "\n"); }

bool written_by_tool(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  if (!fs::is_regular_file(manifest)) return false;
  try {
    const json m = read_json(manifest);
    return m.is_object() && m.value("format", "").rfind("phylstm-", 0) == 0;
  } catch (const Error&) {
    return false;
  }
}

RecordList select_role(const simulate::Dataset& data, const std::string& role) {
  RecordList out;
  if (role.empty()) {
    for (const simulate::DatasetRecord& r : data.records) out.push_back(&r);
  } else {
    out = data.with_role(simulate::role_from_string(role));
  }
  require(!out.empty(), "no records with role '" + (role.empty() ? std::string("any") : role) + "'");
  return out;
}

std::vector<double> column(const std::vector<double>& series, std::size_t steps, std::size_t dof,
                           std::size_t i) {
  std::vector<double> out(steps);
  for (std::size_t t = 0; t < steps; ++t) out[t] = series[t * dof + i];
  return out;
}

ordered_json summary_entry(const std::optional<evaluate::RegressionSummary>& s) {
  return s ? evaluate::summary_json(*s) : ordered_json();
}

}  // namespace

void prepare_output_dir(const fs::path& dir, bool force) {
  require(!dir.empty(), "an output directory is required (--out)");
  if (fs::exists(dir)) {
    if (!force) throw_error(ErrorKind::InvalidArgument, dir.string() + " exists; pass --force to replace it");
    if (!fs::is_directory(dir) || !written_by_tool(dir))
      throw_error(ErrorKind::InvalidArgument,
                  dir.string() + " was not written by this tool; refusing to replace it");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

ordered_json output_manifest(const std::string& format, const RunConfig& config) {
  ordered_json m;
  m["format"] = format;
  m["format_version"] = kOutputFormatVersion;
  m["tool_version"] = tool_version();
  m["config"] = to_json(config);
  return m;
}

simulate::Dataset cmd_generate(const RunConfig& config, const fs::path& out, const CommandContext& ctx) {
  config.validate();
  simulate::DatasetConfig dc = config.effective_data();
  dc.threads = ctx.threads;
  simulate::Dataset data = simulate::build_dataset(config.system, dc);
  prepare_output_dir(out, ctx.force);
  simulate::write_dataset(data, out, to_json(config), tool_version());
  say(ctx, "dataset {}: dt {} s, {} steps, seed {}\n", out.string(), data.dt, data.steps, dc.seed);
  for (simulate::Role r : {simulate::Role::Train, simulate::Role::Validation, simulate::Role::Test,
                           simulate::Role::Collocation})
    say(ctx, "  {:<12}{}\n", simulate::to_string(r), data.with_role(r).size());
  return data;
}

SelectionReport cmd_select(const RunConfig& config, const fs::path& data_dir, const std::string& role,
                           const fs::path& out, const CommandContext& ctx) {
  config.validate();
  const simulate::Dataset data = simulate::read_dataset(data_dir);
  const RecordList records = select_role(data, role);
  const SelectionSection& sc = config.selection;
  require(sc.k <= records.size(), fmt::format("select: k = {} exceeds the {} records", sc.k, records.size()));

  const selection::SpectrumGrid grid =
      selection::SpectrumGrid::log_spaced(sc.periods, sc.t_min, sc.t_max, sc.damping);
  std::vector<std::span<const double>> series;
  std::vector<std::string> ids;
  std::vector<double> scales;
  for (const simulate::DatasetRecord* r : records) {
    series.emplace_back(r->ag);
    ids.push_back(r->id);
    scales.push_back(r->scale);
  }
  const selection::Matrix spectra = selection::response_spectra(series, data.dt, grid, ctx.threads);
  const selection::Matrix features = selection::standardize(spectra);
  RngStream rng = RngStream(config.seeds.selection).derive("kmeans");
  const selection::ClusterResult clusters = selection::kmeans_cluster(features, sc.k, rng, sc.max_iter);
  const std::vector<std::size_t> reps = selection::select_representatives(clusters, features);

  SelectionReport report;
  report.ids = ids;
  for (std::size_t i : reps) report.representatives.push_back(ids[i]);
  report.inertia = clusters.inertia.empty() ? 0.0 : clusters.inertia.back();
  report.iterations = clusters.iterations;

  prepare_output_dir(out, ctx.force);
  io::write_text(out / "selection.csv", selection::selection_csv(ids, scales, grid, spectra, clusters, reps));
  ordered_json m = output_manifest("phylstm-selection", config);
  m["dataset"] = data_dir.string();
  m["role"] = role.empty() ? "all" : role;
  m["k"] = sc.k;
  m["periods_s"] = grid.periods;
  m["damping"] = grid.damping;
  m["iterations"] = clusters.iterations;
  m["converged"] = clusters.converged;
  m["inertia"] = clusters.inertia;
  m["representatives"] = report.representatives;
  write_json(out / "manifest.json", m);
  say(ctx, "selected {} of {} records after {} iterations (inertia {}):", reps.size(), ids.size(),
      clusters.iterations, report.inertia);
  for (const std::string& id : report.representatives) say(ctx, " {}", id);
  say(ctx, "\n");
  return report;
}

optim::TrainResult cmd_train(const RunConfig& config, const fs::path& data_dir, const fs::path& out,
                             const CommandContext& ctx) {
  config.validate();
  const simulate::Dataset data = simulate::read_dataset(data_dir);
  require(!data.with_role(simulate::Role::Train).empty(), "train: dataset has no train records");
  const physics::ModelConfig mc = config.model.build(data.system.dof(), data.system.gamma);
  const physics::PhyModel model(mc);
  const optim::TrainData td = make_train_data(data, config.scale, config.model.use_collocation);

  RngStream init_rng = RngStream(config.seeds.train).derive("init");
  const std::vector<double> theta0 = model.init(init_rng);
  prepare_output_dir(out, ctx.force);
  say(ctx, "training {} ({} parameters) on {} samples, {} validation\n", to_string(mc.kind),
      model.parameter_count(), td.train.samples(), td.validation ? td.validation->samples() : 0);

  const optim::ScheduleConfig schedule = config.effective_schedule();
  optim::TrainResult result = optim::train_schedule(model, theta0, td, schedule, [&](const optim::HistoryRow& r) {
    if (ctx.log_every > 0 && r.epoch % ctx.log_every == 0)
      say(ctx, "{:>6} {:<6} J {:.6g}  val {:.6g}  Jd {:.4g} Je {:.4g} Jg {:.4g} Jh {:.4g}\n", r.epoch, r.phase,
          r.train_j, r.val_j, r.terms.data, r.terms.equality, r.terms.governing, r.terms.hysteretic);
  });

  Checkpoint ckpt;
  ckpt.model = mc;
  ckpt.weights = config.weights;
  ckpt.theta = result.theta;
  ckpt.dt = data.dt;
  ckpt.scale = config.scale;
  ckpt.seed = config.seeds.train;
  ckpt.optimizer = {{"status", optim::to_string(result.status)},
                    {"best_epoch", result.best_epoch},
                    {"best_val_J", result.best_val},
                    {"epochs_run", result.history.size()},
                    {"lbfgs_status", result.lbfgs_status ? ordered_json(optim::to_string(*result.lbfgs_status))
                                                         : ordered_json()},
                    {"message", result.message}};
  ckpt.config = to_json(config);
  write_checkpoint(out / "checkpoint.phyl", ckpt);
  io::write_text(out / "history.csv", optim::history_csv(result.history));
  ordered_json m = output_manifest("phylstm-training", config);
  m["dataset"] = data_dir.string();
  m["checkpoint"] = "checkpoint.phyl";
  m["history"] = "history.csv";
  m["result"] = ckpt.optimizer;
  write_json(out / "manifest.json", m);
  say(ctx, "{}: best epoch {} with validation J {:.6g}{}\n", optim::to_string(result.status), result.best_epoch,
      result.best_val, result.message.empty() ? "" : " (" + result.message + ")");
  return result;
}

std::vector<RecordPrediction> cmd_predict(const RunConfig& config, const fs::path& checkpoint,
                                          const fs::path& data_dir, const std::string& role,
                                          const fs::path& out, const CommandContext& ctx) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const simulate::Dataset data = simulate::read_dataset(data_dir);
  if (std::abs(data.dt - ckpt.dt) > 1e-12 * ckpt.dt)
    throw_error(ErrorKind::InvalidArgument,
                fmt::format("predict: dataset dt {} s differs from the training dt {} s", data.dt, ckpt.dt));
  require(data.system.dof() == ckpt.model.dof,
          fmt::format("predict: dataset has {} DOF but the model was trained for {}", data.system.dof(),
                      ckpt.model.dof));
  const RecordList records = select_role(data, role);
  const physics::PhyModel model(ckpt.model);
  const std::vector<RecordPrediction> preds = predict_records(model, ckpt.theta, records, data.dt, ckpt.scale);

  prepare_output_dir(out, ctx.force);
  ordered_json list = ordered_json::array();
  for (const RecordPrediction& p : preds) {
    io::TsbTable table;
    for (auto [base, series] : {std::pair{"u", &p.u}, {"udot", &p.u_dot}, {"r", &p.r}, {"g", &p.g}})
      for (std::size_t i = 0; i < p.dof; ++i)
        table.add_channel(simulate::channel_name(base, i), column(*series, p.steps, p.dof, i));
    io::write_tsb(out / (p.id + ".tsb"), table);
    list.push_back({{"id", p.id}, {"file", p.id + ".tsb"}});
  }
  ordered_json m = output_manifest("phylstm-predictions", config);
  m["checkpoint"] = checkpoint.string();
  m["dataset"] = data_dir.string();
  m["role"] = role.empty() ? "all" : role;
  m["dt"] = data.dt;
  m["n_steps"] = data.steps;
  m["dof"] = ckpt.model.dof;
  m["records"] = list;
  write_json(out / "manifest.json", m);
  say(ctx, "predicted {} records into {}\n", preds.size(), out.string());
  return preds;
}

std::vector<RecordPrediction> read_predictions(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  if (m.value("format", "") != "phylstm-predictions")
    throw_error(ErrorKind::Io, dir.string() + ": not a prediction directory");
  const std::size_t dof = m.at("dof").get<std::size_t>();
  std::vector<RecordPrediction> out;
  for (const auto& e : m.at("records")) {
    const io::TsbTable t = io::read_tsb(dir / e.at("file").get<std::string>());
    RecordPrediction p;
    p.id = e.at("id").get<std::string>();
    p.steps = t.steps;
    p.dof = dof;
    for (auto [base, series] : {std::pair{"u", &p.u}, {"udot", &p.u_dot}, {"r", &p.r}, {"g", &p.g}}) {
      series->assign(p.steps * dof, 0.0);
      for (std::size_t i = 0; i < dof; ++i) {
        const std::vector<double> c = t.channel(simulate::channel_name(base, i));
        for (std::size_t s = 0; s < p.steps; ++s) (*series)[s * dof + i] = c[s];
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

EvaluationReport cmd_evaluate(const RunConfig& config, const fs::path& predictions_dir, const fs::path& data_dir,
                              const fs::path& out, const CommandContext& ctx) {
  config.validate();
  const std::vector<RecordPrediction> preds = read_predictions(predictions_dir);
  const simulate::Dataset data = simulate::read_dataset(data_dir);
  require(!preds.empty(), "evaluate: no predictions in " + predictions_dir.string());

  std::map<std::string, const simulate::DatasetRecord*> by_id;
  for (const simulate::DatasetRecord& r : data.records) by_id[r.id] = &r;
  RecordList truth;
  std::vector<std::string> missing, no_truth;
  for (const RecordPrediction& p : preds) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      missing.push_back(p.id);
    } else {
      if (!it->second->response) no_truth.push_back(p.id);
      truth.push_back(it->second);
    }
  }
  if (!missing.empty())
    throw_error(ErrorKind::InvalidArgument, fmt::format("evaluate: records missing from the dataset: {}",
                                                        fmt::join(missing, ", ")));
  if (!no_truth.empty())
    throw_error(ErrorKind::InvalidArgument, fmt::format("evaluate: records without simulated truth: {}",
                                                        fmt::join(no_truth, ", ")));

  EvaluationReport report;
  report.scores = score_predictions(preds, truth);
  const double level = config.evaluate.gamma_threshold;
  for (const evaluate::ChannelScore& c : report.scores.front().channels) {
    const auto gammas = evaluate::channel_gammas(report.scores, c.channel);
    std::optional<evaluate::RegressionSummary> s;
    const bool any = std::any_of(gammas.begin(), gammas.end(), [](const auto& g) { return g.has_value(); });
    if (any) s = evaluate::regression_summary(gammas, level);
    report.summaries.emplace_back(c.channel, s);
  }
  for (const Threshold& t : config.evaluate.thresholds) {
    ThresholdResult r;
    r.rule = t;
    const auto it = std::find_if(report.summaries.begin(), report.summaries.end(),
                                 [&](const auto& e) { return e.first == t.channel; });
    require(it != report.summaries.end(), "evaluate: threshold names unknown channel '" + t.channel + "'");
    if (it->second) {
      const evaluate::RegressionSummary& s = *it->second;
      r.value = t.metric == "median" ? s.median : t.metric == "min" ? s.min : s.fraction_above;
      r.passed = *r.value >= t.at_least;
    }
    report.passed = report.passed && r.passed;
    report.thresholds.push_back(r);
  }

  prepare_output_dir(out, ctx.force);
  io::write_text(out / "scores.csv", evaluate::scores_csv(report.scores));
  fs::create_directories(out / "hysteresis");
  for (std::size_t k = 0; k < preds.size(); ++k) {
    const RecordPrediction& p = preds[k];
    const simulate::Trajectory& tr = *truth[k]->response;
    for (std::size_t i = 0; i < p.dof; ++i) {
      const std::string stem = fmt::format("{}_{}", p.id, i + 1);
      const auto pu = column(p.u, p.steps, p.dof, i), pg = column(p.g, p.steps, p.dof, i);
      const auto tu = column(tr.u, tr.steps, tr.dof, i), tg = column(tr.g, tr.steps, tr.dof, i);
      io::write_text(out / "hysteresis" / (stem + "_pred.csv"),
                     evaluate::hysteresis_csv(evaluate::hysteresis_export(pu, pg)));
      io::write_text(out / "hysteresis" / (stem + "_true.csv"),
                     evaluate::hysteresis_csv(evaluate::hysteresis_export(tu, tg)));
    }
  }

  ordered_json channels = ordered_json::object();
  for (const auto& [name, s] : report.summaries) channels[name] = summary_entry(s);
  ordered_json rules = ordered_json::array();
  for (const ThresholdResult& r : report.thresholds)
    rules.push_back({{"channel", r.rule.channel},
                     {"metric", r.rule.metric},
                     {"at_least", r.rule.at_least},
                     {"value", r.value ? ordered_json(*r.value) : ordered_json()},
                     {"passed", r.passed}});
  ordered_json summary;
  summary["records"] = preds.size();
  summary["channels"] = channels;
  summary["thresholds"] = rules;
  summary["passed"] = report.passed;
  write_json(out / "summary.json", summary);
  ordered_json m = output_manifest("phylstm-evaluation", config);
  m["predictions"] = predictions_dir.string();
  m["dataset"] = data_dir.string();
  m["files"] = {"scores.csv", "summary.json", "hysteresis/"};
  write_json(out / "manifest.json", m);

  say(ctx, "{} records\n", preds.size());
  for (const auto& [name, s] : report.summaries) {
    if (s)
      say(ctx, "  {:<8} median {:.4f}  min {:.4f}  >{} {:.3f}  undefined {}\n", name, s->median, s->min, level,
          s->fraction_above, s->undefined);
    else
      say(ctx, "  {:<8} undefined for every record\n", name);
  }
  for (const ThresholdResult& r : report.thresholds)
    say(ctx, "  {} {} {} >= {}: {}\n", r.rule.channel, r.rule.metric,
        r.value ? fmt::format("{:.4f}", *r.value) : std::string("undefined"), r.rule.at_least,
        r.passed ? "pass" : "FAIL");
  return report;
}

}  // namespace phylstm::pipeline
