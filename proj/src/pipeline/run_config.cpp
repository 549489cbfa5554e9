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
#include "phylstm/pipeline/run_config.hpp"

#include <cmath>
#include <set>

#include "phylstm/core/error.hpp"
#include "phylstm/io/binary.hpp"
#include "phylstm/pipeline/checkpoint.hpp"

namespace phylstm::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Strict view of one JSON object: every read marks a key as known and
// finish() rejects whatever is left.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j.is_object(), "config: " + where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw_error(ErrorKind::InvalidArgument, "config: " + where(key) + ": " + e.what());
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    read(key, v);
    out = v;
  }

  bool has(const char* key) {
    known_.insert(key);
    return j_.contains(key);
  }

  Section child(const char* key) {
    known_.insert(key);
    return Section(j_.at(key), where(key));
  }

  const json& raw(const char* key) {
    known_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key = "") const {
    const std::string base = path_.empty() ? "" : path_;
    if (key.empty()) return base.empty() ? "top level" : base;
    return base.empty() ? key : base + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!known_.count(key)) throw_error(ErrorKind::InvalidArgument, "config: unknown key '" + where(key) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

void parse_system(Section s, simulate::BoucWenSystem& sys) {
  s.read("lambda", sys.lambda);
  s.read("gamma", sys.gamma);
  if (s.has("stories")) {
    const json& arr = s.raw("stories");
    require(arr.is_array(), "config: system.stories must be an array");
    sys.stories.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section st(arr[i], "system.stories[" + std::to_string(i) + "]");
      simulate::Story story;
      st.read("mass_kg", story.mass);
      st.read("damping_Ns_per_m", story.damping);
      st.read("stiffness_N_per_m", story.stiffness);
      st.read("alpha", story.alpha);
      st.read("beta", story.beta);
      st.read("n", story.exponent);
      st.finish();
      sys.stories.push_back(story);
    }
  }
  s.finish();
}

void parse_data(Section s, simulate::DatasetConfig& d) {
  s.read("n_known", d.n_known);
  s.read("validation_fraction", d.validation_fraction);
  s.read("n_collocation", d.n_collocation);
  s.read("n_test", d.n_test);
  s.read("duration_s", d.duration_s);
  s.read("fs_hz", d.fs_hz);
  std::vector<double> band{d.band.low_hz, d.band.high_hz};
  s.read("band_hz", band);
  require(band.size() == 2, "config: data.band_hz must have two entries");
  d.band = {band[0], band[1]};
  s.read("rms_min", d.rms_min);
  s.read("rms_max", d.rms_max);
  s.read("intensity_scales", d.intensity_scales);
  s.finish();
}

void parse_model(Section s, ModelSection& m) {
  std::string kind = to_string(m.kind), phi = to_string(m.phi);
  s.read("kind", kind);
  s.read("phi", phi);
  m.kind = model_kind_from_string(kind);
  m.phi = phi_from_string(phi);
  s.read_optional("phi_exponent", m.phi_exponent);
  s.read("lstm_layers", m.lstm_layers);
  s.read("fc_hidden", m.fc_hidden);
  s.read("use_collocation", m.use_collocation);
  s.finish();
}

void parse_weights(Section s, physics::LossWeights& w) {
  s.read("alpha", w.alpha);
  s.read("beta", w.beta);
  s.read("gamma", w.gamma);
  s.read("eta", w.eta);
  s.finish();
}

void parse_schedule(Section s, optim::ScheduleConfig& c, double& scale) {
  if (s.has("adam")) {
    const json& arr = s.raw("adam");
    require(arr.is_array(), "config: schedule.adam must be an array");
    c.adam.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section p(arr[i], "schedule.adam[" + std::to_string(i) + "]");
      optim::AdamPhase phase;
      p.read("epochs", phase.epochs);
      p.read("lr", phase.lr);
      p.read("decay", phase.decay);
      p.finish();
      c.adam.push_back(phase);
    }
  }
  if (s.has("lbfgs")) {
    Section l = s.child("lbfgs");
    l.read("max_iter", c.lbfgs.max_iter);
    l.read("memory", c.lbfgs.memory);
    l.read("c1", c.lbfgs.c1);
    l.read("c2", c.lbfgs.c2);
    l.read("grad_tol", c.lbfgs.grad_tol);
    l.read("rel_tol", c.lbfgs.rel_tol);
    l.read("max_line_search", c.lbfgs.max_line_search);
    l.finish();
  }
  s.read("batches_per_epoch", c.batches_per_epoch);
  s.read("clip_norm", c.clip_norm);
  s.read("divergence_threshold", c.divergence_threshold);
  s.read("scale", scale);
  s.finish();
}

void parse_selection(Section s, SelectionSection& sel) {
  s.read("k", sel.k);
  s.read("periods", sel.periods);
  s.read("t_min", sel.t_min);
  s.read("t_max", sel.t_max);
  s.read("damping", sel.damping);
  s.read("max_iter", sel.max_iter);
  s.finish();
}

void parse_evaluate(Section s, EvaluateSection& e) {
  s.read("gamma_threshold", e.gamma_threshold);
  if (s.has("thresholds")) {
    const json& arr = s.raw("thresholds");
    require(arr.is_array(), "config: evaluate.thresholds must be an array");
    e.thresholds.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section t(arr[i], "evaluate.thresholds[" + std::to_string(i) + "]");
      Threshold th;
      t.read("channel", th.channel);
      t.read("metric", th.metric);
      t.read("at_least", th.at_least);
      t.finish();
      e.thresholds.push_back(th);
    }
  }
  s.finish();
}

}  // namespace

physics::ModelConfig ModelSection::build(std::size_t dof, const std::vector<double>& gamma) const {
  physics::ModelConfig c = physics::ModelConfig::standard(kind, phi, dof, lstm_layers, fc_hidden, phi_exponent);
  c.gamma = gamma.empty() ? std::vector<double>(dof, 1.0) : gamma;
  c.validate();
  return c;
}

void RunConfig::validate() const {
  system.validate();
  effective_data().validate();
  model.build(system.dof(), system.gamma);
  weights.validate();
  effective_schedule().validate();
  require(scale > 0.0 && std::isfinite(scale), "config: schedule.scale must be positive");
  require(selection.k >= 1 && selection.periods >= 2, "config: selection needs k >= 1 and periods >= 2");
  require(selection.t_min > 0.0 && selection.t_max > selection.t_min, "config: selection needs 0 < t_min < t_max");
  require(selection.damping >= 0.0 && selection.damping < 1.0, "config: selection damping must lie in [0, 1)");
  for (const Threshold& t : evaluate.thresholds)
    require(t.metric == "median" || t.metric == "min" || t.metric == "fraction_above",
            "config: threshold metric must be median, min or fraction_above (got '" + t.metric + "')");
}

optim::ScheduleConfig RunConfig::effective_schedule() const {
  optim::ScheduleConfig s = schedule;
  s.weights = weights;
  s.seed = seeds.train;
  return s;
}

simulate::DatasetConfig RunConfig::effective_data() const {
  simulate::DatasetConfig d = data;
  d.seed = seeds.data;
  return d;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  Section top(j, "");
  if (top.has("system")) parse_system(top.child("system"), c.system);
  if (top.has("data")) parse_data(top.child("data"), c.data);
  if (top.has("model")) parse_model(top.child("model"), c.model);
  if (top.has("loss_weights")) parse_weights(top.child("loss_weights"), c.weights);
  if (top.has("schedule")) parse_schedule(top.child("schedule"), c.schedule, c.scale);
  if (top.has("selection")) parse_selection(top.child("selection"), c.selection);
  if (top.has("evaluate")) parse_evaluate(top.child("evaluate"), c.evaluate);
  if (top.has("seeds")) {
    Section s = top.child("seeds");
    s.read("data", c.seeds.data);
    s.read("train", c.seeds.train);
    s.read("selection", c.seeds.selection);
    s.finish();
  }
  if (top.has("paths")) {
    Section s = top.child("paths");
    s.read("data", c.paths.data);
    s.read("checkpoint", c.paths.checkpoint);
    s.read("predictions", c.paths.predictions);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const std::vector<char> raw = io::read_file(path);
  json j;
  try {
    j = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw_error(ErrorKind::InvalidArgument, "config " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["system"] = simulate::system_to_json(c.system);
  const simulate::DatasetConfig& d = c.data;
  j["data"] = {{"n_known", d.n_known},
               {"validation_fraction", d.validation_fraction},
               {"n_collocation", d.n_collocation},
               {"n_test", d.n_test},
               {"duration_s", d.duration_s},
               {"fs_hz", d.fs_hz},
               {"band_hz", {d.band.low_hz, d.band.high_hz}},
               {"rms_min", d.rms_min},
               {"rms_max", d.rms_max},
               {"intensity_scales", d.intensity_scales}};
  j["model"] = {{"kind", to_string(c.model.kind)},
                {"phi", to_string(c.model.phi)},
                {"phi_exponent", c.model.phi_exponent ? ordered_json(*c.model.phi_exponent) : ordered_json()},
                {"lstm_layers", c.model.lstm_layers},
                {"fc_hidden", c.model.fc_hidden},
                {"use_collocation", c.model.use_collocation}};
  j["loss_weights"] = weights_to_json(c.weights);
  ordered_json adam = ordered_json::array();
  for (const optim::AdamPhase& p : c.schedule.adam)
    adam.push_back({{"epochs", p.epochs}, {"lr", p.lr}, {"decay", p.decay}});
  const optim::LbfgsOptions& l = c.schedule.lbfgs;
  j["schedule"] = {{"adam", adam},
                   {"lbfgs",
                    {{"max_iter", l.max_iter},
                     {"memory", l.memory},
                     {"c1", l.c1},
                     {"c2", l.c2},
                     {"grad_tol", l.grad_tol},
                     {"rel_tol", l.rel_tol},
                     {"max_line_search", l.max_line_search}}},
                   {"batches_per_epoch", c.schedule.batches_per_epoch},
                   {"clip_norm", c.schedule.clip_norm},
                   {"divergence_threshold", c.schedule.divergence_threshold},
                   {"scale", c.scale}};
  j["selection"] = {{"k", c.selection.k},
                    {"periods", c.selection.periods},
                    {"t_min", c.selection.t_min},
                    {"t_max", c.selection.t_max},
                    {"damping", c.selection.damping},
                    {"max_iter", c.selection.max_iter}};
  ordered_json th = ordered_json::array();
  for (const Threshold& t : c.evaluate.thresholds)
    th.push_back({{"channel", t.channel}, {"metric", t.metric}, {"at_least", t.at_least}});
  j["evaluate"] = {{"gamma_threshold", c.evaluate.gamma_threshold}, {"thresholds", th}};
  j["seeds"] = {{"data", c.seeds.data}, {"train", c.seeds.train}, {"selection", c.seeds.selection}};
  j["paths"] = {{"data", c.paths.data}, {"checkpoint", c.paths.checkpoint}, {"predictions", c.paths.predictions}};
  return j;
}

}  // namespace phylstm::pipeline
