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
#include "phylstm/simulate/dataset.hpp"

#include <cmath>
#include <cstdio>

#include "phylstm/core/error.hpp"
#include "phylstm/core/parallel.hpp"
#include "phylstm/core/rng.hpp"
#include "phylstm/io/binary.hpp"
#include "phylstm/io/tsb.hpp"

namespace phylstm::simulate {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const char* to_string(Role role) noexcept {
  switch (role) {
    case Role::Train: return "train";
    case Role::Validation: return "validation";
    case Role::Test: return "test";
    case Role::Collocation: return "collocation";
  }
  return "unknown";
}

Role role_from_string(const std::string& name) {
  for (Role r : {Role::Train, Role::Validation, Role::Test, Role::Collocation})
    if (name == to_string(r)) return r;
  throw_error(ErrorKind::InvalidArgument, "unknown record role '" + name + "'");
}

std::string channel_name(const char* base, std::size_t dof_index) {
  return std::string(base) + std::to_string(dof_index + 1);
}

void DatasetConfig::validate() const {
  require(n_known + n_collocation + n_test > 0, "dataset: every role count is zero");
  require(validation_fraction >= 0.0 && validation_fraction < 1.0, "dataset: validation_fraction must lie in [0, 1)");
  require(rms_min > 0.0 && rms_min <= rms_max && std::isfinite(rms_max), "dataset: need 0 < rms_min <= rms_max");
  require(!intensity_scales.empty(), "dataset: at least one intensity scale is required");
  for (double s : intensity_scales) require(s > 0.0 && std::isfinite(s), "dataset: intensity scales must be positive");
  require(duration_s > 0.0 && fs_hz > 0.0, "dataset: duration and sampling rate must be positive");
}

std::vector<const DatasetRecord*> Dataset::with_role(Role role) const {
  std::vector<const DatasetRecord*> out;
  for (const DatasetRecord& r : records)
    if (r.role == role) out.push_back(&r);
  return out;
}

const DatasetRecord& Dataset::find(const std::string& id) const {
  for (const DatasetRecord& r : records)
    if (r.id == id) return r;
  throw_error(ErrorKind::InvalidArgument, "dataset has no record '" + id + "'");
}

Dataset build_dataset(const BoucWenSystem& sys, const DatasetConfig& config) {
  sys.validate();
  config.validate();
  Dataset data;
  data.system = sys;
  data.config = config;
  data.dt = 1.0 / config.fs_hz;
  data.steps = sample_count(config.duration_s, config.fs_hz);

  struct Slot {
    Role role;
    const char* group;
    std::size_t index;
  };
  std::vector<Slot> slots;
  const auto n_val = static_cast<std::size_t>(std::llround(config.n_known * config.validation_fraction));
  for (std::size_t i = 0; i < config.n_known; ++i)
    slots.push_back({i + n_val < config.n_known ? Role::Train : Role::Validation, "known", i});
  for (std::size_t i = 0; i < config.n_collocation; ++i) slots.push_back({Role::Collocation, "collocation", i});
  for (std::size_t i = 0; i < config.n_test; ++i) slots.push_back({Role::Test, "test", i});

  const RngStream root(config.seed);
  const std::size_t n_scales = config.intensity_scales.size();
  std::vector<std::size_t> role_counter(4, 0);
  for (const Slot& slot : slots) {
    RngStream rng = root.derive(slot.group, slot.index);
    const std::uint64_t key = rng.seed();
    const double level = config.rms_min * std::pow(config.rms_max / config.rms_min, rng.uniform());
    const GroundMotionRecord base = blwn_generate(rng, config.duration_s, config.fs_hz, level, config.band);
    const std::size_t ordinal = role_counter[static_cast<int>(slot.role)]++;
    for (std::size_t s = 0; s < n_scales; ++s) {
      DatasetRecord rec;
      char id[64];
      std::snprintf(id, sizeof id, "%s-%03zu", to_string(slot.role), ordinal);
      rec.id = id;
      if (n_scales > 1) rec.id += "-s" + std::to_string(s);
      rec.role = slot.role;
      rec.seed = key;
      rec.rms = level;
      rec.scale = config.intensity_scales[s];
      rec.ag = base.ag;
      for (double& a : rec.ag) a *= rec.scale;
      data.records.push_back(std::move(rec));
    }
  }

  parallel_for(data.records.size(), config.threads, [&](std::size_t i) {
    DatasetRecord& rec = data.records[i];
    if (rec.role == Role::Collocation) return;
    try {
      rec.response = integrate(sys, rec.ag, data.dt);
    } catch (const Error& e) {
      throw Error(e.kind(), "record " + rec.id + ": " + e.what());
    }
  });
  return data;
}

ordered_json system_to_json(const BoucWenSystem& sys) {
  ordered_json j;
  j["lambda"] = sys.lambda;
  ordered_json stories = ordered_json::array();
  for (const Story& s : sys.stories)
    stories.push_back({{"mass_kg", s.mass},
                       {"damping_Ns_per_m", s.damping},
                       {"stiffness_N_per_m", s.stiffness},
                       {"alpha", s.alpha},
                       {"beta", s.beta},
                       {"n", s.exponent}});
  j["stories"] = stories;
  if (!sys.gamma.empty()) j["gamma"] = sys.gamma;  // absent means all ones
  return j;
}

BoucWenSystem system_from_json(const nlohmann::json& j) {
  BoucWenSystem sys;
  sys.lambda = j.at("lambda").get<double>();
  sys.stories.clear();
  for (const auto& s : j.at("stories"))
    sys.stories.push_back(Story{s.at("mass_kg").get<double>(), s.at("damping_Ns_per_m").get<double>(),
                                s.at("stiffness_N_per_m").get<double>(), s.at("alpha").get<double>(),
                                s.at("beta").get<double>(), s.at("n").get<double>()});
  if (j.contains("gamma")) sys.gamma = j.at("gamma").get<std::vector<double>>();
  sys.validate();
  return sys;
}

void write_dataset(const Dataset& data, const fs::path& dir, const ordered_json& echo,
                   const std::string& tool_version) {
  fs::create_directories(dir);
  const std::size_t dof = data.system.dof();
  ordered_json records = ordered_json::array();
  for (const DatasetRecord& rec : data.records) {
    io::TsbTable main;
    main.add_channel("ag", rec.ag);
    ordered_json entry{{"id", rec.id},
                       {"role", to_string(rec.role)},
                       {"seed", rec.seed},
                       {"rms", rec.rms},
                       {"scale", rec.scale},
                       {"file", rec.id + ".tsb"}};
    if (rec.response) {
      const Trajectory& tr = *rec.response;
      io::TsbTable latent;
      std::vector<double> col(tr.steps);
      auto column = [&](const std::vector<double>& s, std::size_t i) {
        for (std::size_t t = 0; t < tr.steps; ++t) col[t] = s[t * dof + i];
        return std::span<const double>(col);
      };
      for (std::size_t i = 0; i < dof; ++i) main.add_channel(channel_name("u", i), column(tr.u, i));
      for (std::size_t i = 0; i < dof; ++i) main.add_channel(channel_name("udot", i), column(tr.u_dot, i));
      for (std::size_t i = 0; i < dof; ++i) latent.add_channel(channel_name("r", i), column(tr.r, i));
      for (std::size_t i = 0; i < dof; ++i) latent.add_channel(channel_name("g", i), column(tr.g, i));
      io::write_tsb(dir / (rec.id + ".latent.tsb"), latent);
      entry["latent_file"] = rec.id + ".latent.tsb";
    }
    io::write_tsb(dir / (rec.id + ".tsb"), main);
    entry["channels"] = main.channels;
    records.push_back(entry);
  }
  ordered_json counts;
  for (Role r : {Role::Train, Role::Validation, Role::Test, Role::Collocation})
    counts[to_string(r)] = data.with_role(r).size();

  const DatasetConfig& c = data.config;
  ordered_json manifest;
  manifest["format"] = "phylstm-dataset";
  manifest["format_version"] = kDatasetFormatVersion;
  manifest["tool_version"] = tool_version;
  manifest["dt"] = data.dt;
  manifest["n_steps"] = data.steps;
  manifest["units"] = {{"ag", "m/s^2"}, {"u", "m"}, {"udot", "m/s"}, {"r", "m"}, {"g", "m/s^2"}};
  manifest["system"] = system_to_json(data.system);
  manifest["generation"] = {{"seed", c.seed},
                            {"n_known", c.n_known},
                            {"validation_fraction", c.validation_fraction},
                            {"n_collocation", c.n_collocation},
                            {"n_test", c.n_test},
                            {"duration_s", c.duration_s},
                            {"fs_hz", c.fs_hz},
                            {"band_hz", {c.band.low_hz, c.band.high_hz}},
                            {"rms_range", {c.rms_min, c.rms_max}},
                            {"intensity_scales", c.intensity_scales}};
  manifest["counts"] = counts;
  manifest["records"] = records;
  manifest["config"] = echo;
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  const std::vector<char> raw = io::read_file(dir / "manifest.json");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::Io, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (m.value("format", "") != "phylstm-dataset" || m.value("format_version", 0) != kDatasetFormatVersion)
    throw_error(ErrorKind::Io, dir.string() + ": not a supported dataset directory");

  Dataset data;
  data.system = system_from_json(m.at("system"));
  data.dt = m.at("dt").get<double>();
  data.steps = m.at("n_steps").get<std::size_t>();
  const auto& gen = m.at("generation");
  DatasetConfig& c = data.config;
  c.seed = gen.at("seed").get<std::uint64_t>();
  c.n_known = gen.at("n_known").get<std::size_t>();
  c.validation_fraction = gen.at("validation_fraction").get<double>();
  c.n_collocation = gen.at("n_collocation").get<std::size_t>();
  c.n_test = gen.at("n_test").get<std::size_t>();
  c.duration_s = gen.at("duration_s").get<double>();
  c.fs_hz = gen.at("fs_hz").get<double>();
  c.band = {gen.at("band_hz")[0].get<double>(), gen.at("band_hz")[1].get<double>()};
  c.rms_min = gen.at("rms_range")[0].get<double>();
  c.rms_max = gen.at("rms_range")[1].get<double>();
  c.intensity_scales = gen.at("intensity_scales").get<std::vector<double>>();

  const std::size_t dof = data.system.dof();
  for (const auto& e : m.at("records")) {
    DatasetRecord rec;
    rec.id = e.at("id").get<std::string>();
    rec.role = role_from_string(e.at("role").get<std::string>());
    rec.seed = e.at("seed").get<std::uint64_t>();
    rec.rms = e.at("rms").get<double>();
    rec.scale = e.at("scale").get<double>();
    const io::TsbTable main = io::read_tsb(dir / e.at("file").get<std::string>());
    if (main.steps != data.steps) throw_error(ErrorKind::Io, rec.id + ": step count differs from manifest");
    rec.ag = main.channel("ag");
    if (e.contains("latent_file")) {
      const io::TsbTable latent = io::read_tsb(dir / e.at("latent_file").get<std::string>());
      Trajectory tr;
      tr.steps = data.steps;
      tr.dof = dof;
      tr.dt = data.dt;
      for (auto* v : {&tr.u, &tr.u_dot, &tr.r, &tr.g, &tr.u_ddot}) v->assign(tr.steps * dof, 0.0);
      for (std::size_t i = 0; i < dof; ++i) {
        const auto u = main.channel(channel_name("u", i));
        const auto v = main.channel(channel_name("udot", i));
        const auto r = latent.channel(channel_name("r", i));
        const auto g = latent.channel(channel_name("g", i));
        for (std::size_t t = 0; t < tr.steps; ++t) {
          tr.u[t * dof + i] = u[t];
          tr.u_dot[t * dof + i] = v[t];
          tr.r[t * dof + i] = r[t];
          tr.g[t * dof + i] = g[t];
          tr.u_ddot[t * dof + i] = -data.system.gamma_at(i) * rec.ag[t] - g[t];
        }
      }
      rec.response = std::move(tr);
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

}  // namespace phylstm::simulate
