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
#include "phylstm/pipeline/checkpoint.hpp"

#include "phylstm/core/error.hpp"
#include "phylstm/io/binary.hpp"

namespace phylstm::pipeline {

using physics::ModelKind;
using physics::PhiVariant;

const char* to_string(ModelKind kind) noexcept {
  return kind == ModelKind::PhyLstm2 ? "phylstm2" : "phylstm3";
}

const char* to_string(PhiVariant phi) noexcept {
  return phi == PhiVariant::Full ? "full" : "simplified";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "phylstm2") return ModelKind::PhyLstm2;
  if (name == "phylstm3") return ModelKind::PhyLstm3;
  throw_error(ErrorKind::InvalidArgument, "unknown model kind '" + name + "' (expected phylstm2 or phylstm3)");
}

PhiVariant phi_from_string(const std::string& name) {
  if (name == "full") return PhiVariant::Full;
  if (name == "simplified") return PhiVariant::Simplified;
  throw_error(ErrorKind::InvalidArgument, "unknown phi library '" + name + "' (expected full or simplified)");
}

nlohmann::ordered_json net_spec_to_json(const lstm::NetSpec& spec) {
  nlohmann::ordered_json j;
  j["input_channels"] = spec.input_channels;
  j["output_channels"] = spec.output_channels;
  j["lstm_layers"] = spec.lstm_layers;
  j["fc_layers"] = spec.fc_layers;
  j["parameters"] = spec.parameter_count();
  return j;
}

lstm::NetSpec net_spec_from_json(const nlohmann::json& j) {
  lstm::NetSpec s;
  s.input_channels = j.at("input_channels").get<std::size_t>();
  s.output_channels = j.at("output_channels").get<std::size_t>();
  s.lstm_layers = j.at("lstm_layers").get<std::vector<std::size_t>>();
  s.fc_layers = j.at("fc_layers").get<std::vector<std::size_t>>();
  s.validate();
  return s;
}

nlohmann::ordered_json model_to_json(const physics::ModelConfig& c) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(c.kind);
  j["phi"] = to_string(c.phi);
  j["phi_exponent"] = c.phi_exponent ? nlohmann::ordered_json(*c.phi_exponent) : nlohmann::ordered_json();
  j["dof"] = c.dof;
  j["gamma"] = c.gamma;
  j["networks"] = nlohmann::ordered_json::array({net_spec_to_json(c.net1), net_spec_to_json(c.net2)});
  if (c.kind == ModelKind::PhyLstm3) j["networks"].push_back(net_spec_to_json(c.net3));
  return j;
}

physics::ModelConfig model_from_json(const nlohmann::json& j) {
  physics::ModelConfig c;
  c.kind = model_kind_from_string(j.at("kind").get<std::string>());
  c.phi = phi_from_string(j.at("phi").get<std::string>());
  if (!j.at("phi_exponent").is_null()) c.phi_exponent = j.at("phi_exponent").get<double>();
  c.dof = j.at("dof").get<std::size_t>();
  c.gamma = j.at("gamma").get<std::vector<double>>();
  const auto& nets = j.at("networks");
  const std::size_t expected = c.kind == ModelKind::PhyLstm3 ? 3 : 2;
  require(nets.size() == expected, "checkpoint: expected " + std::to_string(expected) + " networks");
  c.net1 = net_spec_from_json(nets[0]);
  c.net2 = net_spec_from_json(nets[1]);
  if (expected == 3) c.net3 = net_spec_from_json(nets[2]);
  c.validate();
  return c;
}

nlohmann::ordered_json weights_to_json(const physics::LossWeights& w) {
  return {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}, {"eta", w.eta}};
}

std::vector<char> encode_checkpoint(const Checkpoint& ckpt) {
  const physics::PhyModel model(ckpt.model);
  require(ckpt.theta.size() == model.parameter_count(), "checkpoint: parameter count does not match the model");
  nlohmann::ordered_json h;
  h["format"] = "phylstm-checkpoint";
  h["model"] = model_to_json(ckpt.model);
  h["loss_weights"] = weights_to_json(ckpt.weights);
  h["dt"] = ckpt.dt;
  h["scale"] = ckpt.scale;
  h["seed"] = ckpt.seed;
  h["optimizer"] = ckpt.optimizer;
  h["config"] = ckpt.config;
  const std::string header = h.dump();

  io::ByteWriter w;
  w.bytes("PHYL");
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes(header);
  for (std::size_t k = 0; k < model.network_count(); ++k) {
    const auto blob = model.network(ckpt.theta, k);
    w.u64(blob.size());
    w.f64s(blob);
  }
  return w.data();
}

Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& source) {
  io::ByteReader r(std::move(bytes), source);
  if (r.bytes(4) != "PHYL") throw_error(ErrorKind::Io, source + ": not a checkpoint (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion)
    throw_error(ErrorKind::Io, source + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t len = r.u32();
  Checkpoint c;
  try {
    const auto h = nlohmann::json::parse(r.bytes(len));
    c.model = model_from_json(h.at("model"));
    const auto& w = h.at("loss_weights");
    c.weights = {w.at("alpha").get<double>(), w.at("beta").get<double>(), w.at("gamma").get<double>(),
                 w.at("eta").get<double>()};
    c.dt = h.at("dt").get<double>();
    c.scale = h.at("scale").get<double>();
    c.seed = h.at("seed").get<std::uint64_t>();
    c.optimizer = h.at("optimizer");
    c.config = h.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::Io, source + ": malformed checkpoint header: " + e.what());
  }
  const physics::PhyModel model(c.model);
  for (std::size_t k = 0; k < model.network_count(); ++k) {
    const std::uint64_t n = r.u64();
    if (n != model.network_spec(k).parameter_count())
      throw_error(ErrorKind::Io, source + ": network " + std::to_string(k + 1) + " blob has " +
                                     std::to_string(n) + " values, header implies " +
                                     std::to_string(model.network_spec(k).parameter_count()));
    for (std::uint64_t i = 0; i < n; ++i) c.theta.push_back(r.f64());
  }
  if (r.remaining() != 0) throw_error(ErrorKind::Io, source + ": trailing bytes after parameters");
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path), path.string());
}

}  // namespace phylstm::pipeline
