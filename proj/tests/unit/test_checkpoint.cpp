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
#include <cstring>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "phylstm/core/error.hpp"
#include "phylstm/io/binary.hpp"
#include "phylstm/pipeline/checkpoint.hpp"

using namespace phylstm;
using namespace phylstm::pipeline;
using physics::ModelConfig;
using physics::ModelKind;
using physics::PhiVariant;

namespace {

Checkpoint sample(ModelKind kind, PhiVariant phi = PhiVariant::Full) {
  Checkpoint c;
  c.model = ModelConfig::standard(kind, phi, 2, {3, 2}, {4}, 3.0);
  c.model.gamma = {1.0, 0.5};
  RngStream rng(12);
  c.theta = physics::PhyModel(c.model).init(rng);
  for (double& v : c.theta) v += rng.uniform(-1e-3, 1e-3);
  c.theta[0] = std::numeric_limits<double>::denorm_min();
  c.theta[1] = -0.0;
  c.weights = {2.0, 0.5, 0.25, 0.0};
  c.dt = 0.02;
  c.scale = 0.1;
  c.seed = 0xFFFFFFFFFFFFFFFFull;
  c.optimizer = {{"best_epoch", 7}, {"status", "completed"}};
  c.config = {{"note", "echo"}};
  return c;
}

std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, 8);
  return b;
}

}  // namespace

TEST_CASE("checkpoint: bit-exact round trip") {
  for (ModelKind kind : {ModelKind::PhyLstm2, ModelKind::PhyLstm3}) {
    const Checkpoint c = sample(kind);
    const std::vector<char> bytes = encode_checkpoint(c);
    const Checkpoint d = decode_checkpoint(bytes);
    REQUIRE(d.theta.size() == c.theta.size());
    for (std::size_t i = 0; i < c.theta.size(); ++i) CHECK(bits(d.theta[i]) == bits(c.theta[i]));
    CHECK(d.model.kind == kind);
    CHECK(d.model.net1 == c.model.net1);
    CHECK(d.model.net2 == c.model.net2);
    CHECK(d.model.net3 == c.model.net3);
    CHECK(d.model.gamma == c.model.gamma);
    CHECK(d.model.phi_exponent == c.model.phi_exponent);
    CHECK(d.weights.eta == 0.0);
    CHECK(d.seed == c.seed);
    CHECK(d.scale == c.scale);
    CHECK(d.optimizer == c.optimizer);
    CHECK(d.config == c.config);
    CHECK(encode_checkpoint(d) == bytes);
  }

  const auto dir = std::filesystem::temp_directory_path() / "phylstm_ckpt_test";
  std::filesystem::create_directories(dir);
  const Checkpoint c = sample(ModelKind::PhyLstm3, PhiVariant::Simplified);
  write_checkpoint(dir / "m.phyl", c);
  CHECK(encode_checkpoint(read_checkpoint(dir / "m.phyl")) == encode_checkpoint(c));
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint: layout") {
  const Checkpoint c = sample(ModelKind::PhyLstm2);
  const std::vector<char> bytes = encode_checkpoint(c);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PHYL");
  io::ByteReader r(bytes, "t");
  r.bytes(4);
  CHECK(r.u16() == kCheckpointVersion);
  const auto len = r.u32();
  const auto header = nlohmann::json::parse(r.bytes(len));
  CHECK(header["model"]["kind"] == "phylstm2");
  CHECK(header["model"]["networks"].size() == 2);
  const physics::PhyModel model(c.model);
  std::size_t total = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto n = r.u64();
    CHECK(n == model.network_spec(k).parameter_count());
    for (std::uint64_t i = 0; i < n; ++i) CHECK(bits(r.f64()) == bits(c.theta[total + i]));
    total += n;
  }
  CHECK(r.remaining() == 0);
  CHECK(total == c.theta.size());
}

TEST_CASE("checkpoint: corrupt files are rejected") {
  const std::vector<char> good = encode_checkpoint(sample(ModelKind::PhyLstm3));
  auto kind_of = [](std::vector<char> b) {
    try {
      decode_checkpoint(std::move(b));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  std::vector<char> bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(kind_of(bad_magic) == ErrorKind::Io);
  std::vector<char> bad_version = good;
  bad_version[4] = 9;
  CHECK(kind_of(bad_version) == ErrorKind::Io);
  CHECK(kind_of(std::vector<char>(good.begin(), good.end() - 3)) == ErrorKind::Io);
  std::vector<char> trailing = good;
  trailing.push_back(0);
  CHECK(kind_of(trailing) == ErrorKind::Io);
  std::vector<char> bad_json = good;
  bad_json[10] = '#';
  CHECK(kind_of(bad_json) == ErrorKind::Io);

  Checkpoint wrong = sample(ModelKind::PhyLstm3);
  wrong.theta.pop_back();
  CHECK_THROWS_AS(encode_checkpoint(wrong), Error);
  CHECK_THROWS_AS(model_kind_from_string("lstm"), Error);
  CHECK_THROWS_AS(phi_from_string("partial"), Error);
}
