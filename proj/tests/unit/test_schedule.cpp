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
#include <algorithm>
#include <limits>

#include "doctest.h"
#include "phylstm/core/error.hpp"
#include "phylstm/optim/schedule.hpp"
#include "phylstm/pipeline/data.hpp"
#include "phylstm/simulate/dataset.hpp"

using namespace phylstm;
using namespace phylstm::optim;
using physics::ModelConfig;
using physics::ModelKind;
using physics::PhiVariant;
using physics::PhyModel;

namespace {

simulate::Dataset toy_dataset(double lambda) {
  simulate::BoucWenSystem sys = simulate::BoucWenSystem::sdof_default();
  sys.lambda = lambda;
  simulate::DatasetConfig cfg;
  cfg.n_known = 5;
  cfg.validation_fraction = 0.2;
  cfg.n_collocation = 2;
  cfg.n_test = 0;
  cfg.duration_s = 3.0;
  cfg.fs_hz = 20.0;
  cfg.band = {0.1, 5.0};
  cfg.seed = 11;
  return simulate::build_dataset(sys, cfg);
}

PhyModel toy_model(ModelKind kind = ModelKind::PhyLstm2) {
  return PhyModel(ModelConfig::standard(kind, PhiVariant::Simplified, 1, {6}));
}

std::vector<double> initial(const PhyModel& model) {
  RngStream rng(5);
  return model.init(rng);
}

}  // namespace

TEST_CASE("schedule: zero epochs returns the initial parameters") {
  const simulate::Dataset data = toy_dataset(0.5);
  const TrainData td = pipeline::make_train_data(data, 1.0);
  const PhyModel model = toy_model();
  const std::vector<double> theta0 = initial(model);
  ScheduleConfig cfg;
  cfg.adam.clear();
  cfg.lbfgs.max_iter = 0;
  const TrainResult r = train_schedule(model, theta0, td, cfg);
  CHECK(r.theta == theta0);
  CHECK(r.history.empty());
  CHECK(r.best_epoch == 0);
  CHECK(r.status == TrainStatus::Completed);
}

TEST_CASE("schedule: train data layout") {
  const simulate::Dataset data = toy_dataset(0.5);
  const TrainData td = pipeline::make_train_data(data, 2.0);
  CHECK(td.train.measured() == 4);
  CHECK(td.train.samples() == 6);
  REQUIRE(td.validation.has_value());
  CHECK(td.validation->samples() == 1);
  const simulate::DatasetRecord& first = *data.with_role(simulate::Role::Train).front();
  CHECK(td.train.ag.at(0, 7, 0) == 2.0 * first.ag[7]);
  CHECK(td.train.u.at(0, 7, 0) == 2.0 * first.response->u[7]);
  CHECK(td.train.udot.at(0, 7, 0) == 2.0 * first.response->u_dot[7]);
  const simulate::DatasetRecord& coll = *data.with_role(simulate::Role::Collocation).back();
  CHECK(td.train.ag.at(5, 3, 0) == 2.0 * coll.ag[3]);
  CHECK(pipeline::make_train_data(data, 1.0, false).train.samples() == 4);
}

TEST_CASE("schedule: deterministic and best checkpoint tracks validation minimum") {
  const simulate::Dataset data = toy_dataset(0.5);
  const TrainData td = pipeline::make_train_data(data, 1.0);
  const PhyModel model = toy_model(ModelKind::PhyLstm3);
  ScheduleConfig cfg;
  cfg.adam = {{15, 1e-2, 0.0}, {10, 1e-3, 1e-3}};
  cfg.batches_per_epoch = 2;
  cfg.lbfgs.max_iter = 10;
  cfg.seed = 3;
  const TrainResult a = train_schedule(model, initial(model), td, cfg);
  const TrainResult b = train_schedule(model, initial(model), td, cfg);
  REQUIRE(a.history.size() == b.history.size());
  CHECK(a.theta == b.theta);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_j == b.history[i].train_j);
    CHECK(a.history[i].val_j == b.history[i].val_j);
    CHECK(a.history[i].epoch == i + 1);
  }
  CHECK(a.history.size() >= 26);
  CHECK(a.history[0].phase == "adam1");
  CHECK(a.history[15].phase == "adam2");
  CHECK(a.history.back().phase == "lbfgs");
  CHECK(a.lbfgs_status.has_value());

  const auto best = std::min_element(a.history.begin(), a.history.end(),
                                     [](const HistoryRow& x, const HistoryRow& y) { return x.val_j < y.val_j; });
  CHECK(a.best_epoch == best->epoch);
  CHECK(a.best_val == best->val_j);
  CHECK(model.loss(a.theta, *td.validation, cfg.weights, {}).total == doctest::Approx(a.best_val).epsilon(1e-12));

  // Mini-batch epochs sum the per-batch terms.
  for (const HistoryRow& row : a.history)
    CHECK(row.train_j == doctest::Approx(row.terms.data + row.terms.equality + row.terms.governing +
                                         row.terms.hysteretic).epsilon(1e-12));

  ScheduleConfig other = cfg;
  other.seed = 4;
  CHECK(train_schedule(model, initial(model), td, other).theta != a.theta);
}

TEST_CASE("schedule: linear toy problem is learned") {
  const simulate::Dataset data = toy_dataset(1.0);
  const TrainData td = pipeline::make_train_data(data, 1.0);
  const PhyModel model = toy_model();
  ScheduleConfig cfg;
  cfg.adam = {{300, 1e-2, 0.0}};
  cfg.lbfgs.max_iter = 300;
  const TrainResult r = train_schedule(model, initial(model), td, cfg);
  REQUIRE(r.status == TrainStatus::Completed);
  const double first = r.history.front().train_j;
  const double final_train = model.loss(r.theta, td.train, cfg.weights, {}).total;
  MESSAGE("initial " << first << " final " << final_train << " rows " << r.history.size());
  CHECK(final_train * 100.0 <= first);
}

TEST_CASE("schedule: divergence and validation") {
  const simulate::Dataset data = toy_dataset(0.5);
  const TrainData td = pipeline::make_train_data(data, 1.0);
  const PhyModel model = toy_model();
  ScheduleConfig cfg;
  cfg.adam = {{5, 1e-2, 0.0}};
  cfg.lbfgs.max_iter = 0;
  cfg.divergence_threshold = 1e-12;
  const TrainResult r = train_schedule(model, initial(model), td, cfg);
  CHECK(r.status == TrainStatus::Diverged);
  CHECK(r.history.empty());
  CHECK(r.theta == initial(model));
  CHECK(!r.message.empty());

  ScheduleConfig bad;
  bad.batches_per_epoch = 5;
  CHECK_THROWS_AS(train_schedule(model, initial(model), td, bad), Error);
  bad = ScheduleConfig{};
  bad.adam = {{1, -1.0, 0.0}};
  CHECK_THROWS_AS(train_schedule(model, initial(model), td, bad), Error);
  CHECK_THROWS_AS(train_schedule(model, std::vector<double>(3), td, ScheduleConfig{}), Error);
}

TEST_CASE("schedule: history csv") {
  HistoryRow row;
  row.epoch = 1;
  row.phase = "adam1";
  row.train_j = 0.1;
  row.val_j = 1.0 / 3.0;
  row.terms = {0.1, 0.05, 0.03, 0.02, 0.0};
  const std::string csv = history_csv({row});
  CHECK(csv == "epoch,phase,train_J,val_J,J_d,J_e,J_g,J_h\n1,adam1,0.1,0.3333333333333333,0.05,0.03,0.02,0\n");
}
