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
#include "phylstm/pipeline/data.hpp"

#include "phylstm/core/error.hpp"

namespace phylstm::pipeline {

using simulate::DatasetRecord;
using simulate::Role;

Tensor ag_tensor(const RecordList& records, double scale) {
  require(!records.empty(), "ag_tensor: no records");
  const std::size_t steps = records.front()->ag.size();
  Tensor out({records.size(), steps, 1});
  for (std::size_t s = 0; s < records.size(); ++s) {
    require(records[s]->ag.size() == steps, "ag_tensor: records differ in length");
    for (std::size_t t = 0; t < steps; ++t) out.at(s, t, 0) = scale * records[s]->ag[t];
  }
  return out;
}

Tensor response_tensor(const RecordList& records, Field field, double scale) {
  require(!records.empty(), "response_tensor: no records");
  for (const DatasetRecord* r : records)
    require(r->response.has_value(), "response_tensor: record " + r->id + " has no response");
  const std::size_t steps = records.front()->response->steps, dof = records.front()->response->dof;
  Tensor out({records.size(), steps, dof});
  for (std::size_t s = 0; s < records.size(); ++s) {
    const simulate::Trajectory& tr = *records[s]->response;
    require(tr.steps == steps && tr.dof == dof, "response_tensor: records differ in shape");
    const std::vector<double>& src = field == Field::U      ? tr.u
                                     : field == Field::UDot ? tr.u_dot
                                     : field == Field::R    ? tr.r
                                                            : tr.g;
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t i = 0; i < dof; ++i) out.at(s, t, i) = scale * tr.at(src, t, i);
  }
  return out;
}

physics::LossBatch make_loss_batch(const RecordList& measured, const RecordList& unmeasured,
                                   double dt, double scale) {
  require(scale > 0.0, "make_loss_batch: scale must be positive");
  RecordList all = measured;
  all.insert(all.end(), unmeasured.begin(), unmeasured.end());
  physics::LossBatch b;
  b.ag = ag_tensor(all, scale);
  b.u = response_tensor(measured, Field::U, scale);
  b.udot = response_tensor(measured, Field::UDot, scale);
  b.dt = dt;
  return b;
}

optim::TrainData make_train_data(const simulate::Dataset& data, double scale, bool use_collocation) {
  const RecordList train = data.with_role(Role::Train);
  require(!train.empty(), "make_train_data: dataset has no training records");
  const RecordList none;
  optim::TrainData out;
  out.train = make_loss_batch(train, use_collocation ? data.with_role(Role::Collocation) : none,
                              data.dt, scale);
  const RecordList val = data.with_role(Role::Validation);
  if (!val.empty()) out.validation = make_loss_batch(val, none, data.dt, scale);
  return out;
}

}  // namespace phylstm::pipeline
