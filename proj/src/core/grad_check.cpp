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
#include "phylstm/core/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "phylstm/core/error.hpp"

namespace phylstm {

GradCheckReport grad_check(const LossGradFn& loss_fn, std::span<const double> params, double eps) {
  require(eps >= 1e-8 && eps <= 1e-3, "grad_check eps must lie in [1e-8, 1e-3]");
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> analytic(theta.size());
  const double base = loss_fn(theta, analytic);
  if (!std::isfinite(base)) throw_error(ErrorKind::NumericFailure, "grad_check: loss is not finite");

  GradCheckReport report;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double plus = loss_fn(theta, {});
    theta[i] = saved - eps;
    const double minus = loss_fn(theta, {});
    theta[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw_error(ErrorKind::NumericFailure, "grad_check: perturbed loss is not finite");
    const double numeric = (plus - minus) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (i == 0 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace phylstm
