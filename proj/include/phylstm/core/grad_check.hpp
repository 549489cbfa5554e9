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
#pragma once

#include <functional>
#include <span>

namespace phylstm {

/// Scalar objective over a flat parameter vector. When `grad` is non-empty
/// the function must overwrite it with the gradient at `params`.
using LossGradFn = std::function<double(std::span<const double> params, std::span<double> grad)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares the analytic gradient with central differences, one coordinate at
/// a time. Relative error per coordinate is
/// |analytic - fd| / max(|analytic|, |fd|, 1e-12).
///
/// eps must lie in [1e-8, 1e-3]; a non-finite loss throws numeric-failure.
GradCheckReport grad_check(const LossGradFn& loss_fn, std::span<const double> params, double eps);

}  // namespace phylstm
