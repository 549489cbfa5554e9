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

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phylstm/core/grad_check.hpp"

namespace phylstm::optim {

struct AdamOptions {
  double lr = 1e-3;
  double decay = 0.0;  // inverse-time decay: lr_t = lr / (1 + decay * steps_taken)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. The decay counter is the number of steps taken
/// before the current one, so the first step uses the undecayed rate.
class Adam {
 public:
  Adam(std::size_t n, AdamOptions options);

  void step(std::span<double> params, std::span<const double> grad);

  std::size_t steps() const noexcept { return t_; }
  double current_lr() const noexcept;
  std::span<const double> first_moment() const noexcept { return m_; }
  std::span<const double> second_moment() const noexcept { return v_; }

 private:
  AdamOptions opt_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

struct LbfgsOptions {
  std::size_t memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-8;  // infinity norm
  double rel_tol = 1e-12;  // |f_prev - f| / max(|f_prev|, |f|)
  std::size_t max_iter = 500;
  std::size_t max_line_search = 25;
};

enum class LbfgsStatus { Converged, LossStalled, MaxIterations, LineSearchFailed, Stopped };
const char* to_string(LbfgsStatus status) noexcept;

/// State after an accepted iteration, including which Wolfe conditions the
/// accepted step satisfied.
struct LbfgsIterate {
  std::size_t iteration = 0;
  double loss = 0.0;
  double grad_inf = 0.0;
  double step = 0.0;
  bool armijo = false;
  bool curvature = false;
  std::span<const double> x;
};

struct LbfgsResult {
  std::vector<double> x;
  double loss = 0.0;
  LbfgsStatus status = LbfgsStatus::Converged;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// Called after each accepted iteration; returning false stops the run.
using LbfgsCallback = std::function<bool(const LbfgsIterate&)>;

/// Limited-memory BFGS (two-loop recursion) with a strong-Wolfe line search.
/// Curvature pairs with s'y <= 0 are not stored.
LbfgsResult lbfgs_minimize(const LossGradFn& fn, std::vector<double> x0,
                           const LbfgsOptions& options, const LbfgsCallback& callback = {});

}  // namespace phylstm::optim
