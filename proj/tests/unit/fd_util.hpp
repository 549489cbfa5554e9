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

// Test-only helpers: random tensors and a tape-based finite-difference harness.

#include <cmath>
#include <functional>
#include <vector>

#include "phylstm/core/grad_check.hpp"
#include "phylstm/core/rng.hpp"
#include "phylstm/core/tape.hpp"

namespace phylstm::testing {

inline Tensor random_tensor(RngStream& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  rng.fill_uniform(t.data(), lo, hi);
  return t;
}

/// Builds loss = || f(inputs) - target ||^2 on a fresh tape and checks the
/// gradient with respect to all inputs against central differences.
/// `inputs` are concatenated into one flat parameter vector.
inline GradCheckReport check_tape_op(
    const std::vector<Tensor>& inputs,
    const std::function<Var(GradTape&, const std::vector<Var>&)>& f, std::uint64_t seed,
    double eps = 1e-6) {
  std::vector<double> flat;
  for (const Tensor& t : inputs) flat.insert(flat.end(), t.data().begin(), t.data().end());

  Tensor target;
  {
    GradTape probe;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(probe.constant(t));
    RngStream rng(seed);
    target = random_tensor(rng, probe.value(f(probe, vars)).shape());
  }

  LossGradFn fn = [&](std::span<const double> p, std::span<double> grad) {
    GradTape tape;
    std::vector<Var> vars;
    std::size_t off = 0;
    for (const Tensor& t : inputs) {
      Tensor v(t.shape(), std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(off),
                                              p.begin() + static_cast<std::ptrdiff_t>(off + t.size())));
      vars.push_back(tape.leaf(std::move(v)));
      off += t.size();
    }
    const Var out = f(tape, vars);
    const Var loss = tape.sum_of_squares(tape.sub(out, tape.constant(target)));
    if (!grad.empty()) {
      tape.backward(loss);
      std::size_t o = 0;
      for (Var v : vars) {
        const Tensor& g = tape.grad(v);
        std::copy(g.data().begin(), g.data().end(), grad.begin() + static_cast<std::ptrdiff_t>(o));
        o += g.size();
      }
    }
    return tape.value(loss).item();
  };
  return grad_check(fn, flat, eps);
}

}  // namespace phylstm::testing
