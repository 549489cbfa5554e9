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

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "phylstm/core/tensor.hpp"

namespace phylstm {

/// Handle to a value recorded on a GradTape.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const noexcept { return id != UINT32_MAX; }
};

enum class Op : std::uint8_t {
  Leaf,
  Constant,
  Affine,
  Sigmoid,
  Tanh,
  Hadamard,
  Add,
  Sub,
  Scale,
  ConcatChannels,
  SliceChannels,
  SliceSamples,
  TimeFilter,
  SumOfSquares,
  AbsPow,
  StoryDrift,
  LstmLayer,
};

/// Linear filter along the time axis. Row t of the output is a weighted sum
/// of input steps; rows within `head.size()` of the start or `tail.size()` of
/// the end use their own explicit taps, the rest use `interior` centred on t.
struct TimeStencil {
  using Taps = std::vector<std::pair<int, double>>;  // (offset from t, weight)
  Taps interior;
  std::vector<Taps> head;  // head[t] for t = 0, 1, ...
  std::vector<Taps> tail;  // tail[k] for t = n - 1 - k
  std::size_t min_steps = 1;

  const Taps& taps(std::size_t t, std::size_t n) const;
};

/// Reverse-mode tape over whole-array primitives.
///
/// Values are recorded in execution order; `backward` walks the tape once in
/// reverse and accumulates gradients for every node that depends on a leaf.
/// The tape is append-only until `clear()`.
class GradTape {
 public:
  GradTape() = default;
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  /// Differentiable input (parameters or inputs under test).
  Var leaf(Tensor value);
  /// Non-differentiable input.
  Var constant(Tensor value);

  /// y[s,t,:] = W x[s,t,:] + b with W [1, out, in] and b [1, 1, out].
  Var affine(Var x, Var weight, Var bias);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var hadamard(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double factor);
  Var concat_channels(std::span<const Var> parts);
  Var slice_channels(Var x, std::size_t first, std::size_t count);
  Var slice_samples(Var x, std::size_t first, std::size_t count);
  Var time_filter(Var x, const TimeStencil& stencil);
  /// Scalar [1,1,1] sum of squared elements.
  Var sum_of_squares(Var x);
  /// |x|^p elementwise, p >= 0 (p = 0 yields ones).
  Var abs_pow(Var x, double p);
  /// Inter-story difference along channels within groups of `width`:
  /// y_0 = x_0, y_i = x_i - x_{i-1}.
  Var story_drift(Var x, std::size_t width);
  /// Whole LSTM layer unrolled over time from zero state.
  ///
  /// x [S,T,in]; w_input [1, 4H, in] and w_hidden [1, 4H, H] stack the gate
  /// blocks in order f, i, c~, o; bias [1, 1, 4H]. Returns h [S,T,H].
  Var lstm_layer(Var x, Var w_input, Var w_hidden, Var bias);

  void backward(Var scalar_output);
  void clear();

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient accumulated by the last backward; zero-filled if unreached.
  const Tensor& grad(Var v);
  Op op(Var v) const { return nodes_.at(v.id).op; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  using Backward = std::function<void(GradTape&, std::uint32_t)>;
  struct Node {
    Op op;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::uint32_t> inputs;
    Backward backward;
  };

  Var push(Op op, Tensor value, std::vector<std::uint32_t> inputs, Backward backward);
  Tensor& grad_slot(std::uint32_t id);
  bool needs(std::uint32_t id) const { return nodes_[id].requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace phylstm
