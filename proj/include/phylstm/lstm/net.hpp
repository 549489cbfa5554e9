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
#include <span>
#include <vector>

#include "phylstm/core/rng.hpp"
#include "phylstm/core/tape.hpp"
#include "phylstm/core/tensor.hpp"

namespace phylstm::lstm {

/// Deep LSTM architecture: stacked LSTM layers followed by fully connected
/// layers applied per time step. Hidden FC layers use tanh, the last FC layer
/// is linear and its width is the output channel count.
struct NetSpec {
  std::size_t input_channels = 1;
  std::size_t output_channels = 1;
  std::vector<std::size_t> lstm_layers;
  std::vector<std::size_t> fc_layers;

  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const NetSpec&) const = default;
};

/// Read-only view of one LSTM layer's parameters.
struct LstmLayerParams {
  std::size_t inputs = 0;
  std::size_t units = 0;
  std::span<const double> w_input;   // [4H x inputs], gate blocks f, i, c~, o
  std::span<const double> w_hidden;  // [4H x H]
  std::span<const double> bias;      // [4H]
};

/// Trainable parameters of one network stored as a single flat vector.
///
/// Flat order, for each LSTM layer l = 0..L-1:
///   W_xf, W_xi, W_xc, W_xo   (each H x in, row-major)
///   W_hf, W_hi, W_hc, W_ho   (each H x H, row-major)
///   b_f, b_i, b_c, b_o       (each H)
/// then for each FC layer: W (out x in, row-major), b (out).
class NetParams {
 public:
  explicit NetParams(NetSpec spec);
  NetParams(NetSpec spec, std::vector<double> flat);

  const NetSpec& spec() const noexcept { return spec_; }
  std::span<const double> flat() const noexcept { return flat_; }
  std::span<double> flat() noexcept { return flat_; }
  std::size_t size() const noexcept { return flat_.size(); }

  LstmLayerParams lstm_layer(std::size_t l) const;
  std::span<double> lstm_w_input(std::size_t l);
  std::span<double> lstm_w_hidden(std::size_t l);
  std::span<double> lstm_bias(std::size_t l);
  std::span<const double> fc_weight(std::size_t k) const;
  std::span<const double> fc_bias(std::size_t k) const;
  std::span<double> fc_weight(std::size_t k);
  std::span<double> fc_bias(std::size_t k);

  /// Input width of FC layer k.
  std::size_t fc_inputs(std::size_t k) const;

  bool operator==(const NetParams& other) const = default;

 private:
  struct Block {
    std::size_t offset;
    std::size_t size;
    bool operator==(const Block&) const = default;
  };
  NetSpec spec_;
  std::vector<double> flat_;
  std::vector<Block> blocks_;  // per LSTM layer: w_input, w_hidden, bias; per FC: w, b
};

/// Glorot-uniform weights, bounds ±sqrt(6 / (fan_in + fan_out)) per gate
/// block; biases zero except the forget-gate bias, which is one.
NetParams init_params(const NetSpec& spec, RngStream& rng);

struct CellState {
  Tensor h;  // [1, rows, H]
  Tensor c;  // [1, rows, H]
};

/// One LSTM time step for `rows` independent samples. x is [1, rows, in].
CellState lstm_cell_step(const Tensor& x, const CellState& prev, const LstmLayerParams& layer);

struct CellGradients {
  std::vector<double> w_input, w_hidden, bias;
  Tensor x, h_prev, c_prev;
};

/// Backward of lstm_cell_step given upstream gradients for h_t and c_t.
CellGradients lstm_cell_backward(const Tensor& x, const CellState& prev,
                                 const LstmLayerParams& layer, const Tensor& dh,
                                 const Tensor& dc);

/// Parameters of one network bound to a tape.
struct NetVars {
  std::vector<Var> tensors;  // in flat-block order
};

/// Records the parameters on `tape` as leaves (trainable) or constants.
NetVars bind(GradTape& tape, const NetParams& params, bool trainable);

/// Records the network forward pass; input is [S, T, input_channels].
Var forward(GradTape& tape, const NetSpec& spec, const NetVars& vars, Var input);

/// Copies the parameter gradients from the last backward into `grad`
/// (flat order, size = parameter_count()).
void gather_gradients(GradTape& tape, const NetVars& vars, std::span<double> grad);

/// Inference only: output [S, T, output_channels] at the input's dt.
SeqBatch deep_forward(const SeqBatch& input, const NetParams& params);

}  // namespace phylstm::lstm
