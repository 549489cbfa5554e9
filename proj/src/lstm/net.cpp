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
#include "phylstm/lstm/net.hpp"

#include <cmath>

#include "phylstm/core/error.hpp"
#include "phylstm/kernels/kernels.hpp"

namespace phylstm::lstm {

void NetSpec::validate() const {
  require(input_channels >= 1 && output_channels >= 1, "network channel counts must be >= 1");
  require(!lstm_layers.empty(), "network needs at least one LSTM layer");
  require(!fc_layers.empty(), "network needs at least one fully connected layer");
  for (std::size_t w : lstm_layers) require(w >= 1, "LSTM widths must be >= 1");
  for (std::size_t w : fc_layers) require(w >= 1, "FC widths must be >= 1");
  require(fc_layers.back() == output_channels,
          "last FC width must equal output_channels (" + std::to_string(output_channels) + ")");
}

std::size_t NetSpec::parameter_count() const {
  std::size_t n = 0, in = input_channels;
  for (std::size_t h : lstm_layers) {
    n += 4 * h * in + 4 * h * h + 4 * h;
    in = h;
  }
  for (std::size_t w : fc_layers) {
    n += w * in + w;
    in = w;
  }
  return n;
}

NetParams::NetParams(NetSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t offset = 0, in = spec_.input_channels;
  auto add = [&](std::size_t size) {
    blocks_.push_back({offset, size});
    offset += size;
  };
  for (std::size_t h : spec_.lstm_layers) {
    add(4 * h * in);
    add(4 * h * h);
    add(4 * h);
    in = h;
  }
  for (std::size_t w : spec_.fc_layers) {
    add(w * in);
    add(w);
    in = w;
  }
  flat_.assign(offset, 0.0);
}

NetParams::NetParams(NetSpec spec, std::vector<double> flat) : NetParams(std::move(spec)) {
  require(flat.size() == flat_.size(), "flat parameter vector has " + std::to_string(flat.size()) +
                                           " entries, network needs " +
                                           std::to_string(flat_.size()));
  flat_ = std::move(flat);
}

LstmLayerParams NetParams::lstm_layer(std::size_t l) const {
  require(l < spec_.lstm_layers.size(), "LSTM layer index out of range");
  const std::size_t h = spec_.lstm_layers[l];
  const std::size_t in = l == 0 ? spec_.input_channels : spec_.lstm_layers[l - 1];
  std::span<const double> all = flat_;
  const Block& wx = blocks_[3 * l];
  const Block& wh = blocks_[3 * l + 1];
  const Block& b = blocks_[3 * l + 2];
  return {in, h, all.subspan(wx.offset, wx.size), all.subspan(wh.offset, wh.size),
          all.subspan(b.offset, b.size)};
}

std::span<double> NetParams::lstm_w_input(std::size_t l) {
  const Block& b = blocks_.at(3 * l);
  return std::span<double>(flat_).subspan(b.offset, b.size);
}
std::span<double> NetParams::lstm_w_hidden(std::size_t l) {
  const Block& b = blocks_.at(3 * l + 1);
  return std::span<double>(flat_).subspan(b.offset, b.size);
}
std::span<double> NetParams::lstm_bias(std::size_t l) {
  const Block& b = blocks_.at(3 * l + 2);
  return std::span<double>(flat_).subspan(b.offset, b.size);
}

std::span<const double> NetParams::fc_weight(std::size_t k) const {
  const Block& b = blocks_.at(3 * spec_.lstm_layers.size() + 2 * k);
  return std::span<const double>(flat_).subspan(b.offset, b.size);
}
std::span<const double> NetParams::fc_bias(std::size_t k) const {
  const Block& b = blocks_.at(3 * spec_.lstm_layers.size() + 2 * k + 1);
  return std::span<const double>(flat_).subspan(b.offset, b.size);
}
std::span<double> NetParams::fc_weight(std::size_t k) {
  const Block& b = blocks_.at(3 * spec_.lstm_layers.size() + 2 * k);
  return std::span<double>(flat_).subspan(b.offset, b.size);
}
std::span<double> NetParams::fc_bias(std::size_t k) {
  const Block& b = blocks_.at(3 * spec_.lstm_layers.size() + 2 * k + 1);
  return std::span<double>(flat_).subspan(b.offset, b.size);
}

std::size_t NetParams::fc_inputs(std::size_t k) const {
  return k == 0 ? spec_.lstm_layers.back() : spec_.fc_layers.at(k - 1);
}

NetParams init_params(const NetSpec& spec, RngStream& rng) {
  NetParams p(spec);
  auto glorot = [&rng](std::span<double> block, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    rng.fill_uniform(block, -bound, bound);
  };
  for (std::size_t l = 0; l < spec.lstm_layers.size(); ++l) {
    const LstmLayerParams view = p.lstm_layer(l);
    const std::size_t h = view.units, in = view.inputs;
    auto wx = p.lstm_w_input(l);
    auto wh = p.lstm_w_hidden(l);
    for (std::size_t g = 0; g < 4; ++g) glorot(wx.subspan(g * h * in, h * in), in, h);
    for (std::size_t g = 0; g < 4; ++g) glorot(wh.subspan(g * h * h, h * h), h, h);
    auto b = p.lstm_bias(l);
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(h), 1.0);
  }
  for (std::size_t k = 0; k < spec.fc_layers.size(); ++k) {
    glorot(p.fc_weight(k), p.fc_inputs(k), spec.fc_layers[k]);
    auto b = p.fc_bias(k);
    std::fill(b.begin(), b.end(), 0.0);
  }
  return p;
}

namespace {

void check_cell_shapes(const Tensor& x, const CellState& prev, const LstmLayerParams& layer) {
  const std::size_t rows = x.shape().steps;
  require(x.shape() == Shape{1, rows, layer.inputs},
          "cell input " + to_string(x.shape()) + " does not match layer inputs " +
              std::to_string(layer.inputs));
  require(prev.h.shape() == Shape{1, rows, layer.units} &&
              prev.c.shape() == Shape{1, rows, layer.units},
          "cell state shape does not match layer width");
  require(layer.w_input.size() == 4 * layer.units * layer.inputs &&
              layer.w_hidden.size() == 4 * layer.units * layer.units &&
              layer.bias.size() == 4 * layer.units,
          "layer parameter sizes inconsistent");
}

// Pre-activations [rows, 4H] = x Wx^T + h Wh^T + b.
std::vector<double> gate_inputs(const Tensor& x, const Tensor& h, const LstmLayerParams& layer) {
  const auto& k = kernels::active();
  const std::size_t rows = x.shape().steps, in = layer.inputs, H = layer.units, G = 4 * H;
  std::vector<double> gates(rows * G);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t g = 0; g < G; ++g) gates[r * G + g] = layer.bias[g];
  std::vector<double> wx_t(in * G), wh_t(H * G);
  kernels::transpose(G, in, layer.w_input.data(), wx_t.data());
  kernels::transpose(G, H, layer.w_hidden.data(), wh_t.data());
  k.gemm_nn(rows, G, in, x.data().data(), in, wx_t.data(), G, gates.data(), G);
  k.gemm_nn(rows, G, H, h.data().data(), H, wh_t.data(), G, gates.data(), G);
  return gates;
}

}  // namespace

CellState lstm_cell_step(const Tensor& x, const CellState& prev, const LstmLayerParams& layer) {
  check_cell_shapes(x, prev, layer);
  const std::size_t rows = x.shape().steps, H = layer.units;
  std::vector<double> gates = gate_inputs(x, prev.h, layer);
  CellState next{Tensor::matrix(rows, H), Tensor::matrix(rows, H)};
  std::vector<double> tanh_c(rows * H);
  kernels::active().lstm_forward(rows, H, gates.data(), prev.c.data().data(),
                                 next.c.data().data(), tanh_c.data(), next.h.data().data());
  return next;
}

CellGradients lstm_cell_backward(const Tensor& x, const CellState& prev,
                                 const LstmLayerParams& layer, const Tensor& dh,
                                 const Tensor& dc) {
  check_cell_shapes(x, prev, layer);
  const auto& k = kernels::active();
  const std::size_t rows = x.shape().steps, in = layer.inputs, H = layer.units, G = 4 * H;
  require(dh.size() == rows * H && dc.size() == rows * H, "upstream gradient shape mismatch");

  std::vector<double> gates = gate_inputs(x, prev.h, layer);
  std::vector<double> c(rows * H), tanh_c(rows * H), h(rows * H);
  k.lstm_forward(rows, H, gates.data(), prev.c.data().data(), c.data(), tanh_c.data(), h.data());

  std::vector<double> dgates(rows * G);
  std::vector<double> dcell(dc.data().begin(), dc.data().end());
  k.lstm_backward(rows, H, gates.data(), prev.c.data().data(), tanh_c.data(), dh.data().data(),
                  dcell.data(), dgates.data());

  CellGradients out{std::vector<double>(G * in, 0.0),
                    std::vector<double>(G * H, 0.0),
                    std::vector<double>(G, 0.0),
                    Tensor::matrix(rows, in),
                    Tensor::matrix(rows, H),
                    Tensor({1, rows, H}, std::move(dcell))};
  k.gemm_tn(G, in, rows, dgates.data(), G, x.data().data(), in, out.w_input.data(), in);
  k.gemm_tn(G, H, rows, dgates.data(), G, prev.h.data().data(), H, out.w_hidden.data(), H);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t g = 0; g < G; ++g) out.bias[g] += dgates[r * G + g];
  k.gemm_nn(rows, in, G, dgates.data(), G, layer.w_input.data(), in, out.x.data().data(), in);
  k.gemm_nn(rows, H, G, dgates.data(), G, layer.w_hidden.data(), H, out.h_prev.data().data(), H);
  return out;
}

NetVars bind(GradTape& tape, const NetParams& params, bool trainable) {
  const NetSpec& spec = params.spec();
  NetVars vars;
  auto record = [&](Shape shape, std::span<const double> values) {
    Tensor t(shape, std::vector<double>(values.begin(), values.end()));
    vars.tensors.push_back(trainable ? tape.leaf(std::move(t)) : tape.constant(std::move(t)));
  };
  for (std::size_t l = 0; l < spec.lstm_layers.size(); ++l) {
    const LstmLayerParams layer = params.lstm_layer(l);
    const std::size_t G = 4 * layer.units;
    record({1, G, layer.inputs}, layer.w_input);
    record({1, G, layer.units}, layer.w_hidden);
    record({1, 1, G}, layer.bias);
  }
  for (std::size_t k = 0; k < spec.fc_layers.size(); ++k) {
    record({1, spec.fc_layers[k], params.fc_inputs(k)}, params.fc_weight(k));
    record({1, 1, spec.fc_layers[k]}, params.fc_bias(k));
  }
  return vars;
}

Var forward(GradTape& tape, const NetSpec& spec, const NetVars& vars, Var input) {
  require(tape.value(input).shape().channels == spec.input_channels,
          "network expects " + std::to_string(spec.input_channels) + " input channels, got " +
              std::to_string(tape.value(input).shape().channels));
  Var h = input;
  std::size_t v = 0;
  for (std::size_t l = 0; l < spec.lstm_layers.size(); ++l, v += 3)
    h = tape.lstm_layer(h, vars.tensors[v], vars.tensors[v + 1], vars.tensors[v + 2]);
  for (std::size_t k = 0; k < spec.fc_layers.size(); ++k, v += 2) {
    h = tape.affine(h, vars.tensors[v], vars.tensors[v + 1]);
    if (k + 1 < spec.fc_layers.size()) h = tape.tanh(h);
  }
  return h;
}

void gather_gradients(GradTape& tape, const NetVars& vars, std::span<double> grad) {
  std::size_t offset = 0;
  for (Var v : vars.tensors) {
    const Tensor& g = tape.grad(v);
    require(offset + g.size() <= grad.size(), "gradient buffer too small");
    std::copy(g.data().begin(), g.data().end(), grad.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += g.size();
  }
  require(offset == grad.size(), "gradient buffer size mismatch");
}

SeqBatch deep_forward(const SeqBatch& input, const NetParams& params) {
  require(input.channels() == params.spec().input_channels,
          "input has " + std::to_string(input.channels()) + " channels, network expects " +
              std::to_string(params.spec().input_channels));
  GradTape tape;
  const NetVars vars = bind(tape, params, false);
  const Var x = tape.constant(input.values());
  const Var y = forward(tape, params.spec(), vars, x);
  return SeqBatch(tape.value(y), input.dt());
}

}  // namespace phylstm::lstm
