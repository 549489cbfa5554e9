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
#include "phylstm/core/tape.hpp"

#include <cmath>
#include <memory>

#include "phylstm/core/error.hpp"
#include "phylstm/kernels/kernels.hpp"

namespace phylstm {

const TimeStencil::Taps& TimeStencil::taps(std::size_t t, std::size_t n) const {
  if (t < head.size()) return head[t];
  const std::size_t from_end = n - 1 - t;
  if (from_end < tail.size()) return tail[from_end];
  return interior;
}

Var GradTape::push(Op op, Tensor value, std::vector<std::uint32_t> inputs, Backward backward) {
  bool needs_grad = false;
  for (std::uint32_t in : inputs) needs_grad = needs_grad || nodes_[in].requires_grad;
  Node node{op, std::move(value), Tensor{}, needs_grad, std::move(inputs),
            needs_grad ? std::move(backward) : Backward{}};
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& GradTape::grad_slot(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || !(n.grad.shape() == n.value.shape()))
    n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

const Tensor& GradTape::grad(Var v) { return grad_slot(v.id); }

Var GradTape::leaf(Tensor value) {
  nodes_.push_back(Node{Op::Leaf, std::move(value), Tensor{}, true, {}, {}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var GradTape::constant(Tensor value) {
  nodes_.push_back(Node{Op::Constant, std::move(value), Tensor{}, false, {}, {}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var GradTape::affine(Var x, Var weight, Var bias) {
  const Shape xs = value(x).shape();
  const Shape ws = value(weight).shape();
  const std::size_t in = xs.channels, out = ws.steps;
  require(ws.samples == 1 && ws.channels == in,
          "affine weight " + to_string(ws) + " does not match input " + to_string(xs));
  require(value(bias).size() == out, "affine bias size mismatch");
  const std::size_t rows = xs.samples * xs.steps;
  const auto& kern = kernels::active();

  Tensor y({xs.samples, xs.steps, out});
  const double* b = value(bias).data().data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t o = 0; o < out; ++o) y.data()[r * out + o] = b[o];
  std::vector<double> wt(in * out);
  kernels::transpose(out, in, value(weight).data().data(), wt.data());
  kern.gemm_nn(rows, out, in, value(x).data().data(), in, wt.data(), out, y.data().data(), out);

  return push(Op::Affine, std::move(y), {x.id, weight.id, bias.id},
              [rows, in, out](GradTape& tape, std::uint32_t self) {
                const auto& k = kernels::active();
                const Node& node = tape.nodes_[self];
                const std::uint32_t xi = node.inputs[0], wi = node.inputs[1], bi = node.inputs[2];
                const double* dy = node.grad.data().data();
                if (tape.needs(xi))
                  k.gemm_nn(rows, in, out, dy, out, tape.nodes_[wi].value.data().data(), in,
                            tape.grad_slot(xi).data().data(), in);
                if (tape.needs(wi))
                  k.gemm_tn(out, in, rows, dy, out, tape.nodes_[xi].value.data().data(), in,
                            tape.grad_slot(wi).data().data(), in);
                if (tape.needs(bi)) {
                  double* db = tape.grad_slot(bi).data().data();
                  for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t o = 0; o < out; ++o) db[o] += dy[r * out + o];
                }
              });
}

Var GradTape::sigmoid(Var x) {
  Tensor y(value(x).shape());
  kernels::active().sigmoid(y.size(), value(x).data().data(), y.data().data());
  return push(Op::Sigmoid, std::move(y), {x.id}, [](GradTape& tape, std::uint32_t self) {
    const Node& node = tape.nodes_[self];
    auto dx = tape.grad_slot(node.inputs[0]).data();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double s = node.value.data()[i];
      dx[i] += node.grad.data()[i] * s * (1.0 - s);
    }
  });
}

Var GradTape::tanh(Var x) {
  Tensor y(value(x).shape());
  kernels::active().tanh(y.size(), value(x).data().data(), y.data().data());
  return push(Op::Tanh, std::move(y), {x.id}, [](GradTape& tape, std::uint32_t self) {
    const Node& node = tape.nodes_[self];
    auto dx = tape.grad_slot(node.inputs[0]).data();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double t = node.value.data()[i];
      dx[i] += node.grad.data()[i] * (1.0 - t * t);
    }
  });
}

namespace {
void require_same(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), std::string(what) + " shape mismatch: " +
                                      to_string(a.shape()) + " vs " + to_string(b.shape()));
}
}  // namespace

Var GradTape::hadamard(Var a, Var b) {
  require_same(value(a), value(b), "hadamard");
  Tensor y(value(a).shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = value(a).data()[i] * value(b).data()[i];
  return push(Op::Hadamard, std::move(y), {a.id, b.id}, [](GradTape& tape, std::uint32_t self) {
    const Node& node = tape.nodes_[self];
    const std::uint32_t ai = node.inputs[0], bi = node.inputs[1];
    if (tape.needs(ai)) {
      auto da = tape.grad_slot(ai).data();
      for (std::size_t i = 0; i < da.size(); ++i)
        da[i] += node.grad.data()[i] * tape.nodes_[bi].value.data()[i];
    }
    if (tape.needs(bi)) {
      auto db = tape.grad_slot(bi).data();
      for (std::size_t i = 0; i < db.size(); ++i)
        db[i] += node.grad.data()[i] * tape.nodes_[ai].value.data()[i];
    }
  });
}

Var GradTape::add(Var a, Var b) {
  require_same(value(a), value(b), "add");
  Tensor y(value(a).shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = value(a).data()[i] + value(b).data()[i];
  return push(Op::Add, std::move(y), {a.id, b.id}, [](GradTape& tape, std::uint32_t self) {
    const Node& node = tape.nodes_[self];
    for (std::uint32_t in : node.inputs) {
      if (!tape.needs(in)) continue;
      auto d = tape.grad_slot(in).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += node.grad.data()[i];
    }
  });
}

Var GradTape::sub(Var a, Var b) {
  require_same(value(a), value(b), "sub");
  Tensor y(value(a).shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = value(a).data()[i] - value(b).data()[i];
  return push(Op::Sub, std::move(y), {a.id, b.id}, [](GradTape& tape, std::uint32_t self) {
    const Node& node = tape.nodes_[self];
    const std::uint32_t ai = node.inputs[0], bi = node.inputs[1];
    if (tape.needs(ai)) {
      auto d = tape.grad_slot(ai).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += node.grad.data()[i];
    }
    if (tape.needs(bi)) {
      auto d = tape.grad_slot(bi).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= node.grad.data()[i];
    }
  });
}

Var GradTape::scale(Var a, double factor) {
  Tensor y(value(a).shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = factor * value(a).data()[i];
  return push(Op::Scale, std::move(y), {a.id}, [factor](GradTape& tape, std::uint32_t self) {
    const Node& node = tape.nodes_[self];
    auto d = tape.grad_slot(node.inputs[0]).data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * node.grad.data()[i];
  });
}

Var GradTape::concat_channels(std::span<const Var> parts) {
  require(!parts.empty(), "concat_channels of nothing");
  const Shape first = value(parts[0]).shape();
  std::size_t total = 0;
  std::vector<std::uint32_t> ids;
  for (Var p : parts) {
    const Shape s = value(p).shape();
    require(s.samples == first.samples && s.steps == first.steps,
            "concat_channels shape mismatch: " + to_string(s));
    total += s.channels;
    ids.push_back(p.id);
  }
  const std::size_t rows = first.samples * first.steps;
  Tensor y({first.samples, first.steps, total});
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& v = value(p);
    const std::size_t c = v.shape().channels;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < c; ++j) y.data()[r * total + offset + j] = v.data()[r * c + j];
    offset += c;
  }
  return push(Op::ConcatChannels, std::move(y), std::move(ids),
              [rows, total](GradTape& tape, std::uint32_t self) {
                const Node& node = tape.nodes_[self];
                std::size_t off = 0;
                for (std::uint32_t in : node.inputs) {
                  const std::size_t c = tape.nodes_[in].value.shape().channels;
                  if (tape.needs(in)) {
                    auto d = tape.grad_slot(in).data();
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t j = 0; j < c; ++j)
                        d[r * c + j] += node.grad.data()[r * total + off + j];
                  }
                  off += c;
                }
              });
}

Var GradTape::slice_channels(Var x, std::size_t first, std::size_t count) {
  Tensor y = select_channels(value(x), first, count);
  const std::size_t total = value(x).shape().channels;
  return push(Op::SliceChannels, std::move(y), {x.id},
              [first, count, total](GradTape& tape, std::uint32_t self) {
                const Node& node = tape.nodes_[self];
                auto d = tape.grad_slot(node.inputs[0]).data();
                const std::size_t rows = node.value.size() / count;
                for (std::size_t r = 0; r < rows; ++r)
                  for (std::size_t j = 0; j < count; ++j)
                    d[r * total + first + j] += node.grad.data()[r * count + j];
              });
}

Var GradTape::slice_samples(Var x, std::size_t first, std::size_t count) {
  const Shape s = value(x).shape();
  require(first + count <= s.samples && count > 0, "sample slice out of range");
  const std::size_t stride = s.steps * s.channels;
  Tensor y({count, s.steps, s.channels});
  std::copy_n(value(x).data().begin() + static_cast<std::ptrdiff_t>(first * stride),
              count * stride, y.data().begin());
  return push(Op::SliceSamples, std::move(y), {x.id},
              [first, stride](GradTape& tape, std::uint32_t self) {
                const Node& node = tape.nodes_[self];
                auto d = tape.grad_slot(node.inputs[0]).data();
                for (std::size_t i = 0; i < node.grad.size(); ++i)
                  d[first * stride + i] += node.grad.data()[i];
              });
}

Var GradTape::time_filter(Var x, const TimeStencil& stencil) {
  const Shape s = value(x).shape();
  require(s.steps >= stencil.min_steps,
          "time filter needs at least " + std::to_string(stencil.min_steps) + " steps, got " +
              std::to_string(s.steps));
  const std::size_t n = s.steps, ch = s.channels;
  Tensor y(s);
  const Tensor& xv = value(x);
  for (std::size_t smp = 0; smp < s.samples; ++smp)
    for (std::size_t t = 0; t < n; ++t) {
      const auto& taps = stencil.taps(t, n);
      double* yr = &y.at(smp, t, 0);
      for (const auto& [off, w] : taps) {
        const double* xr =
            xv.data().data() + (smp * n + static_cast<std::size_t>(static_cast<long>(t) + off)) * ch;
        for (std::size_t c = 0; c < ch; ++c) yr[c] += w * xr[c];
      }
    }
  return push(Op::TimeFilter, std::move(y), {x.id},
              [stencil, n, ch](GradTape& tape, std::uint32_t self) {
                const Node& node = tape.nodes_[self];
                Tensor& dx = tape.grad_slot(node.inputs[0]);
                const std::size_t samples = node.value.shape().samples;
                // Transposed stencil: scatter each output row's weights back.
                for (std::size_t smp = 0; smp < samples; ++smp)
                  for (std::size_t t = 0; t < n; ++t) {
                    const double* gr = node.grad.data().data() + (smp * n + t) * ch;
                    for (const auto& [off, w] : stencil.taps(t, n)) {
                      double* dr =
                          &dx.at(smp, static_cast<std::size_t>(static_cast<long>(t) + off), 0);
                      for (std::size_t c = 0; c < ch; ++c) dr[c] += w * gr[c];
                    }
                  }
              });
}

Var GradTape::sum_of_squares(Var x) {
  double acc = 0.0;
  for (double v : value(x).data()) acc += v * v;
  return push(Op::SumOfSquares, Tensor::scalar(acc), {x.id},
              [](GradTape& tape, std::uint32_t self) {
                const Node& node = tape.nodes_[self];
                const double g = node.grad.item();
                const auto xv = tape.nodes_[node.inputs[0]].value.data();
                auto d = tape.grad_slot(node.inputs[0]).data();
                for (std::size_t i = 0; i < d.size(); ++i) d[i] += 2.0 * g * xv[i];
              });
}

Var GradTape::abs_pow(Var x, double p) {
  require(p >= 0.0 && std::isfinite(p), "abs_pow exponent must be >= 0");
  Tensor y(value(x).shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y.data()[i] = p == 0.0 ? 1.0 : std::pow(std::abs(value(x).data()[i]), p);
  return push(Op::AbsPow, std::move(y), {x.id}, [p](GradTape& tape, std::uint32_t self) {
    if (p == 0.0) return;
    const Node& node = tape.nodes_[self];
    const auto xv = tape.nodes_[node.inputs[0]].value.data();
    auto d = tape.grad_slot(node.inputs[0]).data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double a = std::abs(xv[i]);
      if (a == 0.0) continue;  // subgradient 0 (p >= 1) at the kink
      const double sign = xv[i] > 0.0 ? 1.0 : -1.0;
      d[i] += node.grad.data()[i] * p * std::pow(a, p - 1.0) * sign;
    }
  });
}

Var GradTape::story_drift(Var x, std::size_t width) {
  const Shape s = value(x).shape();
  require(width >= 1 && s.channels % width == 0, "story_drift width must divide channels");
  Tensor y(s);
  const std::size_t rows = s.samples * s.steps, ch = s.channels;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < ch; ++c) {
      const double* xr = value(x).data().data() + r * ch;
      y.data()[r * ch + c] = (c % width == 0) ? xr[c] : xr[c] - xr[c - 1];
    }
  return push(Op::StoryDrift, std::move(y), {x.id},
              [rows, ch, width](GradTape& tape, std::uint32_t self) {
                const Node& node = tape.nodes_[self];
                auto d = tape.grad_slot(node.inputs[0]).data();
                for (std::size_t r = 0; r < rows; ++r)
                  for (std::size_t c = 0; c < ch; ++c) {
                    const double g = node.grad.data()[r * ch + c];
                    d[r * ch + c] += g;
                    if (c % width != 0) d[r * ch + c - 1] -= g;
                  }
              });
}

namespace {

// Time-major buffers kept from the forward pass of one LSTM layer.
struct LstmCache {
  std::size_t samples, steps, in, units;
  std::vector<double> x_tm;    // [T, S, in]
  std::vector<double> gates;   // [T, S, 4H] activated
  std::vector<double> cell;    // [T, S, H]
  std::vector<double> tanh_c;  // [T, S, H]
  std::vector<double> hidden;  // [T, S, H]
};

}  // namespace

Var GradTape::lstm_layer(Var x, Var w_input, Var w_hidden, Var bias) {
  const Shape xs = value(x).shape();
  const std::size_t S = xs.samples, T = xs.steps, in = xs.channels;
  const Shape wis = value(w_input).shape();
  require(wis.samples == 1 && wis.steps % 4 == 0 && wis.steps > 0,
          "lstm input weights must be [1, 4H, in]");
  const std::size_t H = wis.steps / 4, G = 4 * H;
  require(wis.channels == in, "lstm input weights " + to_string(wis) +
                                  " do not match input channels " + std::to_string(in));
  require(value(w_hidden).shape() == Shape{1, G, H}, "lstm hidden weights must be [1, 4H, H]");
  require(value(bias).size() == G, "lstm bias must have 4H entries");
  const auto& k = kernels::active();

  auto cache = std::make_shared<LstmCache>();
  cache->samples = S;
  cache->steps = T;
  cache->in = in;
  cache->units = H;
  cache->x_tm.resize(T * S * in);
  const Tensor& xv = value(x);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < in; ++c) cache->x_tm[(t * S + s) * in + c] = xv.at(s, t, c);

  cache->gates.resize(T * S * G);
  const double* b = value(bias).data().data();
  for (std::size_t r = 0; r < T * S; ++r)
    for (std::size_t g = 0; g < G; ++g) cache->gates[r * G + g] = b[g];
  std::vector<double> wx_t(in * G), wh_t(H * G);
  kernels::transpose(G, in, value(w_input).data().data(), wx_t.data());
  kernels::transpose(G, H, value(w_hidden).data().data(), wh_t.data());
  k.gemm_nn(T * S, G, in, cache->x_tm.data(), in, wx_t.data(), G, cache->gates.data(), G);

  cache->cell.resize(T * S * H);
  cache->tanh_c.resize(T * S * H);
  cache->hidden.resize(T * S * H);
  for (std::size_t t = 0; t < T; ++t) {
    double* gt = cache->gates.data() + t * S * G;
    if (t > 0) k.gemm_nn(S, G, H, cache->hidden.data() + (t - 1) * S * H, H, wh_t.data(), G, gt, G);
    const double* c_prev = t > 0 ? cache->cell.data() + (t - 1) * S * H : nullptr;
    k.lstm_forward(S, H, gt, c_prev, cache->cell.data() + t * S * H,
                   cache->tanh_c.data() + t * S * H, cache->hidden.data() + t * S * H);
  }

  Tensor y({S, T, H});
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < H; ++j) y.at(s, t, j) = cache->hidden[(t * S + s) * H + j];

  return push(
      Op::LstmLayer, std::move(y), {x.id, w_input.id, w_hidden.id, bias.id},
      [cache](GradTape& tape, std::uint32_t self) {
        const auto& kern = kernels::active();
        const Node& node = tape.nodes_[self];
        const std::size_t S = cache->samples, T = cache->steps, in = cache->in, H = cache->units;
        const std::size_t G = 4 * H;
        const std::uint32_t xi = node.inputs[0], wxi = node.inputs[1], whi = node.inputs[2],
                            bi = node.inputs[3];
        const double* wx = tape.nodes_[wxi].value.data().data();
        const double* wh = tape.nodes_[whi].value.data().data();

        std::vector<double> dgates(T * S * G);
        std::vector<double> dh(S * H), dc(S * H, 0.0), dh_rec(S * H, 0.0);
        for (std::size_t t = T; t-- > 0;) {
          for (std::size_t s = 0; s < S; ++s)
            for (std::size_t j = 0; j < H; ++j)
              dh[s * H + j] = node.grad.at(s, t, j) + dh_rec[s * H + j];
          const double* c_prev = t > 0 ? cache->cell.data() + (t - 1) * S * H : nullptr;
          double* dg = dgates.data() + t * S * G;
          kern.lstm_backward(S, H, cache->gates.data() + t * S * G, c_prev,
                             cache->tanh_c.data() + t * S * H, dh.data(), dc.data(), dg);
          std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
          if (t > 0) kern.gemm_nn(S, H, G, dg, G, wh, H, dh_rec.data(), H);
        }

        if (tape.needs(wxi))
          kern.gemm_tn(G, in, T * S, dgates.data(), G, cache->x_tm.data(), in,
                       tape.grad_slot(wxi).data().data(), in);
        if (tape.needs(whi) && T > 1)
          kern.gemm_tn(G, H, (T - 1) * S, dgates.data() + S * G, G, cache->hidden.data(), H,
                       tape.grad_slot(whi).data().data(), H);
        if (tape.needs(bi)) {
          double* db = tape.grad_slot(bi).data().data();
          for (std::size_t r = 0; r < T * S; ++r)
            for (std::size_t g = 0; g < G; ++g) db[g] += dgates[r * G + g];
        }
        if (tape.needs(xi)) {
          std::vector<double> dx_tm(T * S * in, 0.0);
          kern.gemm_nn(T * S, in, G, dgates.data(), G, wx, in, dx_tm.data(), in);
          Tensor& dx = tape.grad_slot(xi);
          for (std::size_t s = 0; s < S; ++s)
            for (std::size_t t = 0; t < T; ++t)
              for (std::size_t c = 0; c < in; ++c) dx.at(s, t, c) += dx_tm[(t * S + s) * in + c];
        }
      });
}

void GradTape::backward(Var out) {
  require(value(out).size() == 1, "backward needs a scalar output");
  for (Node& n : nodes_) n.grad = Tensor{};
  if (!nodes_[out.id].requires_grad) return;
  grad_slot(out.id).data()[0] = 1.0;
  for (std::uint32_t id = out.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
    n.backward(*this, id);
  }
}

void GradTape::clear() { nodes_.clear(); }

}  // namespace phylstm
