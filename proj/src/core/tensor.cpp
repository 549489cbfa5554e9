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
#include "phylstm/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "phylstm/core/error.hpp"

namespace phylstm {

std::string to_string(const Shape& shape) {
  return "[" + std::to_string(shape.samples) + ", " + std::to_string(shape.steps) + ", " +
         std::to_string(shape.channels) + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  require(data_.size() == shape_.size(), "tensor data does not match shape " + to_string(shape_));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SeqBatch::SeqBatch(Tensor values, double dt) : values_(std::move(values)), dt_(dt) {
  const Shape& s = values_.shape();
  require(s.samples >= 1 && s.steps >= 1 && s.channels >= 1,
          "sequence batch dimensions must be >= 1, got " + to_string(s));
  require(std::isfinite(dt_) && dt_ > 0.0, "sequence batch dt must be > 0");
  require(values_.all_finite(), "sequence batch contains non-finite values");
}

SeqBatch seq_create(std::size_t n_samples, std::size_t n_steps, std::size_t n_channels,
                    double fill, double dt) {
  require(std::isfinite(fill), "fill value must be finite");
  return SeqBatch(Tensor({n_samples, n_steps, n_channels}, fill), dt);
}

Tensor concat_samples(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat of zero tensors");
  Shape shape = parts.front().shape();
  shape.samples = 0;
  for (const Tensor& p : parts) {
    require(p.shape().steps == shape.steps && p.shape().channels == shape.channels,
            "concat shape mismatch: " + to_string(p.shape()));
    shape.samples += p.shape().samples;
  }
  std::vector<double> data;
  data.reserve(shape.size());
  for (const Tensor& p : parts) data.insert(data.end(), p.storage().begin(), p.storage().end());
  return Tensor(shape, std::move(data));
}

SeqBatch concat_samples(std::span<const SeqBatch> parts) {
  require(!parts.empty(), "concat of zero batches");
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const SeqBatch& p : parts) {
    require(p.dt() == parts.front().dt(), "concat of batches with different dt");
    values.push_back(p.values());
  }
  return SeqBatch(concat_samples(values), parts.front().dt());
}

Tensor select_samples(const Tensor& x, std::span<const std::size_t> rows) {
  const Shape& s = x.shape();
  const std::size_t stride = s.steps * s.channels;
  Tensor out({rows.size(), s.steps, s.channels});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < s.samples, "sample index out of range");
    std::memcpy(out.data().data() + i * stride, x.data().data() + rows[i] * stride,
                stride * sizeof(double));
  }
  return out;
}

Tensor select_channels(const Tensor& x, std::size_t first, std::size_t count) {
  const Shape& s = x.shape();
  require(first + count <= s.channels, "channel slice out of range");
  Tensor out({s.samples, s.steps, count});
  const std::size_t rows = s.samples * s.steps;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < count; ++c)
      out.data()[r * count + c] = x.data()[r * s.channels + first + c];
  return out;
}

}  // namespace phylstm
