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
#include <string>
#include <vector>

namespace phylstm {

/// Dimensions of a rank-3 array [samples, steps, channels]. Matrices use
/// samples = 1, vectors use samples = steps = 1.
struct Shape {
  std::size_t samples = 0;
  std::size_t steps = 0;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return samples * steps * channels; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

/// Dense row-major fp64 array, last index fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({1, rows, cols}, fill);
  }
  static Tensor scalar(double value) { return Tensor({1, 1, 1}, value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& at(std::size_t s, std::size_t t, std::size_t c) noexcept {
    return data_[(s * shape_.steps + t) * shape_.channels + c];
  }
  double at(std::size_t s, std::size_t t, std::size_t c) const noexcept {
    return data_[(s * shape_.steps + t) * shape_.channels + c];
  }
  double item() const noexcept { return data_.front(); }

  void fill(double value);
  bool all_finite() const noexcept;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

/// Sequence batch [n_samples, n_steps, n_channels] sampled at a fixed dt.
/// Every element is finite and every dimension is at least one.
class SeqBatch {
 public:
  SeqBatch(Tensor values, double dt);

  const Tensor& values() const noexcept { return values_; }
  const Shape& shape() const noexcept { return values_.shape(); }
  double dt() const noexcept { return dt_; }
  std::size_t samples() const noexcept { return values_.shape().samples; }
  std::size_t steps() const noexcept { return values_.shape().steps; }
  std::size_t channels() const noexcept { return values_.shape().channels; }
  double at(std::size_t s, std::size_t t, std::size_t c) const noexcept {
    return values_.at(s, t, c);
  }

 private:
  Tensor values_;
  double dt_;
};

SeqBatch seq_create(std::size_t n_samples, std::size_t n_steps,
                    std::size_t n_channels, double fill, double dt);

/// Concatenates along the sample axis; all inputs share steps, channels and dt.
SeqBatch concat_samples(std::span<const SeqBatch> parts);
Tensor concat_samples(std::span<const Tensor> parts);

/// Copies the listed sample rows, in order.
Tensor select_samples(const Tensor& x, std::span<const std::size_t> rows);

/// Copies channels [first, first + count).
Tensor select_channels(const Tensor& x, std::size_t first, std::size_t count);

}  // namespace phylstm
