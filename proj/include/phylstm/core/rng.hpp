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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace phylstm {

/// Counter-based Philox4x32-10 stream (Salmon et al., SC'11).
///
/// The 64-bit seed is the Philox key; a 128-bit block counter advances once
/// per four 32-bit outputs. Only integer arithmetic is involved, so a given
/// seed produces the same bits everywhere.
///
/// Uniform doubles take the top 53 bits of two consecutive 32-bit words and
/// lie in [0, 1). Gaussian draws use the Box-Muller transform on two
/// uniforms, returning the cosine branch first and the sine branch second.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : key_{seed} {}

  std::uint64_t seed() const noexcept { return key_; }

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double gaussian() noexcept;
  /// Uniform integer in [0, n); n > 0. Uses rejection, so no modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept;

  void fill_uniform(std::span<double> out, double lo, double hi) noexcept;
  void fill_gaussian(std::span<double> out) noexcept;

  /// Independent stream keyed by (seed, tag, index); the parent is untouched.
  RngStream derive(std::string_view tag, std::uint64_t index = 0) const noexcept;

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace phylstm
