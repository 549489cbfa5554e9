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
#include <cmath>
#include <vector>

#include "doctest.h"
#include "phylstm/core/rng.hpp"
#include "phylstm/kernels/kernels.hpp"

using namespace phylstm;
namespace k = phylstm::kernels;

namespace {

std::vector<double> random_vec(RngStream& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  rng.fill_uniform(v, lo, hi);
  return v;
}

// |a - b| <= tol * (1 + |b|), elementwise.
void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(a[i] - b[i]) <= tol * (1.0 + std::abs(b[i])));
  }
}

}  // namespace

TEST_CASE("active backend is one of the known tables") {
  const auto& act = k::active();
  CHECK((act.name == "scalar" || act.name == "avx2"));
  if (k::avx2()) MESSAGE("avx2 backend available");
}

TEST_CASE("simd gemm matches scalar reference") {
  const k::Backend* simd = k::avx2();
  if (!simd) return;
  RngStream rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + rng.below(23), n = 1 + rng.below(37), kk = 1 + rng.below(19);
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(kk);
    const auto a = random_vec(rng, m * kk), at = random_vec(rng, kk * m), b = random_vec(rng, kk * n);
    const auto c0 = random_vec(rng, m * n);
    auto c_ref = c0, c_simd = c0;
    k::scalar().gemm_nn(m, n, kk, a.data(), kk, b.data(), n, c_ref.data(), n);
    simd->gemm_nn(m, n, kk, a.data(), kk, b.data(), n, c_simd.data(), n);
    check_close(c_simd, c_ref, 1e-13);

    c_ref = c0;
    c_simd = c0;
    k::scalar().gemm_tn(m, n, kk, at.data(), m, b.data(), n, c_ref.data(), n);
    simd->gemm_tn(m, n, kk, at.data(), m, b.data(), n, c_simd.data(), n);
    check_close(c_simd, c_ref, 1e-13);
  }
}

TEST_CASE("gemm with leading dimensions") {
  // 2x2 sub-blocks of 3-wide rows.
  const std::vector<double> a{1, 2, 9, 3, 4, 9};
  const std::vector<double> b{5, 6, 9, 7, 8, 9};
  for (const k::Backend* be : {&k::scalar(), k::avx2()}) {
    if (!be) continue;
    std::vector<double> c{0, 0, -1, 0, 0, -1};
    be->gemm_nn(2, 2, 2, a.data(), 3, b.data(), 3, c.data(), 3);
    CHECK(c == std::vector<double>{19, 22, -1, 43, 50, -1});
    std::vector<double> ct{0, 0, -1, 0, 0, -1};
    be->gemm_tn(2, 2, 2, a.data(), 3, b.data(), 3, ct.data(), 3);
    // A^T B with A = [[1,2],[3,4]]
    CHECK(ct == std::vector<double>{26, 30, -1, 38, 44, -1});
  }
}

TEST_CASE("simd activations match libm") {
  const k::Backend* simd = k::avx2();
  if (!simd) return;
  RngStream rng(5);
  for (double range : {0.5, 5.0, 40.0, 800.0}) {
    const auto x = random_vec(rng, 1003, -range, range);
    std::vector<double> s_ref(x.size()), s_simd(x.size()), t_ref(x.size()), t_simd(x.size());
    k::scalar().sigmoid(x.size(), x.data(), s_ref.data());
    simd->sigmoid(x.size(), x.data(), s_simd.data());
    k::scalar().tanh(x.size(), x.data(), t_ref.data());
    simd->tanh(x.size(), x.data(), t_simd.data());
    check_close(s_simd, s_ref, 1e-15);
    check_close(t_simd, t_ref, 1e-15);
    for (double v : s_simd) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : t_simd) CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("simd lstm gate kernels match scalar reference") {
  const k::Backend* simd = k::avx2();
  if (!simd) return;
  RngStream rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t rows = 1 + rng.below(9), units = 1 + rng.below(13);
    CAPTURE(rows);
    CAPTURE(units);
    const auto pre = random_vec(rng, rows * 4 * units, -4.0, 4.0);
    const auto c_prev = random_vec(rng, rows * units);
    const bool zero_state = trial % 3 == 0;
    const double* cp = zero_state ? nullptr : c_prev.data();

    auto g_ref = pre, g_simd = pre;
    std::vector<double> c_ref(rows * units), th_ref(rows * units), h_ref(rows * units);
    std::vector<double> c_s(rows * units), th_s(rows * units), h_s(rows * units);
    k::scalar().lstm_forward(rows, units, g_ref.data(), cp, c_ref.data(), th_ref.data(), h_ref.data());
    simd->lstm_forward(rows, units, g_simd.data(), cp, c_s.data(), th_s.data(), h_s.data());
    check_close(g_simd, g_ref, 1e-14);
    check_close(c_s, c_ref, 1e-14);
    check_close(h_s, h_ref, 1e-14);

    const auto dh = random_vec(rng, rows * units);
    const auto dc0 = random_vec(rng, rows * units);
    auto dc_ref = dc0, dc_s = dc0;
    std::vector<double> dg_ref(rows * 4 * units), dg_s(rows * 4 * units);
    k::scalar().lstm_backward(rows, units, g_ref.data(), cp, th_ref.data(), dh.data(),
                              dc_ref.data(), dg_ref.data());
    simd->lstm_backward(rows, units, g_ref.data(), cp, th_ref.data(), dh.data(), dc_s.data(),
                        dg_s.data());
    check_close(dg_s, dg_ref, 1e-14);
    check_close(dc_s, dc_ref, 1e-14);
  }
}

TEST_CASE("set_active switches backend") {
  const k::Backend& before = k::active();
  k::set_active(k::scalar());
  CHECK(k::active().name == "scalar");
  k::set_active(before);
}
