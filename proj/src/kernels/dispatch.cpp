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
#include <atomic>
#include <cstdlib>
#include <string_view>

#include "phylstm/kernels/kernels.hpp"

namespace phylstm::kernels {
namespace {

const Backend* choose() {
  if (const char* env = std::getenv("PHYLSTM_SIMD"); env && std::string_view(env) == "scalar")
    return &scalar();
  if (const Backend* b = avx2()) return b;
  return &scalar();
}

std::atomic<const Backend*>& slot() {
  static std::atomic<const Backend*> current{choose()};
  return current;
}

}  // namespace

const Backend& active() { return *slot().load(std::memory_order_acquire); }

void set_active(const Backend& backend) { slot().store(&backend, std::memory_order_release); }

}  // namespace phylstm::kernels
