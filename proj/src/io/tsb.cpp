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
#include "phylstm/io/tsb.hpp"

#include <algorithm>

#include "phylstm/core/error.hpp"
#include "phylstm/io/binary.hpp"

namespace phylstm::io {

std::size_t TsbTable::channel_index(const std::string& name) const {
  const auto it = std::find(channels.begin(), channels.end(), name);
  require(it != channels.end(), "tsb: no channel named '" + name + "'");
  return static_cast<std::size_t>(it - channels.begin());
}

std::vector<double> TsbTable::channel(const std::string& name) const {
  const std::size_t c = channel_index(name), nc = channels.size();
  std::vector<double> out(steps);
  for (std::size_t t = 0; t < steps; ++t) out[t] = data[t * nc + c];
  return out;
}

void TsbTable::add_channel(std::string name, std::span<const double> values) {
  require(std::find(channels.begin(), channels.end(), name) == channels.end(),
          "tsb: duplicate channel '" + name + "'");
  if (channels.empty()) steps = values.size();
  require(values.size() == steps, "tsb: channel '" + name + "' has the wrong length");
  const std::size_t nc = channels.size();
  std::vector<double> merged(steps * (nc + 1));
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(t * nc), nc,
                merged.begin() + static_cast<std::ptrdiff_t>(t * (nc + 1)));
    merged[t * (nc + 1) + nc] = values[t];
  }
  data = std::move(merged);
  channels.push_back(std::move(name));
}

std::vector<char> encode_tsb(const TsbTable& table) {
  require(table.data.size() == table.steps * table.channels.size(), "tsb: data size mismatch");
  ByteWriter w;
  w.bytes("TSB1");
  w.u16(kTsbVersion);
  w.u32(static_cast<std::uint32_t>(table.steps));
  w.u32(static_cast<std::uint32_t>(table.channels.size()));
  for (const std::string& name : table.channels) {
    require(name.size() <= 0xFFFF, "tsb: channel name too long");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
  }
  w.f64s(table.data);
  return w.data();
}

TsbTable decode_tsb(std::vector<char> bytes, const std::string& source) {
  ByteReader r(std::move(bytes), source);
  if (r.bytes(4) != "TSB1") throw_error(ErrorKind::Io, source + ": not a TSB1 file");
  const std::uint16_t version = r.u16();
  if (version != kTsbVersion) throw_error(ErrorKind::Io, source + ": unsupported TSB version " + std::to_string(version));
  TsbTable t;
  t.steps = r.u32();
  const std::uint32_t nc = r.u32();
  for (std::uint32_t c = 0; c < nc; ++c) t.channels.push_back(r.bytes(r.u16()));
  const std::size_t n = t.steps * nc;
  if (r.remaining() != n * 8) throw_error(ErrorKind::Io, source + ": data size does not match header");
  t.data.resize(n);
  for (double& v : t.data) v = r.f64();
  return t;
}

void write_tsb(const std::filesystem::path& path, const TsbTable& table) {
  const std::vector<char> bytes = encode_tsb(table);
  write_file(path, bytes);
}

TsbTable read_tsb(const std::filesystem::path& path) { return decode_tsb(read_file(path), path.string()); }

}  // namespace phylstm::io
