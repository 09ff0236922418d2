// Copyright 2026 The Attentive Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian PCM16 <-> float samples, and base64 framing for the wire.

#ifndef ATTENTIVE_PCM_HPP
#define ATTENTIVE_PCM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/beast/core/detail/base64.hpp>

#include "attentive/error.hpp"

namespace attentive {

inline std::string encode_pcm16_b64(std::span<const float> samples) {
  std::string raw(samples.size() * 2, '\0');
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double clamped = std::clamp(static_cast<double>(samples[i]), -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    const auto u = static_cast<std::uint16_t>(v);
    raw[2 * i] = static_cast<char>(u & 0xff);
    raw[2 * i + 1] = static_cast<char>(u >> 8);
  }
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(raw.size()), '\0');
  out.resize(b64::encode(out.data(), raw.data(), raw.size()));
  return out;
}

inline std::vector<float> decode_pcm16_b64(std::string_view text) {
  namespace b64 = boost::beast::detail::base64;
  if (text.size() % 4 != 0) throw Error(ErrorCode::ParseError, "base64 length not a multiple of 4");
  std::string raw(b64::decoded_size(text.size()), '\0');
  const auto [written, read] = b64::decode(raw.data(), text.data(), text.size());
  std::size_t body = text.size();
  for (int pad = 0; pad < 2 && body > 0 && text[body - 1] == '='; ++pad) --body;
  if (read != body) throw Error(ErrorCode::ParseError, "invalid base64");
  raw.resize(written);
  if (raw.size() % 2 != 0) throw Error(ErrorCode::ParseError, "odd PCM16 byte count");
  std::vector<float> out(raw.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto lo = static_cast<std::uint8_t>(raw[2 * i]);
    const auto hi = static_cast<std::uint8_t>(raw[2 * i + 1]);
    const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    out[i] = static_cast<float>(std::max(-1.0, v / 32767.0));
  }
  return out;
}

}  // namespace attentive

#endif  // ATTENTIVE_PCM_HPP
