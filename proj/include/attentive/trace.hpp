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

// Prosody trace files: JSON Lines, one hop per line,
//   {"t": ms, "f0": Hz|null, "energy": float, "voiced": bool}

#ifndef ATTENTIVE_TRACE_HPP
#define ATTENTIVE_TRACE_HPP

#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attentive/error.hpp"
#include "attentive/prosody.hpp"

namespace attentive {

inline nlohmann::ordered_json to_json(const ProsodyFrame& f) {
  nlohmann::ordered_json j;
  j["t"] = f.time;
  if (f.f0_hz)
    j["f0"] = *f.f0_hz;
  else
    j["f0"] = nullptr;
  j["energy"] = f.energy;
  j["voiced"] = f.voiced;
  return j;
}

inline ProsodyFrame parse_trace_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what(), line_no);
  }
  try {
    ProsodyFrame f;
    f.time = j.at("t").get<Millis>();
    const auto& f0 = j.at("f0");
    if (!f0.is_null()) f.f0_hz = f0.get<double>();
    f.energy = j.at("energy").get<double>();
    f.voiced = j.at("voiced").get<bool>();
    if (f.voiced && !f.f0_hz) throw Error(ErrorCode::ParseError, "voiced frame without f0", line_no);
    if (f.energy < 0.0) throw Error(ErrorCode::ParseError, "negative energy", line_no);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what(), line_no);
  }
}

/// Calls `sink(frame, line_no)` for every non-blank line.
inline void for_each_trace_frame(std::istream& in,
                                 const std::function<void(const ProsodyFrame&, std::size_t)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    sink(parse_trace_line(line, line_no), line_no);
  }
}

inline std::vector<ProsodyFrame> read_trace(std::istream& in) {
  std::vector<ProsodyFrame> frames;
  for_each_trace_frame(in, [&](const ProsodyFrame& f, std::size_t) { frames.push_back(f); });
  return frames;
}

inline void write_trace(std::ostream& out, const std::vector<ProsodyFrame>& frames) {
  for (const auto& f : frames) out << to_json(f).dump() << '\n';
}

}  // namespace attentive

#endif  // ATTENTIVE_TRACE_HPP
