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

#ifndef ATTENTIVE_ERROR_HPP
#define ATTENTIVE_ERROR_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace attentive {

enum class ErrorCode {
  InsufficientSamples,
  InvalidSampleRate,
  OutOfOrderFrame,
  ParseError,
  BackendUnavailable,
  ContentFiltered,
  MalformedBackendReply,
  OutOfRange,
  EmptyInventory,
  WrongPhase,
  IoError,
  SchemaVersionMismatch,
  LengthMismatch,
  RaggedMatrix,
  InsufficientData,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvalidSampleRate: return "InvalidSampleRate";
    case ErrorCode::OutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ContentFiltered: return "ContentFiltered";
    case ErrorCode::MalformedBackendReply: return "MalformedBackendReply";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyInventory: return "EmptyInventory";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::RaggedMatrix: return "RaggedMatrix";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure the library raises. `line` is set for errors tied to a
/// position in an input file (1-based).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, what, line)), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& what,
                            std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += " at line " + std::to_string(*line);
    if (!what.empty()) out += ": " + what;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace attentive

#endif  // ATTENTIVE_ERROR_HPP
