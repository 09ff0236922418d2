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

// Sentiment-matched backchannel tokens.

#ifndef ATTENTIVE_BACKCHANNEL_HPP
#define ATTENTIVE_BACKCHANNEL_HPP

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "attentive/error.hpp"
#include "attentive/prosody.hpp"
#include "attentive/sentiment.hpp"

namespace attentive {

enum class Gesture { None, Nod, Frown, BrowRaise };

constexpr std::string_view to_string(Gesture g) {
  switch (g) {
    case Gesture::None: return "none";
    case Gesture::Nod: return "nod";
    case Gesture::Frown: return "frown";
    case Gesture::BrowRaise: return "brow_raise";
  }
  return "none";
}

inline Gesture parse_gesture(std::string_view s) {
  if (s == "none") return Gesture::None;
  if (s == "nod") return Gesture::Nod;
  if (s == "frown") return Gesture::Frown;
  if (s == "brow_raise") return Gesture::BrowRaise;
  throw Error(ErrorCode::InvalidArgument, "unknown gesture " + std::string(s));
}

constexpr Gesture gesture_for(SentimentClass c) {
  switch (c) {
    case SentimentClass::Positive: return Gesture::BrowRaise;
    case SentimentClass::Neutral: return Gesture::Nod;
    case SentimentClass::Negative: return Gesture::Frown;
  }
  return Gesture::None;
}

struct BackchannelAct {
  std::string verbal;
  Gesture gesture = Gesture::None;
  SentimentClass sentiment = SentimentClass::Neutral;
  Millis time = 0;

  bool operator==(const BackchannelAct&) const = default;
};

inline constexpr std::size_t class_index(SentimentClass c) { return static_cast<std::size_t>(c); }

/// Ordered token lists per sentiment class.
struct BackchannelInventory {
  std::array<std::vector<std::string>, 3> tokens{{
      {"oh no...", "goodness!", "oh dear..."},
      {"mm-hmm", "uh-huh", "I see"},
      {"oh wow!", "nice!", "that's great!"},
  }};

  const std::vector<std::string>& of(SentimentClass c) const { return tokens[class_index(c)]; }
  std::vector<std::string>& of(SentimentClass c) { return tokens[class_index(c)]; }

  void validate() const {
    for (auto c : {SentimentClass::Negative, SentimentClass::Neutral, SentimentClass::Positive})
      if (of(c).empty())
        throw Error(ErrorCode::EmptyInventory, std::string(to_string(c)) + " list is empty");
  }
};

/// Round-robin position per class, one per session.
struct SelectorState {
  std::array<std::size_t, 3> next{0, 0, 0};
};

inline BackchannelAct select_backchannel(SentimentClass cls, SelectorState& selector, Millis time,
                                         const BackchannelInventory& inventory = {}) {
  const auto& list = inventory.of(cls);
  if (list.empty())
    throw Error(ErrorCode::EmptyInventory, std::string(to_string(cls)) + " list is empty");
  auto& pos = selector.next[class_index(cls)];
  BackchannelAct act{list[pos % list.size()], gesture_for(cls), cls, time};
  pos = (pos + 1) % list.size();
  return act;
}

}  // namespace attentive

#endif  // ATTENTIVE_BACKCHANNEL_HPP
