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

// Shared test fixtures: synthetic signals, synthetic prosody traces, and a
// brute-force BOP oracle that works from batch segmentation.

#ifndef ATTENTIVE_TESTS_SUPPORT_HPP
#define ATTENTIVE_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "attentive/bop.hpp"
#include "attentive/prosody.hpp"
#include "attentive/session.hpp"

namespace attentive::testing {

enum class Wave { Sine, Sawtooth };

inline std::vector<float> tone(Wave wave, double freq, double amplitude, int sample_rate,
                               std::size_t n, double phase = 0.0) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cycles = freq * static_cast<double>(i) / sample_rate + phase;
    double v = 0.0;
    if (wave == Wave::Sine) {
      v = std::sin(2.0 * std::numbers::pi * cycles);
    } else {
      v = 2.0 * (cycles - std::floor(cycles + 0.5));
    }
    out[i] = static_cast<float>(amplitude * v);
  }
  return out;
}

/// Adds white Gaussian noise at the given SNR (dB) relative to the signal power.
inline void add_noise(std::vector<float>& x, double snr_db, std::mt19937_64& rng) {
  double power = 0.0;
  for (float s : x) power += static_cast<double>(s) * s;
  power /= static_cast<double>(x.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> noise(0.0, sigma);
  for (float& s : x) s = static_cast<float>(std::clamp(s + noise(rng), -1.0, 1.0));
}

/// Builds a 10 ms-hop prosody trace from (duration, speech?) pieces. Speech
/// hops are voiced with F0 sweeping linearly from f0_from to f0_to.
class TraceBuilder {
 public:
  explicit TraceBuilder(Millis start = 0) : t_(start) {}

  TraceBuilder& silence(Millis ms, double energy = 0.002) {
    for (Millis end = t_ + ms; t_ < end; t_ += 10) frames_.push_back({t_, std::nullopt, energy, false});
    return *this;
  }

  TraceBuilder& speech(Millis ms, double f0_from, double f0_to, double energy = 0.3) {
    const Millis begin = t_;
    for (Millis end = t_ + ms; t_ < end; t_ += 10) {
      const double frac = ms > 10 ? static_cast<double>(t_ - begin) / static_cast<double>(ms - 10) : 0.0;
      frames_.push_back({t_, f0_from + (f0_to - f0_from) * frac, energy, true});
    }
    return *this;
  }

  Millis now() const { return t_; }
  const std::vector<ProsodyFrame>& frames() const { return frames_; }

 private:
  Millis t_;
  std::vector<ProsodyFrame> frames_;
};

/// Independent BOP oracle: batch segmentation, then per-pause qualification
/// and greedy earliest-first spacing. Only PP_PAUSE.
inline std::vector<BopEvent> bop_oracle(const std::vector<ProsodyFrame>& frames,
                                        const BopConfig& cfg) {
  const auto segments = segment_activity(frames, cfg.vad);
  std::vector<BopEvent> out;
  std::optional<Millis> last;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const auto& pause = segments[i];
    const auto& speech = segments[i - 1];
    if (pause.kind != ActivityKind::Pause || speech.kind != ActivityKind::Speech) continue;
    if (speech.duration() < cfg.min_preceding_speech_ms) continue;
    double lo = 1e300, hi = -1e300;
    for (const auto& f : frames) {
      if (f.time < speech.end - cfg.fluctuation_window_ms || f.time >= speech.end) continue;
      if (!f.voiced || !f.f0_hz) continue;
      lo = std::min(lo, *f.f0_hz);
      hi = std::max(hi, *f.f0_hz);
    }
    if (hi < lo || 12.0 * std::log2(hi / lo) < cfg.pitch_fluctuation_semitones) continue;
    for (const auto& f : frames) {
      if (f.time < pause.start || f.time >= pause.end) continue;
      if (f.time - pause.start < cfg.pause_threshold_ms) continue;
      if (last && f.time - *last < cfg.min_interval_ms) continue;
      out.push_back({f.time, BopRule::PpPause, speech.duration(), f.time - pause.start});
      last = f.time;
      break;
    }
  }
  return out;
}

/// Random speech/pause trace on a 10 ms grid, with a quiet lead-in for
/// threshold calibration.
inline std::vector<ProsodyFrame> random_trace(std::mt19937_64& rng) {
  TraceBuilder b;
  b.silence(500);
  std::uniform_int_distribution<int> pieces(2, 14);
  std::uniform_int_distribution<int> speech_ms(30, 320);   // x10 ms
  std::uniform_int_distribution<int> pause_ms(5, 180);     // x10 ms
  std::uniform_real_distribution<double> f0(90.0, 320.0);
  std::bernoulli_distribution flat(0.25);
  const int n = pieces(rng);
  for (int i = 0; i < n; ++i) {
    const double a = f0(rng);
    const double z = flat(rng) ? a * 1.05 : f0(rng);
    b.speech(static_cast<Millis>(speech_ms(rng)) * 10, a, z);
    b.silence(static_cast<Millis>(pause_ms(rng)) * 10);
  }
  return b.frames();
}

/// Phase-continuous sine whose frequency moves linearly from f_from to f_to.
inline std::vector<float> chirp(double f_from, double f_to, double amplitude, int sample_rate,
                                std::size_t n) {
  std::vector<float> out(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    out[i] = static_cast<float>(amplitude * std::sin(phase));
    phase += 2.0 * std::numbers::pi * (f_from + (f_to - f_from) * frac) / sample_rate;
  }
  return out;
}

/// Cuts a signal into consecutive chunks of chunk_ms starting at `start`.
inline std::vector<AudioFrame> audio_chunks(const std::vector<float>& x, int sample_rate,
                                            Millis start, Millis chunk_ms = 100) {
  std::vector<AudioFrame> out;
  const auto per = static_cast<std::size_t>(sample_rate * chunk_ms / 1000);
  for (std::size_t at = 0; at < x.size(); at += per) {
    const std::size_t end = std::min(x.size(), at + per);
    out.push_back({std::vector<float>(x.begin() + static_cast<std::ptrdiff_t>(at),
                                      x.begin() + static_cast<std::ptrdiff_t>(end)),
                   sample_rate, start + static_cast<Millis>(at * 1000 / static_cast<std::size_t>(sample_rate))});
  }
  return out;
}

/// The answers typed in the recorded stream, one per question.
inline const std::vector<std::string>& recorded_answers() {
  static const std::vector<std::string> answers{
      "I would love to be famous for writing a wonderful novel",
      "A perfect day is a long hike with friends and a great dinner",
      "I would invite my grandmother because she was amazing",
      "I would want to know if my family will be healthy and happy",
      "My most terrible memory is the day my dog died and I felt devastated",
      "I think finishing my degree is my greatest accomplishment and I am proud",
      "They should know that I value honesty and I feel hurt by lies",
      "I would save my photo albums because they hold memories",
      "Losing my mother would be horrible and I would feel lost"};
  return answers;
}

/// Nine turns of prosody frames plus typed text, each ending with an
/// explicit end_of_turn. Every turn holds one PP_PAUSE opportunity.
inline std::vector<SessionInput> recorded_stream() {
  std::vector<SessionInput> out;
  Millis t = 0;
  for (int q = 0; q < 9; ++q) {
    TraceBuilder b(t);
    if (q == 0) b.silence(500);
    b.silence(300);
    const Millis speech_at = b.now();
    b.speech(1600, 180, 280).silence(1200);
    bool text_sent = false;
    for (const auto& f : b.frames()) {
      if (!text_sent && f.time >= speech_at + 200) {
        out.push_back(TextChunk{recorded_answers()[static_cast<std::size_t>(q)], f.time});
        text_sent = true;
      }
      out.push_back(f);
    }
    out.push_back(EndOfTurn{b.now()});
    t = b.now() + 10;
  }
  return out;
}

/// One answer as 16 kHz audio: lead-in silence, a rising 1.6 s voiced sweep
/// and 1.2 s of silence. The answer text belongs 200 ms into the speech.
struct AudioTurn {
  std::vector<float> samples;
  std::size_t text_at = 0;
  std::string text;
};

inline std::vector<AudioTurn> recorded_audio_turns() {
  constexpr int rate = 16000;
  std::vector<AudioTurn> out;
  for (int q = 0; q < 9; ++q) {
    AudioTurn turn;
    turn.samples.assign(static_cast<std::size_t>(rate * (q == 0 ? 500 : 300) / 1000), 0.0f);
    turn.text_at = turn.samples.size() + rate / 5;
    const auto speech = chirp(180, 280, 0.4, rate, rate * 16 / 10);
    turn.samples.insert(turn.samples.end(), speech.begin(), speech.end());
    turn.samples.resize(turn.samples.size() + rate * 12 / 10, 0.0f);
    turn.text = recorded_answers()[static_cast<std::size_t>(q)];
    out.push_back(std::move(turn));
  }
  return out;
}

/// Fleiss' kappa evaluated from individual labels: expands each item's counts
/// into one label per rater, counts agreeing ordered rater pairs, and takes
/// chance agreement from the pooled label frequencies.
inline double fleiss_brute_force(const std::vector<std::vector<int>>& counts) {
  std::vector<std::vector<int>> labels;
  std::size_t categories = 0;
  for (const auto& row : counts) {
    std::vector<int> item;
    for (std::size_t c = 0; c < row.size(); ++c)
      for (int k = 0; k < row[c]; ++k) item.push_back(static_cast<int>(c));
    labels.push_back(item);
    categories = std::max(categories, row.size());
  }
  double agree_sum = 0.0;
  std::vector<double> freq(categories, 0.0);
  double total = 0.0;
  for (const auto& item : labels) {
    double pairs = 0.0, agree = 0.0;
    for (std::size_t i = 0; i < item.size(); ++i) {
      freq[static_cast<std::size_t>(item[i])] += 1.0;
      total += 1.0;
      for (std::size_t j = 0; j < item.size(); ++j) {
        if (i == j) continue;
        pairs += 1.0;
        agree += item[i] == item[j];
      }
    }
    agree_sum += agree / pairs;
  }
  const double p_bar = agree_sum / static_cast<double>(labels.size());
  double p_e = 0.0;
  for (double f : freq) p_e += (f / total) * (f / total);
  return (p_bar - p_e) / (1.0 - p_e);
}

/// Random count matrix with a fixed number of raters per item.
inline std::vector<std::vector<int>> random_rating_counts(std::mt19937_64& rng) {
  const int items = 2 + static_cast<int>(rng() % 9);
  const int raters = 2 + static_cast<int>(rng() % 5);
  const int categories = 2 + static_cast<int>(rng() % 3);
  std::vector<std::vector<int>> m(static_cast<std::size_t>(items), std::vector<int>(static_cast<std::size_t>(categories), 0));
  for (auto& row : m)
    for (int r = 0; r < raters; ++r) ++row[rng() % static_cast<std::size_t>(categories)];
  return m;
}

/// Three groups of 20 with a moderate location shift and ties; the
/// asymptotic Kruskal-Wallis p-value here is about 0.043.
inline std::vector<std::vector<double>> kw_permutation_fixture() {
  return {{0.2, -0.5, -0.4, -2.4, 1.8, 1.1, -0.3, 0.8, 0.3, -0.6, 1.0, -0.3, -0.3, -0.8, 0.5, -0.1, 0.5, -0.6, 0.1, -0.9},
          {1.1, 0.5, 0.6, 0.7, -0.7, 1.1, 2.4, -1.3, -1.4, -1.2, 1.1, 0.4, 1.4, 1.0, 0.5, 0.6, 0.1, 1.2, -0.8, -0.1},
          {0.8, 2.4, -0.2, -0.5, 0.0, 1.6, 0.4, 1.9, -1.3, 1.7, 1.6, -0.8, 0.8, 1.8, 0.7, 1.6, 3.0, 0.9, 0.3, -0.2}};
}

/// Two-sided Student t tail probability by composite Simpson integration of
/// the density over [0, |t|].
inline double t_two_sided_simpson(double t, int df, int intervals = 200000) {
  const double v = df;
  const double log_c = std::lgamma((v + 1) / 2) - std::lgamma(v / 2) - 0.5 * std::log(v * std::numbers::pi);
  auto pdf = [&](double x) { return std::exp(log_c - (v + 1) / 2 * std::log1p(x * x / v)); };
  const double a = std::fabs(t);
  const double h = a / intervals;
  double acc = pdf(0) + pdf(a);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return std::max(0.0, 1.0 - 2.0 * acc * h / 3.0);
}

}  // namespace attentive::testing

#endif  // ATTENTIVE_TESTS_SUPPORT_HPP
