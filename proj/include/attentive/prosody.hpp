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

/** @file prosody.hpp Per-hop acoustic features and speech/pause segmentation.
 *
 * analyze_frame() measures RMS energy and estimates F0 with a YIN-style
 * cumulative-mean-normalized difference function. ProsodyAnalyzer slices an
 * arbitrary chunked PCM stream into overlapping analysis windows, and
 * ActivityTracker turns the resulting ProsodyFrame stream into alternating
 * Speech/Pause segments with a hangover that absorbs short dips.
 *
 * References:
 *
 * - YIN, a fundamental frequency estimator for speech and music (2002)
 *   de Cheveigne and Kawahara
 **/

#ifndef ATTENTIVE_PROSODY_HPP
#define ATTENTIVE_PROSODY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attentive/error.hpp"

namespace attentive {

/// Milliseconds since session (or stream) start.
using Millis = std::int64_t;

struct AudioFrame {
  std::vector<float> samples;  // mono, normalized to [-1, 1]
  int sample_rate = 16000;
  Millis start_time = 0;
};

struct ProsodyFrame {
  Millis time = 0;
  std::optional<double> f0_hz;
  double energy = 0.0;
  bool voiced = false;

  bool operator==(const ProsodyFrame&) const = default;
};

struct ProsodyConfig {
  double f0_min = 75.0;
  double f0_max = 500.0;
  int window_ms = 25;
  int hop_ms = 10;
  /// Voicing decision threshold on the normalized difference function.
  double voicing_threshold = 0.15;
  /// Windows whose RMS is below this are unvoiced without running the detector.
  double silence_rms = 1e-4;
};

namespace detail {

inline int max_lag(int sample_rate, const ProsodyConfig& cfg) {
  return static_cast<int>(std::floor(sample_rate / cfg.f0_min));
}

inline int min_lag(int sample_rate, const ProsodyConfig& cfg) {
  return std::max(2, static_cast<int>(std::ceil(sample_rate / cfg.f0_max)));
}

}  // namespace detail

/// Smallest window the pitch detector accepts: the longest lag plus an
/// integration span of half that lag.
inline std::size_t min_analysis_samples(int sample_rate, const ProsodyConfig& cfg) {
  const int lag = detail::max_lag(sample_rate, cfg);
  return static_cast<std::size_t>(lag + (lag + 1) / 2 + 1);
}

inline double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

/// Estimates F0 in Hz, or nullopt when no lag falls under the voicing
/// threshold inside [f0_min, f0_max].
inline std::optional<double> estimate_f0(std::span<const float> x, int sample_rate,
                                         const ProsodyConfig& cfg) {
  const int tau_max = detail::max_lag(sample_rate, cfg);
  const int tau_min = detail::min_lag(sample_rate, cfg);
  const int n = static_cast<int>(x.size());
  const int w = n - tau_max;
  if (w <= 0 || tau_min >= tau_max) return std::nullopt;

  // diff[tau] = sum_j (x_j - x_{j+tau})^2 over a fixed integration span.
  std::vector<double> diff(static_cast<std::size_t>(tau_max) + 2, 0.0);
  for (int tau = 1; tau <= tau_max + 1 && tau + w <= n; ++tau) {
    double acc = 0.0;
    for (int j = 0; j < w; ++j) {
      const double d = static_cast<double>(x[j]) - x[j + tau];
      acc += d * d;
    }
    diff[tau] = acc;
  }
  const int last = std::min(tau_max + 1, n - w);

  std::vector<double> cmnd(diff.size(), 1.0);
  double running = 0.0;
  for (int tau = 1; tau <= last; ++tau) {
    running += diff[tau];
    cmnd[tau] = running > 0.0 ? diff[tau] * tau / running : 1.0;
  }

  int best = -1;
  for (int tau = tau_min; tau <= tau_max; ++tau) {
    if (cmnd[tau] < cfg.voicing_threshold) {
      while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
      best = tau;
      break;
    }
  }
  if (best < 0) return std::nullopt;

  double refined = best;
  if (best > 1 && best < last) {
    const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom > 0.0) refined = best + 0.5 * (a - c) / denom;
  }
  const double f0 = sample_rate / refined;
  if (f0 < cfg.f0_min || f0 > cfg.f0_max) return std::nullopt;
  return f0;
}

/// Measures one analysis window. The frame's start_time becomes the
/// ProsodyFrame time.
inline ProsodyFrame analyze_frame(const AudioFrame& frame, const ProsodyConfig& cfg = {}) {
  if (frame.sample_rate <= 0)
    throw Error(ErrorCode::InvalidSampleRate, std::to_string(frame.sample_rate));
  const std::size_t need = min_analysis_samples(frame.sample_rate, cfg);
  if (frame.samples.size() < need)
    throw Error(ErrorCode::InsufficientSamples,
                std::to_string(frame.samples.size()) + " < " + std::to_string(need));
  for (float s : frame.samples) {
    if (!std::isfinite(s) || s < -1.0f || s > 1.0f)
      throw Error(ErrorCode::InvalidArgument, "sample outside [-1, 1]");
  }

  ProsodyFrame out;
  out.time = frame.start_time;
  out.energy = rms(frame.samples);
  if (out.energy >= cfg.silence_rms) {
    out.f0_hz = estimate_f0(frame.samples, frame.sample_rate, cfg);
    out.voiced = out.f0_hz.has_value();
  }
  return out;
}

/// Cuts a chunked PCM stream into overlapping windows and analyzes each hop.
/// A chunk that starts later than the end of buffered audio restarts the
/// window grid at its own start time.
class ProsodyAnalyzer {
 public:
  explicit ProsodyAnalyzer(ProsodyConfig cfg = {}) : cfg_(cfg) {}

  const ProsodyConfig& config() const { return cfg_; }

  std::vector<ProsodyFrame> push(const AudioFrame& chunk) {
    if (chunk.sample_rate <= 0)
      throw Error(ErrorCode::InvalidSampleRate, std::to_string(chunk.sample_rate));
    if (last_chunk_start_ && chunk.start_time < *last_chunk_start_)
      throw Error(ErrorCode::OutOfOrderFrame,
                  "chunk at " + std::to_string(chunk.start_time) + " ms after " +
                      std::to_string(*last_chunk_start_) + " ms");
    last_chunk_start_ = chunk.start_time;

    if (chunk.sample_rate != rate_ || chunk.start_time > stream_end_ms() + cfg_.hop_ms)
      restart(chunk.sample_rate, chunk.start_time);

    buffer_.insert(buffer_.end(), chunk.samples.begin(), chunk.samples.end());
    total_samples_ += chunk.samples.size();

    std::vector<ProsodyFrame> out;
    const std::size_t win = window_samples();
    while (next_offset_ + win <= buffered_from_ + buffer_.size()) {
      const std::size_t begin = next_offset_ - buffered_from_;
      AudioFrame window;
      window.sample_rate = rate_;
      window.start_time = grid_start_ + static_cast<Millis>(hops_emitted_) * cfg_.hop_ms;
      window.samples.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(begin),
                            buffer_.begin() + static_cast<std::ptrdiff_t>(begin + win));
      out.push_back(analyze_frame(window, cfg_));
      ++hops_emitted_;
      next_offset_ = hops_emitted_ * hop_samples();
    }
    // Drop samples no future window can reach.
    if (next_offset_ > buffered_from_) {
      const std::size_t drop = std::min(next_offset_ - buffered_from_, buffer_.size());
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(drop));
      buffered_from_ += drop;
    }
    return out;
  }

  /// End of the audio received so far, in stream time.
  Millis stream_end_ms() const {
    if (rate_ <= 0) return 0;
    return grid_start_ + static_cast<Millis>(total_samples_ * 1000 / static_cast<std::size_t>(rate_));
  }

 private:
  std::size_t window_samples() const {
    const auto w = static_cast<std::size_t>(std::lround(cfg_.window_ms * rate_ / 1000.0));
    return std::max(w, min_analysis_samples(rate_, cfg_));
  }
  std::size_t hop_samples() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg_.hop_ms * rate_ / 1000.0)));
  }

  void restart(int rate, Millis start) {
    rate_ = rate;
    grid_start_ = start;
    buffer_.clear();
    buffered_from_ = 0;
    next_offset_ = 0;
    hops_emitted_ = 0;
    total_samples_ = 0;
  }

  ProsodyConfig cfg_;
  int rate_ = 0;
  Millis grid_start_ = 0;
  std::optional<Millis> last_chunk_start_;
  std::deque<float> buffer_;
  std::size_t buffered_from_ = 0;  // stream offset of buffer_.front()
  std::size_t next_offset_ = 0;
  std::size_t hops_emitted_ = 0;
  std::size_t total_samples_ = 0;
};

// ---------------------------------------------------------------------------
// Speech / pause segmentation
// ---------------------------------------------------------------------------

enum class ActivityKind { Speech, Pause };

struct ActivitySegment {
  ActivityKind kind = ActivityKind::Pause;
  Millis start = 0;
  Millis end = 0;

  Millis duration() const { return end - start; }
  bool operator==(const ActivitySegment&) const = default;
};

struct VadConfig {
  /// Fixed threshold on frame energy. When unset, the threshold is
  /// noise_multiplier times the mean energy of the first calibration_ms.
  std::optional<double> energy_threshold;
  double noise_multiplier = 3.0;
  Millis calibration_ms = 500;
  double min_threshold = 0.01;
  Millis hangover_ms = 200;
  /// Duration each ProsodyFrame stands for.
  Millis hop_ms = 10;
};

/// Streaming speech/pause segmenter. A Speech segment ends only once a run of
/// inactive frames has lasted hangover_ms; the Pause then starts at the first
/// inactive frame of that run. Frames seen while calibrating count as inactive.
class ActivityTracker {
 public:
  explicit ActivityTracker(VadConfig cfg = {}) : cfg_(cfg), threshold_(cfg.energy_threshold) {}

  /// Feeds one frame; returns the segments it closed (zero or one).
  std::vector<ActivitySegment> push(const ProsodyFrame& f) {
    if (last_time_ && f.time <= *last_time_)
      throw Error(ErrorCode::OutOfOrderFrame,
                  std::to_string(f.time) + " ms after " + std::to_string(*last_time_) + " ms");
    last_time_ = f.time;
    end_time_ = f.time + cfg_.hop_ms;
    const bool active = classify(f);

    std::vector<ActivitySegment> closed;
    if (!kind_) {
      kind_ = active ? ActivityKind::Speech : ActivityKind::Pause;
      seg_start_ = f.time;
    } else if (*kind_ == ActivityKind::Speech) {
      if (active) {
        dip_start_.reset();
      } else {
        if (!dip_start_) dip_start_ = f.time;
        if (end_time_ - *dip_start_ >= cfg_.hangover_ms) {
          closed.push_back(close(ActivityKind::Speech, *dip_start_));
          kind_ = ActivityKind::Pause;
          seg_start_ = *dip_start_;
          dip_start_.reset();
        }
      }
    } else if (active) {
      closed.push_back(close(ActivityKind::Pause, f.time));
      kind_ = ActivityKind::Speech;
      seg_start_ = f.time;
    }
    return closed;
  }

  /// Closes the open segment at the end of the last frame. A pending dip
  /// shorter than the hangover stays inside the Speech segment.
  std::vector<ActivitySegment> finish() {
    std::vector<ActivitySegment> out;
    if (kind_) out.push_back(close(*kind_, end_time_));
    kind_.reset();
    dip_start_.reset();
    return out;
  }

  /// Forgets segment history (per-turn state) but keeps the calibrated
  /// threshold and the time-ordering guard.
  void reset_segments() {
    kind_.reset();
    dip_start_.reset();
    last_speech_.reset();
    closed_speech_ms_ = 0;
  }

  bool in_confirmed_pause() const { return kind_ == ActivityKind::Pause; }
  bool in_speech() const { return kind_ == ActivityKind::Speech; }
  std::optional<Millis> pause_start() const {
    if (kind_ == ActivityKind::Pause) return seg_start_;
    return std::nullopt;
  }
  /// The most recently closed Speech segment.
  const std::optional<ActivitySegment>& last_speech() const { return last_speech_; }
  /// Speech accumulated since construction or the last reset_segments().
  Millis speech_ms() const {
    Millis total = closed_speech_ms_;
    if (kind_ == ActivityKind::Speech) total += end_time_ - seg_start_;
    return total;
  }
  std::optional<double> threshold() const { return threshold_; }

 private:
  bool classify(const ProsodyFrame& f) {
    if (!threshold_) {
      if (!calib_start_) calib_start_ = f.time;
      if (f.time - *calib_start_ < cfg_.calibration_ms) {
        calib_sum_ += f.energy;
        ++calib_count_;
        return false;
      }
      const double floor = calib_count_ ? calib_sum_ / static_cast<double>(calib_count_) : 0.0;
      threshold_ = std::max(cfg_.noise_multiplier * floor, cfg_.min_threshold);
    }
    return f.energy >= *threshold_;
  }

  ActivitySegment close(ActivityKind kind, Millis end) {
    ActivitySegment seg{kind, seg_start_, end};
    if (kind == ActivityKind::Speech) {
      last_speech_ = seg;
      closed_speech_ms_ += seg.duration();
    }
    return seg;
  }

  VadConfig cfg_;
  std::optional<double> threshold_;
  std::optional<Millis> calib_start_;
  double calib_sum_ = 0.0;
  std::size_t calib_count_ = 0;

  std::optional<ActivityKind> kind_;
  Millis seg_start_ = 0;
  std::optional<Millis> dip_start_;
  std::optional<Millis> last_time_;
  Millis end_time_ = 0;
  std::optional<ActivitySegment> last_speech_;
  Millis closed_speech_ms_ = 0;
};

/// Batch form of ActivityTracker: the returned segments tile
/// [first.time, last.time + hop) with alternating kinds.
inline std::vector<ActivitySegment> segment_activity(std::span<const ProsodyFrame> frames,
                                                     const VadConfig& cfg = {}) {
  ActivityTracker tracker(cfg);
  std::vector<ActivitySegment> out;
  for (const auto& f : frames) {
    auto closed = tracker.push(f);
    out.insert(out.end(), closed.begin(), closed.end());
  }
  auto tail = tracker.finish();
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

/// Semitone distance between two frequencies.
inline double semitones(double from_hz, double to_hz) {
  return 12.0 * std::log2(to_hz / from_hz);
}

}  // namespace attentive

#endif  // ATTENTIVE_PROSODY_HPP
