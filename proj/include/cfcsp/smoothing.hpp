#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfcsp/error.hpp"

namespace cfcsp {

/// Window boundaries are truncated at the sequence edges and the mean is
/// renormalized by the frames actually present; no frames are fabricated and
/// output length always equals input length.
enum class BoundaryPolicy { TruncateRenormalize };

/// Temporal smoothing settings. `window` is the neighborhood size w; frames
/// within floor(w/2) of position i contribute to its update. w = 0 disables
/// smoothing entirely (identity), while w = 1 degenerates to the one-frame
/// window {i}, which doubles every frame.
struct SmoothingConfig {
  unsigned window = 0;
  BoundaryPolicy boundary = BoundaryPolicy::TruncateRenormalize;

  std::size_t half() const { return window / 2; }
};

/// Ordered per-frame score vectors for one (video, model) pair. Frame
/// indices are implicit: row r is frame r. All rows share one length k.
struct VideoLogitStream {
  std::string video_id;
  std::string model_id;
  std::vector<std::vector<double>> frames;
  double frame_rate_hint = 30.0;  // informational only

  std::size_t size() const { return frames.size(); }
  std::size_t dim() const { return frames.empty() ? 0 : frames.front().size(); }
};

inline void validate_stream(const VideoLogitStream& stream) {
  const std::size_t k = stream.dim();
  if (!stream.frames.empty() && k == 0) {
    raise(errc::invalid_input,
          "stream '" + stream.video_id + "/" + stream.model_id +
              "' has empty frame vectors");
  }
  for (std::size_t i = 0; i < stream.frames.size(); ++i) {
    if (stream.frames[i].size() != k) {
      raise(errc::shape_mismatch,
            "stream '" + stream.video_id + "/" + stream.model_id +
                "': frame " + std::to_string(i) + " has " +
                std::to_string(stream.frames[i].size()) +
                " entries, expected " + std::to_string(k));
    }
    for (double v : stream.frames[i]) {
      if (!std::isfinite(v)) {
        raise(errc::invalid_input,
              "stream '" + stream.video_id + "/" + stream.model_id +
                  "': non-finite value at frame " + std::to_string(i));
      }
    }
  }
}

/// Adds to every frame the mean of its temporal neighborhood:
///
///   out_i = f_i + mean{ f_j : |j - i| <= floor(w/2), 0 <= j <= n-1 }
///
/// The mean is accumulated as deviations from the center frame, so a
/// constant stream doubles bit-exactly for every window size and boundary.
inline VideoLogitStream smooth_batch(const VideoLogitStream& stream,
                                     const SmoothingConfig& cfg) {
  validate_stream(stream);
  VideoLogitStream out = stream;
  if (cfg.window == 0 || stream.frames.empty()) return out;  // identity

  const std::size_t n = stream.frames.size();
  const std::size_t k = stream.dim();
  const std::size_t h = cfg.half();
  std::vector<double> deviation(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > h ? i - h : 0;
    const std::size_t hi = std::min(n - 1, i + h);
    const double count = static_cast<double>(hi - lo + 1);
    const std::vector<double>& center = stream.frames[i];
    std::fill(deviation.begin(), deviation.end(), 0.0);
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::vector<double>& frame = stream.frames[j];
      for (std::size_t c = 0; c < k; ++c) deviation[c] += frame[c] - center[c];
    }
    std::vector<double>& dst = out.frames[i];
    for (std::size_t c = 0; c < k; ++c) {
      dst[c] = center[c] + (center[c] + deviation[c] / count);
    }
  }
  return out;
}

/// Online form of smooth_batch. Frames are pushed one at a time; the
/// smoothed frame for position i is emitted as soon as its full right
/// context has arrived (latency floor(w/2) in the stream interior), and
/// flush() completes the truncated tail windows. Concatenated push + flush
/// outputs equal smooth_batch on the same sequence to ~1e-12 per component.
///
/// A ring buffer of the last 2*floor(w/2)+1 frames plus a running window
/// sum give O(k) work per push; the sum is recomputed exactly every 4096
/// pushes to keep floating-point drift bounded on long streams.
///
/// Single-owner mutable state: not safe for concurrent pushes. Parallelize
/// across videos, never within one smoother.
class StreamingSmoother {
 public:
  explicit StreamingSmoother(SmoothingConfig cfg) : cfg_(cfg) {}

  /// Feeds one frame; returns the next completed smoothed frame, if any.
  std::optional<std::vector<double>> push(std::span<const double> frame) {
    check_frame(frame);
    if (dim_ == 0) dim_ = frame.size();
    if (cfg_.window == 0) {
      ++pushed_;
      ++emitted_;
      return std::vector<double>(frame.begin(), frame.end());
    }

    buffer_.emplace_back(frame.begin(), frame.end());
    if (running_sum_.size() != dim_) running_sum_.assign(dim_, 0.0);
    for (std::size_t c = 0; c < dim_; ++c) running_sum_[c] += frame[c];
    if (buffer_.size() > capacity()) drop_front();
    if (++pushes_since_recompute_ >= kRecomputeInterval) recompute_sum();

    const std::size_t t = pushed_++;
    if (t < cfg_.half()) return std::nullopt;
    return emit(t - cfg_.half());
  }

  /// Emits the remaining tail positions (truncated windows), then resets to
  /// a fresh stream: flushing again yields nothing, and further pushes start
  /// a new sequence.
  std::vector<std::vector<double>> flush() {
    std::vector<std::vector<double>> out;
    if (cfg_.window != 0) {
      const std::size_t h = cfg_.half();
      out.reserve(pushed_ - emitted_);
      while (emitted_ < pushed_) {
        const std::size_t i = emitted_;
        const std::size_t lo = i > h ? i - h : 0;
        while (front_index_ < lo) drop_front();
        out.push_back(emit(i));
      }
    }
    buffer_.clear();
    running_sum_.assign(running_sum_.size(), 0.0);
    pushed_ = 0;
    emitted_ = 0;
    front_index_ = 0;
    pushes_since_recompute_ = 0;
    return out;
  }

  std::size_t frames_pushed() const { return pushed_; }
  std::size_t frames_emitted() const { return emitted_; }

 private:
  static constexpr std::size_t kRecomputeInterval = 4096;

  std::size_t capacity() const { return 2 * cfg_.half() + 1; }

  void check_frame(std::span<const double> frame) const {
    if (frame.empty()) {
      raise(errc::invalid_input, "streaming smoother: empty frame");
    }
    if (dim_ != 0 && frame.size() != dim_) {
      raise(errc::shape_mismatch,
            "streaming smoother: frame has " + std::to_string(frame.size()) +
                " entries, expected " + std::to_string(dim_));
    }
    for (double v : frame) {
      if (!std::isfinite(v)) {
        raise(errc::invalid_input, "streaming smoother: non-finite value");
      }
    }
  }

  void drop_front() {
    const std::vector<double>& front = buffer_.front();
    for (std::size_t c = 0; c < dim_; ++c) running_sum_[c] -= front[c];
    buffer_.pop_front();
    ++front_index_;
  }

  void recompute_sum() {
    running_sum_.assign(dim_, 0.0);
    for (const std::vector<double>& frame : buffer_) {
      for (std::size_t c = 0; c < dim_; ++c) running_sum_[c] += frame[c];
    }
    pushes_since_recompute_ = 0;
  }

  // At emission time the buffer holds exactly the window of position i.
  std::vector<double> emit(std::size_t i) {
    const double count = static_cast<double>(buffer_.size());
    const std::vector<double>& center = buffer_[i - front_index_];
    std::vector<double> out(dim_);
    for (std::size_t c = 0; c < dim_; ++c) {
      out[c] = center[c] + running_sum_[c] / count;
    }
    ++emitted_;
    return out;
  }

  SmoothingConfig cfg_;
  std::deque<std::vector<double>> buffer_;
  std::vector<double> running_sum_;
  std::size_t dim_ = 0;
  std::size_t pushed_ = 0;
  std::size_t emitted_ = 0;
  std::size_t front_index_ = 0;
  std::size_t pushes_since_recompute_ = 0;
};

inline StreamingSmoother streaming_new(SmoothingConfig cfg) {
  return StreamingSmoother(cfg);
}

}  // namespace cfcsp
