#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cfcsp/error.hpp"

namespace cfcsp {

/// One frame's raw score vector from one model.
struct LogitFrame {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::string model_id;
  std::vector<double> logits;
};

/// Per-class confidence totals after summing each model's softmax output.
/// Each score lies in (0, m) and the scores sum to m, the model count.
struct FusedScores {
  std::vector<double> scores;
  std::vector<std::string> contributing_models;  // lexicographically sorted
};

/// Max-subtracted softmax; exp never overflows regardless of input scale.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) raise(errc::invalid_input, "softmax: empty input");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double v : logits) {
    if (!std::isfinite(v)) {
      raise(errc::invalid_input, "softmax: non-finite logit");
    }
    max_logit = std::max(max_logit, v);
  }
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

/// Sums the per-model softmax outputs for one (video, frame) across models.
/// Accumulation runs in a canonical model order, so the result is exactly
/// invariant under permutation of the input list.
inline FusedScores fuse(std::span<const LogitFrame> frames) {
  if (frames.empty()) raise(errc::no_models, "fuse: no model frames supplied");
  const LogitFrame& first = frames.front();
  const std::size_t k = first.logits.size();
  for (const LogitFrame& frame : frames) {
    if (frame.logits.size() != k) {
      raise(errc::shape_mismatch,
            "fuse: model '" + frame.model_id + "' has " +
                std::to_string(frame.logits.size()) + " classes, expected " +
                std::to_string(k));
    }
    if (frame.video_id != first.video_id ||
        frame.frame_index != first.frame_index) {
      raise(errc::alignment,
            "fuse: frames must share one (video, frame_index); got (" +
                first.video_id + ", " + std::to_string(first.frame_index) +
                ") and (" + frame.video_id + ", " +
                std::to_string(frame.frame_index) + ")");
    }
    for (double v : frame.logits) {
      if (!std::isfinite(v)) {
        raise(errc::invalid_input,
              "fuse: non-finite logit from model '" + frame.model_id + "'");
      }
    }
  }

  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frames[a].model_id != frames[b].model_id) {
      return frames[a].model_id < frames[b].model_id;
    }
    return frames[a].logits < frames[b].logits;
  });

  FusedScores fused;
  fused.scores.assign(k, 0.0);
  fused.contributing_models.reserve(frames.size());
  for (std::size_t idx : order) {
    const std::vector<double> probs = softmax(frames[idx].logits);
    for (std::size_t c = 0; c < k; ++c) fused.scores[c] += probs[c];
    fused.contributing_models.push_back(frames[idx].model_id);
  }
  return fused;
}

/// Argmax with the lowest index winning ties, so decisions are reproducible
/// across platforms.
inline std::size_t decide(std::span<const double> scores) {
  if (scores.empty()) raise(errc::invalid_input, "decide: empty scores");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      raise(errc::invalid_input, "decide: non-finite score");
    }
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

inline std::size_t decide(const FusedScores& fused) {
  return decide(std::span<const double>(fused.scores));
}

}  // namespace cfcsp
