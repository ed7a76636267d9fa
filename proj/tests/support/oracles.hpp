#pragma once

// Independent reference implementations used to cross-check the library.
// These deliberately avoid the library's code paths: plain loops, no shared
// helpers, higher precision where it matters.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

/// Softmax evaluated in extended precision with its own stabilization.
inline std::vector<double> softmax(std::span<const double> logits) {
  long double max_logit = logits[0];
  for (double v : logits) {
    if (static_cast<long double>(v) > max_logit) max_logit = v;
  }
  long double total = 0.0L;
  std::vector<long double> exps(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    exps[i] = std::exp(static_cast<long double>(logits[i]) - max_logit);
    total += exps[i];
  }
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = static_cast<double>(exps[i] / total);
  }
  return out;
}

/// First index attaining the maximum.
inline std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

/// Per-class sum of softmax outputs over a set of logit vectors.
inline std::vector<double> fuse(
    const std::vector<std::vector<double>>& model_logits) {
  const std::size_t k = model_logits[0].size();
  std::vector<double> scores(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (const std::vector<double>& logits : model_logits) {
      scores[c] += softmax(logits)[c];
    }
  }
  return scores;
}

/// Literal windowed-mean update, evaluated directly per frame with a plain
/// sum over the truncated window.
inline std::vector<std::vector<double>> smooth(
    const std::vector<std::vector<double>>& frames, unsigned window) {
  if (window == 0) return frames;
  const std::size_t n = frames.size();
  if (n == 0) return frames;
  const std::size_t k = frames[0].size();
  const std::size_t half = window / 2;
  std::vector<std::vector<double>> out(n, std::vector<double>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    for (std::size_t c = 0; c < k; ++c) {
      double sum = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) sum += frames[j][c];
      out[i][c] = frames[i][c] + sum / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

struct F1Result {
  std::vector<double> f1;
  double macro = 0.0;
  std::vector<std::uint64_t> diag;  // matrix check: truth-major counts
  std::vector<std::uint64_t> counts;
};

/// F1 by direct pair scanning: counts tp/fp/fn per class without building a
/// matrix first, then 2tp / (2tp + fp + fn) with zero-denominator -> 0.
inline F1Result f1(std::span<const int> preds, std::span<const int> truths,
                   std::size_t k) {
  F1Result result;
  result.f1.resize(k);
  result.counts.assign(k * k, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (truths[i] == -1) continue;
    result.counts[static_cast<std::size_t>(truths[i]) * k +
                  static_cast<std::size_t>(preds[i])] += 1;
  }
  double accum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (truths[i] == -1) continue;
      const bool truth_c = truths[i] == static_cast<int>(c);
      const bool pred_c = preds[i] == static_cast<int>(c);
      if (truth_c && pred_c) ++tp;
      if (!truth_c && pred_c) ++fp;
      if (truth_c && !pred_c) ++fn;
    }
    const std::uint64_t denom = 2 * tp + fp + fn;
    result.f1[c] =
        denom > 0 ? static_cast<double>(2 * tp) / static_cast<double>(denom)
                  : 0.0;
    accum += result.f1[c];
  }
  result.macro = accum / static_cast<double>(k);
  return result;
}

inline std::size_t flips(std::span<const int> labels) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[i - 1]) ++count;
  }
  return count;
}

/// Flat 8-class reference for the cascade: grouped coarse scores are the
/// per-group sums of the flat softmax mass, negative scores its restriction
/// to the grouped classes, renormalized.
struct FlatCascade {
  std::vector<double> flat_probs;      // 8
  std::vector<double> coarse_scores;   // 5, canonical coarse order
  std::vector<double> negative_scores; // 4, canonical negative order
  std::size_t flat_argmax = 0;
  bool flat_is_negative = false;
};

inline FlatCascade flat_cascade(std::span<const double> flat_logits) {
  // Canonical order: fine {Neutral, Anger, Disgust, Fear, Happiness,
  // Sadness, Surprise, Other}; coarse {Neutral, Negative, Happiness,
  // Surprise, Other}; negative {Anger, Disgust, Fear, Sadness}.
  static constexpr int kNegativeFine[4] = {1, 2, 3, 5};
  static constexpr int kDirectFine[5] = {0, -1, 4, 6, 7};
  FlatCascade out;
  out.flat_probs = softmax(flat_logits);
  out.flat_argmax = argmax(out.flat_probs);
  out.coarse_scores.assign(5, 0.0);
  for (std::size_t c = 0; c < 5; ++c) {
    if (kDirectFine[c] >= 0) {
      out.coarse_scores[c] = out.flat_probs[static_cast<std::size_t>(kDirectFine[c])];
    } else {
      for (int fine : kNegativeFine) {
        out.coarse_scores[c] += out.flat_probs[static_cast<std::size_t>(fine)];
      }
    }
  }
  double negative_total = 0.0;
  out.negative_scores.assign(4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    out.negative_scores[i] =
        out.flat_probs[static_cast<std::size_t>(kNegativeFine[i])];
    negative_total += out.negative_scores[i];
  }
  for (double& v : out.negative_scores) v /= negative_total;
  for (int fine : kNegativeFine) {
    out.flat_is_negative =
        out.flat_is_negative || out.flat_argmax == static_cast<std::size_t>(fine);
  }
  return out;
}

}  // namespace oracle
