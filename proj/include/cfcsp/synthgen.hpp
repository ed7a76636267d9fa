#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfcsp/error.hpp"
#include "cfcsp/prng.hpp"
#include "cfcsp/smoothing.hpp"
#include "cfcsp/taxonomy.hpp"

namespace cfcsp {

/// Knobs for the synthetic corpus generator. The emitted truth track is
/// piecewise constant (segment lengths uniform in [segment_min, segment_max],
/// classes drawn from class_prior); each toy model emits the stage logits as
/// gain-at-the-true-class plus Gaussian noise. model_decorrelation blends a
/// noise component shared by all models with per-model components: 0 makes
/// every model err identically, 1 makes their errors independent.
struct SynthParams {
  std::uint64_t seed = 0;
  std::size_t n_frames = 0;
  double frame_rate = 30.0;
  std::size_t segment_min = 1;
  std::size_t segment_max = 1;
  std::vector<double> class_prior;  // empty = uniform over the fine classes
  double logit_gain = 1.0;
  double noise_sigma = 0.0;
  double model_decorrelation = 1.0;
};

struct SynthVideo {
  std::string video_id;
  std::vector<int> truth;  // fine labels, no -1 entries
  std::vector<VideoLogitStream> coarse_streams;
  std::vector<VideoLogitStream> negative_streams;
};

namespace detail {

inline std::vector<double> checked_prior(const SynthParams& params,
                                         std::size_t classes) {
  std::vector<double> prior = params.class_prior;
  if (prior.empty()) {
    prior.assign(classes, 1.0 / static_cast<double>(classes));
  }
  if (prior.size() != classes) {
    raise(errc::invalid_params,
          "class_prior must have " + std::to_string(classes) +
              " entries, found " + std::to_string(prior.size()));
  }
  double total = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      raise(errc::invalid_params, "class_prior entries must be finite and >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    raise(errc::invalid_params, "class_prior must sum to 1");
  }
  return prior;
}

inline void check_params(const SynthParams& params) {
  if (params.segment_min < 1 || params.segment_min > params.segment_max) {
    raise(errc::invalid_params,
          "segment length range [" + std::to_string(params.segment_min) + ", " +
              std::to_string(params.segment_max) + "] is invalid");
  }
  if (!(params.noise_sigma >= 0.0) || !std::isfinite(params.noise_sigma)) {
    raise(errc::invalid_params, "noise_sigma must be finite and >= 0");
  }
  if (!std::isfinite(params.logit_gain)) {
    raise(errc::invalid_params, "logit_gain must be finite");
  }
  if (!(params.model_decorrelation >= 0.0) ||
      !(params.model_decorrelation <= 1.0)) {
    raise(errc::invalid_params, "model_decorrelation must lie in [0, 1]");
  }
  if (!(params.frame_rate > 0.0) || !std::isfinite(params.frame_rate)) {
    raise(errc::invalid_params, "frame_rate must be finite and > 0");
  }
}

inline int draw_class(SplitMix64& rng, std::span<const double> prior) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t c = 0; c < prior.size(); ++c) {
    if (prior[c] > 0.0) last_positive = static_cast<int>(c);
    cumulative += prior[c];
    if (u < cumulative) return static_cast<int>(c);
  }
  return last_positive;  // guards the sum-rounding edge at u ~ 1
}

}  // namespace detail

/// Deterministic synthetic video. Sub-seeds are handed out by a SplitMix64
/// seeded with params.seed, in a fixed order: truth track, shared noise,
/// then one per model in caller order. Per frame, the shared and per-model
/// noise streams each yield 5 coarse draws followed by 4 negative draws.
/// Frames whose truth is not grouped get flat (zero-signal) negative logits,
/// so nothing pretends to know a negative label that does not exist.
inline SynthVideo gen_video(const SynthParams& params,
                            std::span<const std::string> model_ids,
                            const LabelScheme& scheme,
                            std::string video_id = "video") {
  detail::check_params(params);
  if (model_ids.empty()) {
    raise(errc::invalid_params, "gen_video: at least one model id required");
  }
  const std::size_t fine_k = scheme.fine_names().size();
  const std::size_t coarse_k = scheme.coarse_names().size();
  const std::size_t negative_k = scheme.negative_names().size();
  const std::vector<double> prior = detail::checked_prior(params, fine_k);

  SplitMix64 root(params.seed);
  const std::uint64_t truth_seed = root.next();
  const std::uint64_t shared_seed = root.next();
  std::vector<std::uint64_t> model_seeds;
  model_seeds.reserve(model_ids.size());
  for (std::size_t m = 0; m < model_ids.size(); ++m) {
    model_seeds.push_back(root.next());
  }

  SynthVideo video;
  video.video_id = std::move(video_id);
  video.truth.reserve(params.n_frames);
  SplitMix64 truth_rng(truth_seed);
  while (video.truth.size() < params.n_frames) {
    const std::uint64_t span =
        params.segment_min +
        truth_rng.below(params.segment_max - params.segment_min + 1);
    const int cls = detail::draw_class(truth_rng, prior);
    for (std::uint64_t i = 0; i < span && video.truth.size() < params.n_frames;
         ++i) {
      video.truth.push_back(cls);
    }
  }

  // Negative-stage index per frame; -1 where the truth is not grouped.
  std::vector<int> negative_index(params.n_frames, -1);
  for (std::size_t i = 0; i < params.n_frames; ++i) {
    const FineLabel fine{video.truth[i]};
    if (!scheme.is_negative_group(fine)) continue;
    for (std::size_t nindex = 0; nindex < negative_k; ++nindex) {
      if (scheme.from_negative({static_cast<int>(nindex)}) == fine) {
        negative_index[i] = static_cast<int>(nindex);
        break;
      }
    }
  }

  const double shared_weight = std::sqrt(1.0 - params.model_decorrelation);
  const double own_weight = std::sqrt(params.model_decorrelation);

  SplitMix64 shared_rng(shared_seed);
  std::vector<SplitMix64> model_rngs;
  model_rngs.reserve(model_ids.size());
  for (std::uint64_t seed : model_seeds) model_rngs.emplace_back(seed);

  video.coarse_streams.resize(model_ids.size());
  video.negative_streams.resize(model_ids.size());
  for (std::size_t m = 0; m < model_ids.size(); ++m) {
    video.coarse_streams[m].video_id = video.video_id;
    video.coarse_streams[m].model_id = model_ids[m];
    video.coarse_streams[m].frame_rate_hint = params.frame_rate;
    video.coarse_streams[m].frames.reserve(params.n_frames);
    video.negative_streams[m].video_id = video.video_id;
    video.negative_streams[m].model_id = model_ids[m];
    video.negative_streams[m].frame_rate_hint = params.frame_rate;
    video.negative_streams[m].frames.reserve(params.n_frames);
  }

  std::vector<double> shared_noise(coarse_k + negative_k);
  for (std::size_t i = 0; i < params.n_frames; ++i) {
    const int coarse_true = scheme.to_coarse({video.truth[i]}).index;
    for (double& z : shared_noise) z = shared_rng.normal();
    for (std::size_t m = 0; m < model_ids.size(); ++m) {
      std::vector<double> coarse_frame(coarse_k);
      std::vector<double> negative_frame(negative_k);
      for (std::size_t c = 0; c < coarse_k; ++c) {
        const double noise = shared_weight * shared_noise[c] +
                             own_weight * model_rngs[m].normal();
        const double signal =
            static_cast<int>(c) == coarse_true ? params.logit_gain : 0.0;
        coarse_frame[c] = signal + params.noise_sigma * noise;
      }
      for (std::size_t c = 0; c < negative_k; ++c) {
        const double noise = shared_weight * shared_noise[coarse_k + c] +
                             own_weight * model_rngs[m].normal();
        const double signal = static_cast<int>(c) == negative_index[i]
                                  ? params.logit_gain
                                  : 0.0;
        negative_frame[c] = signal + params.noise_sigma * noise;
      }
      video.coarse_streams[m].frames.push_back(std::move(coarse_frame));
      video.negative_streams[m].frames.push_back(std::move(negative_frame));
    }
  }
  return video;
}

/// Repeat factor per class for frequency-threshold oversampling:
/// r(c) = max(1, sqrt(t / freq(c))). Frequencies must be positive.
inline std::vector<double> repeat_factors(std::span<const double> class_freqs,
                                          double threshold_t) {
  if (class_freqs.empty()) {
    raise(errc::empty_input, "repeat_factors: empty frequency vector");
  }
  if (!(threshold_t > 0.0) || threshold_t > 1.0) {
    raise(errc::invalid_params, "threshold t must lie in (0, 1]");
  }
  double total = 0.0;
  for (double f : class_freqs) {
    if (f == 0.0) {
      raise(errc::undefined_factor,
            "repeat factor undefined for zero class frequency");
    }
    if (!(f > 0.0) || !std::isfinite(f)) {
      raise(errc::invalid_params, "class frequencies must be finite and > 0");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    raise(errc::invalid_params, "class frequencies must sum to 1");
  }
  std::vector<double> factors(class_freqs.size());
  for (std::size_t c = 0; c < class_freqs.size(); ++c) {
    factors[c] = std::max(1.0, std::sqrt(threshold_t / class_freqs[c]));
  }
  return factors;
}

/// Oversampled index sequence: index i is repeated floor(r) times plus one
/// more with probability frac(r), where r is its class's repeat factor; the
/// result is then shuffled. Fully determined by (labels, t, seed).
inline std::vector<std::size_t> resample_indices(std::span<const int> labels,
                                                 double threshold_t,
                                                 std::uint64_t seed) {
  if (labels.empty()) {
    raise(errc::empty_input, "resample_indices: empty label sequence");
  }
  int max_label = 0;
  for (int label : labels) {
    if (label < 0) {
      raise(errc::invalid_label,
            "resample_indices: labels must be >= 0, got " +
                std::to_string(label));
    }
    max_label = std::max(max_label, label);
  }
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_label) + 1, 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];

  if (!(threshold_t > 0.0) || threshold_t > 1.0) {
    raise(errc::invalid_params, "threshold t must lie in (0, 1]");
  }
  const double n = static_cast<double>(labels.size());
  std::vector<double> factor(counts.size(), 1.0);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;  // absent classes need no factor
    const double freq = static_cast<double>(counts[c]) / n;
    factor[c] = std::max(1.0, std::sqrt(threshold_t / freq));
  }

  SplitMix64 rng(seed);
  std::vector<std::size_t> indices;
  indices.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double r = factor[static_cast<std::size_t>(labels[i])];
    std::size_t copies = static_cast<std::size_t>(std::floor(r));
    if (rng.uniform01() < r - std::floor(r)) ++copies;
    for (std::size_t rep = 0; rep < copies; ++rep) indices.push_back(i);
  }
  rng.shuffle(indices);
  return indices;
}

}  // namespace cfcsp
