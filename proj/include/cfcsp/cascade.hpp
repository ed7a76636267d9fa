#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfcsp/detail/kv.hpp"
#include "cfcsp/error.hpp"
#include "cfcsp/fusion.hpp"
#include "cfcsp/smoothing.hpp"
#include "cfcsp/taxonomy.hpp"

namespace cfcsp {

enum class DecidedBy { CoarseDirect, NegativeNet };

/// Final per-frame decision plus its provenance: which stage decided and the
/// fused scores that decision saw. negative_scores is engaged exactly when
/// the negative stage was consulted.
struct PredictionRecord {
  std::string video_id;
  std::int64_t frame_index = 0;
  FineLabel label;
  DecidedBy decided_by = DecidedBy::CoarseDirect;
  std::vector<double> coarse_scores;
  std::optional<std::vector<double>> negative_scores;
};

struct RouteResult {
  FineLabel label;
  DecidedBy decided_by = DecidedBy::CoarseDirect;
  std::optional<FusedScores> negative;
};

/// One frame's fused scores per stage. The coarse stage is always present;
/// the negative stage only needs to be materialized for frames whose coarse
/// argmax lands on the grouped class (lazy and eager evaluation are
/// observably equivalent).
struct StageOutputs {
  FusedScores coarse;
  std::optional<FusedScores> negative;
};

/// Two-stage decision for one frame. The coarse scores are argmaxed first;
/// only when the grouped class wins is `negative_provider` invoked to
/// disambiguate, so the negative stage costs nothing on frames decided
/// directly. Non-grouped coarse classes convert to fine labels by name.
inline RouteResult route(const FusedScores& coarse,
                         const std::function<FusedScores()>& negative_provider,
                         const LabelScheme& scheme) {
  if (coarse.scores.size() != scheme.coarse_names().size()) {
    raise(errc::shape_mismatch,
          "route: coarse scores have " + std::to_string(coarse.scores.size()) +
              " entries, expected " +
              std::to_string(scheme.coarse_names().size()));
  }
  const CoarseLabel winner{static_cast<int>(decide(coarse))};
  if (!(winner == scheme.negative_class())) {
    return {scheme.fine_by_name(scheme.coarse_name(winner)),
            DecidedBy::CoarseDirect, std::nullopt};
  }
  if (!negative_provider) {
    raise(errc::missing_negative_scores,
          "route: grouped class won but no negative-stage provider is set");
  }
  FusedScores negative = negative_provider();
  if (negative.scores.size() != scheme.negative_names().size()) {
    raise(errc::shape_mismatch,
          "route: negative scores have " +
              std::to_string(negative.scores.size()) + " entries, expected " +
              std::to_string(scheme.negative_names().size()));
  }
  const NegativeLabel fine_grained{static_cast<int>(decide(negative))};
  return {scheme.from_negative(fine_grained), DecidedBy::NegativeNet,
          std::move(negative)};
}

/// Eager form: both stages already computed. Raises missing-negative-scores
/// when the grouped class wins but outputs.negative is empty.
inline RouteResult route(const StageOutputs& outputs,
                         const LabelScheme& scheme) {
  std::function<FusedScores()> provider;
  if (outputs.negative) {
    provider = [&outputs] { return *outputs.negative; };
  }
  return route(outputs.coarse, provider, scheme);
}

/// Where smoothing sits relative to model fusion. PreFusion smooths each
/// model's logit stream before softmax (the default); PostFusion smooths the
/// fused score sequence instead, kept for ablations.
enum class SmoothingPlacement { PreFusion, PostFusion };

struct StageSmoothing {
  SmoothingConfig coarse;
  SmoothingConfig negative;
  SmoothingPlacement placement = SmoothingPlacement::PreFusion;
};

namespace detail {

inline void check_video_streams(std::span<const VideoLogitStream> streams,
                                const std::string& video_id, std::size_t n,
                                std::size_t k, const char* stage) {
  for (const VideoLogitStream& stream : streams) {
    validate_stream(stream);
    if (stream.video_id != video_id) {
      raise(errc::alignment, std::string(stage) + " stream of model '" +
                                 stream.model_id + "' belongs to video '" +
                                 stream.video_id + "', expected '" + video_id +
                                 "'");
    }
    if (stream.size() != n) {
      raise(errc::alignment,
            std::string("frame-count mismatch: (") + stream.model_id + ", " +
                std::to_string(stream.size()) + ") in the " + stage +
                " stage, expected " + std::to_string(n) + " frames");
    }
    if (stream.size() > 0 && stream.dim() != k) {
      raise(errc::shape_mismatch,
            std::string(stage) + " stream of model '" + stream.model_id +
                "' has " + std::to_string(stream.dim()) +
                " classes, expected " + std::to_string(k));
    }
  }
}

inline FusedScores fuse_at(std::span<const VideoLogitStream> streams,
                           std::size_t frame, const std::string& video_id) {
  std::vector<LogitFrame> frames;
  frames.reserve(streams.size());
  for (const VideoLogitStream& stream : streams) {
    frames.push_back({video_id, static_cast<std::int64_t>(frame),
                      stream.model_id, stream.frames[frame]});
  }
  return fuse(frames);
}

}  // namespace detail

/// Runs the full per-video pipeline: smooth each model stream (per-stage
/// window), fuse the models, route each frame through the cascade. Returns
/// one record per frame, in frame order, deterministically.
///
/// The negative stage is evaluated lazily: its streams are smoothed (over
/// the full video, so every window has its temporal context) the first time
/// any frame routes to the grouped class, and not at all otherwise. An empty
/// `negative_streams` list is therefore accepted as long as no frame routes
/// there; a frame that does raises a missing-negative-scores error.
inline std::vector<PredictionRecord> predict_video(
    std::span<const VideoLogitStream> coarse_streams,
    std::span<const VideoLogitStream> negative_streams,
    const StageSmoothing& smoothing, const LabelScheme& scheme) {
  if (coarse_streams.empty()) {
    raise(errc::no_models, "predict_video: no coarse streams supplied");
  }
  const std::string& video_id = coarse_streams.front().video_id;
  const std::size_t n = coarse_streams.front().size();
  detail::check_video_streams(coarse_streams, video_id, n,
                              scheme.coarse_names().size(), "coarse");
  detail::check_video_streams(negative_streams, video_id, n,
                              scheme.negative_names().size(), "negative");

  std::vector<PredictionRecord> records;
  if (n == 0) return records;
  records.reserve(n);

  const auto missing_negative = [&]() -> std::string {
    return "video '" + video_id +
           "': a frame routed to the grouped class but no negative-stage "
           "streams are available";
  };

  if (smoothing.placement == SmoothingPlacement::PreFusion) {
    std::vector<VideoLogitStream> smoothed_coarse;
    smoothed_coarse.reserve(coarse_streams.size());
    for (const VideoLogitStream& stream : coarse_streams) {
      smoothed_coarse.push_back(smooth_batch(stream, smoothing.coarse));
    }

    // Smoothed on first demand, then reused for every routed frame.
    std::optional<std::vector<VideoLogitStream>> smoothed_negative;
    const auto negative_at = [&](std::size_t frame) -> FusedScores {
      if (!smoothed_negative) {
        if (negative_streams.empty()) {
          raise(errc::missing_negative_scores, missing_negative());
        }
        smoothed_negative.emplace();
        smoothed_negative->reserve(negative_streams.size());
        for (const VideoLogitStream& stream : negative_streams) {
          smoothed_negative->push_back(smooth_batch(stream, smoothing.negative));
        }
      }
      return detail::fuse_at(*smoothed_negative, frame, video_id);
    };

    for (std::size_t i = 0; i < n; ++i) {
      FusedScores coarse = detail::fuse_at(smoothed_coarse, i, video_id);
      RouteResult routed =
          route(coarse, [&] { return negative_at(i); }, scheme);
      PredictionRecord record{video_id, static_cast<std::int64_t>(i),
                              routed.label, routed.decided_by,
                              std::move(coarse.scores), std::nullopt};
      if (routed.negative) {
        record.negative_scores = std::move(routed.negative->scores);
      }
      records.push_back(std::move(record));
    }
    return records;
  }

  // PostFusion: fuse raw logits per frame, then smooth the fused sequences.
  VideoLogitStream coarse_fused{video_id, "<fused>", {}, 30.0};
  coarse_fused.frames.reserve(n);
  std::vector<std::string> coarse_models;
  for (std::size_t i = 0; i < n; ++i) {
    FusedScores fused = detail::fuse_at(coarse_streams, i, video_id);
    if (i == 0) coarse_models = fused.contributing_models;
    coarse_fused.frames.push_back(std::move(fused.scores));
  }
  coarse_fused = smooth_batch(coarse_fused, smoothing.coarse);

  std::optional<VideoLogitStream> negative_fused;
  std::vector<std::string> negative_models;
  const auto negative_at = [&](std::size_t frame) -> FusedScores {
    if (!negative_fused) {
      if (negative_streams.empty()) {
        raise(errc::missing_negative_scores, missing_negative());
      }
      VideoLogitStream fused_stream{video_id, "<fused>", {}, 30.0};
      fused_stream.frames.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        FusedScores fused = detail::fuse_at(negative_streams, i, video_id);
        if (i == 0) negative_models = fused.contributing_models;
        fused_stream.frames.push_back(std::move(fused.scores));
      }
      negative_fused = smooth_batch(fused_stream, smoothing.negative);
    }
    return {negative_fused->frames[frame], negative_models};
  };

  for (std::size_t i = 0; i < n; ++i) {
    FusedScores coarse{coarse_fused.frames[i], coarse_models};
    RouteResult routed = route(coarse, [&] { return negative_at(i); }, scheme);
    PredictionRecord record{video_id, static_cast<std::int64_t>(i),
                            routed.label, routed.decided_by,
                            std::move(coarse.scores), std::nullopt};
    if (routed.negative) {
      record.negative_scores = std::move(routed.negative->scores);
    }
    records.push_back(std::move(record));
  }
  return records;
}

/// Pipeline configuration for the CLI and sweeps. Text form:
///
///   coarse_models   = [A, B, C]
///   negative_models = [D]
///   coarse_window   = 256
///   negative_window = 256
///   smoothing_stage = pre_fusion   # or post_fusion
struct PipelineConfig {
  std::vector<std::string> coarse_models;
  std::vector<std::string> negative_models;
  StageSmoothing smoothing;

  static PipelineConfig parse(std::string_view text,
                              const std::string& origin = "<pipeline config>") {
    PipelineConfig config;
    for (const auto& [key, value] : detail::parse_kv(text, origin)) {
      if (key == "coarse_models") {
        config.coarse_models = detail::split_list(value);
      } else if (key == "negative_models") {
        config.negative_models = detail::split_list(value);
      } else if (key == "coarse_window") {
        config.smoothing.coarse.window = parse_window(value, origin);
      } else if (key == "negative_window") {
        config.smoothing.negative.window = parse_window(value, origin);
      } else if (key == "smoothing_stage") {
        if (detail::iequals(value, "pre_fusion")) {
          config.smoothing.placement = SmoothingPlacement::PreFusion;
        } else if (detail::iequals(value, "post_fusion")) {
          config.smoothing.placement = SmoothingPlacement::PostFusion;
        } else {
          raise(errc::invalid_params,
                origin + ": smoothing_stage must be pre_fusion or post_fusion, "
                         "got '" + value + "'");
        }
      } else {
        raise(errc::invalid_params, origin + ": unknown key '" + key + "'");
      }
    }
    return config;
  }

 private:
  static unsigned parse_window(const std::string& value,
                               const std::string& origin) {
    unsigned w = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, w);
    if (ec != std::errc() || ptr != end) {
      raise(errc::invalid_params,
            origin + ": window must be a non-negative integer, got '" + value +
                "'");
    }
    return w;
  }
};

}  // namespace cfcsp
