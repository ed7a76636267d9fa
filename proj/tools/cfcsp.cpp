// Command-line front end for the decision pipeline: synthetic corpus
// generation, batch prediction, evaluation, and the window/ensemble sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 internal error.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cfcsp/cfcsp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

/// Raised for CLI-level misuse (maps to exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string slurp_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) cfcsp::raise(cfcsp::errc::io, "cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

cfcsp::LabelScheme load_scheme_file(const std::string& path) {
  if (path.empty()) return cfcsp::LabelScheme::canonical();
  return cfcsp::LabelScheme::parse(slurp_file(path), path);
}

std::vector<std::string> split_models(const std::string& csv) {
  return cfcsp::detail::split_list(csv);
}

void check_model_name(const std::string& name) {
  if (name.empty()) throw UsageError("empty model name");
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) {
      throw UsageError("model name '" + name +
                       "' may only contain [A-Za-z0-9_.-]");
    }
  }
}

/// Runs fn(0..count) across up to `jobs` worker threads; the first exception
/// wins and is rethrown after all workers drain.
template <typename Fn>
void for_each_parallel(std::size_t count, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const unsigned n = std::min<std::size_t>(jobs, count);
  threads.reserve(n);
  for (unsigned i = 0; i < n; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Corpus scanning: logit files are discovered by header, not filename.

struct VideoEntry {
  std::map<std::string, fs::path> coarse;    // model -> file
  std::map<std::string, fs::path> negative;  // model -> file
};

struct CorpusIndex {
  std::map<std::string, VideoEntry> videos;  // ordered by video id
  std::set<std::string> coarse_models;
  std::set<std::string> negative_models;
};

std::string fields_stage(cfcsp::Stage stage) {
  return std::string(cfcsp::stage_name(stage));
}

cfcsp::LogitFileHeader peek_logit_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) cfcsp::raise(cfcsp::errc::io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw cfcsp::ParseError(path.string(), 1, "missing header line");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> fields = cfcsp::detail::split(line, ',');
  if (fields.size() != 6 || fields[0] != cfcsp::kLogitMagic) {
    throw cfcsp::ParseError(path.string(), 1, "not a logit file header");
  }
  cfcsp::LogitFileHeader header;
  header.video_id = fields[1];
  header.model_id = fields[2];
  if (fields[3] == "coarse") {
    header.stage = cfcsp::Stage::Coarse;
  } else if (fields[3] == "negative") {
    header.stage = cfcsp::Stage::Negative;
  } else if (fields[3] == "fine") {
    header.stage = cfcsp::Stage::Fine;
  } else {
    throw cfcsp::ParseError(path.string(), 1,
                            "unknown stage '" + fields[3] + "'");
  }
  return header;
}

CorpusIndex scan_logits(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    cfcsp::raise(cfcsp::errc::io,
                 "logit directory '" + dir.string() + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cspl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  CorpusIndex index;
  for (const fs::path& path : files) {
    const cfcsp::LogitFileHeader header = peek_logit_header(path);
    VideoEntry& entry = index.videos[header.video_id];
    auto& slot = header.stage == cfcsp::Stage::Negative ? entry.negative
                                                        : entry.coarse;
    if (header.stage == cfcsp::Stage::Fine) {
      cfcsp::raise(cfcsp::errc::io,
                   "'" + path.string() +
                       "': fine-stage logit files are not consumed by the "
                       "cascade pipeline");
    }
    if (!slot.emplace(header.model_id, path).second) {
      cfcsp::raise(cfcsp::errc::io,
                   "duplicate logit file for (" + header.video_id + ", " +
                       header.model_id + ", " + fields_stage(header.stage) +
                       "): '" + path.string() + "'");
    }
    if (header.stage == cfcsp::Stage::Coarse) {
      index.coarse_models.insert(header.model_id);
    } else {
      index.negative_models.insert(header.model_id);
    }
  }
  return index;
}

// Streams for one video, in the requested model order. If any requested
// negative file is missing the negative stage is treated as unavailable so
// routing there fails loudly instead of silently fusing a subset.
struct VideoData {
  std::string id;
  std::vector<cfcsp::VideoLogitStream> coarse;
  std::vector<cfcsp::VideoLogitStream> negative;
  std::vector<std::string> negative_gaps;
};

VideoData load_video_data(const std::string& video_id, const VideoEntry& entry,
                          const std::vector<std::string>& coarse_models,
                          const std::vector<std::string>& negative_models) {
  VideoData data;
  data.id = video_id;
  for (const std::string& model : coarse_models) {
    const auto it = entry.coarse.find(model);
    if (it == entry.coarse.end()) {
      cfcsp::raise(cfcsp::errc::io, "missing coarse logits for (" + video_id +
                                        ", " + model + ")");
    }
    cfcsp::LogitFile file = cfcsp::read_logits(it->second);
    data.coarse.push_back(std::move(file.stream));
  }
  std::vector<cfcsp::VideoLogitStream> negative;
  for (const std::string& model : negative_models) {
    const auto it = entry.negative.find(model);
    if (it == entry.negative.end()) {
      data.negative_gaps.push_back("(" + video_id + ", " + model + ")");
      continue;
    }
    cfcsp::LogitFile file = cfcsp::read_logits(it->second);
    negative.push_back(std::move(file.stream));
  }
  if (data.negative_gaps.empty()) data.negative = std::move(negative);
  return data;
}

std::vector<cfcsp::PredictionRecord> predict_one(
    const VideoData& data, const cfcsp::StageSmoothing& smoothing,
    const cfcsp::LabelScheme& scheme) {
  try {
    return cfcsp::predict_video(data.coarse, data.negative, smoothing, scheme);
  } catch (const cfcsp::Error& e) {
    if (e.code() == cfcsp::errc::missing_negative_scores &&
        !data.negative_gaps.empty()) {
      std::string message = std::string(e.what()) + "; missing negative logits:";
      for (const std::string& gap : data.negative_gaps) message += " " + gap;
      cfcsp::raise(cfcsp::errc::missing_negative_scores, message);
    }
    throw;
  }
}

std::vector<std::string> resolve_models(const std::string& flag_csv,
                                        const std::vector<std::string>& config,
                                        const std::set<std::string>& seen) {
  if (!flag_csv.empty()) return split_models(flag_csv);
  if (!config.empty()) return config;
  return {seen.begin(), seen.end()};
}

void require_known(const std::vector<std::string>& models,
                   const std::set<std::string>& known, const char* stage) {
  for (const std::string& model : models) {
    if (!known.count(model)) {
      std::string list;
      for (const std::string& k : known) {
        if (!list.empty()) list += ", ";
        list += k;
      }
      throw UsageError("unknown " + std::string(stage) + " model '" + model +
                       "'; known models: " + (list.empty() ? "(none)" : list));
    }
  }
}

// ---------------------------------------------------------------------------
// gen-synth

struct GenArgs {
  std::string out;
  std::uint64_t seed = 7;
  unsigned videos = 3;
  unsigned frames = 300;
  std::string models = "m0";
  double noise_sigma = 1.0;
  double gain = 2.5;
  double decorrelation = 0.5;
  unsigned segment_min = 30;
  unsigned segment_max = 90;
  double fps = 30.0;
  std::string prior;
  double threshold_t = 0.1;
  std::string scheme_path;
};

int run_gen(const GenArgs& args) {
  const cfcsp::LabelScheme scheme = load_scheme_file(args.scheme_path);
  const std::vector<std::string> models = split_models(args.models);
  if (models.empty()) throw UsageError("--models must name at least one model");
  for (const std::string& model : models) check_model_name(model);

  cfcsp::SynthParams params;
  params.n_frames = args.frames;
  params.frame_rate = args.fps;
  params.segment_min = args.segment_min;
  params.segment_max = args.segment_max;
  params.logit_gain = args.gain;
  params.noise_sigma = args.noise_sigma;
  params.model_decorrelation = args.decorrelation;
  if (!args.prior.empty()) {
    std::vector<double> prior;
    for (const std::string& cell : cfcsp::detail::split_list(args.prior)) {
      try {
        std::size_t consumed = 0;
        const double value = std::stod(cell, &consumed);
        if (consumed != cell.size()) throw std::invalid_argument(cell);
        prior.push_back(value);
      } catch (const std::exception&) {
        throw UsageError("--prior: bad value '" + cell + "'");
      }
    }
    double total = 0.0;
    for (double p : prior) {
      if (p < 0.0) throw UsageError("--prior entries must be >= 0");
      total += p;
    }
    if (total <= 0.0) throw UsageError("--prior must have positive mass");
    for (double& p : prior) p /= total;
    params.class_prior = std::move(prior);
  }

  const fs::path out(args.out);
  const fs::path logits_dir = out / "logits";
  const fs::path annotations_dir = out / "annotations";
  const fs::path resample_dir = out / "resample";
  fs::create_directories(logits_dir);
  fs::create_directories(annotations_dir);
  fs::create_directories(resample_dir);

  for (unsigned v = 0; v < args.videos; ++v) {
    char id[32];
    std::snprintf(id, sizeof id, "video_%03u", v);
    cfcsp::SynthParams video_params = params;
    video_params.seed = args.seed ^ static_cast<std::uint64_t>(v);
    const cfcsp::SynthVideo video =
        cfcsp::gen_video(video_params, models, scheme, id);

    cfcsp::atomic_write(annotations_dir / (std::string(id) + ".txt"),
                        [&](const fs::path& tmp) {
                          cfcsp::write_annotations(tmp, video.truth, scheme);
                        });
    for (std::size_t m = 0; m < models.size(); ++m) {
      cfcsp::atomic_write(
          logits_dir / (std::string(id) + "__" + models[m] + "__coarse.cspl"),
          [&](const fs::path& tmp) {
            cfcsp::write_logits(tmp, video.coarse_streams[m],
                                cfcsp::Stage::Coarse);
          });
      cfcsp::atomic_write(
          logits_dir / (std::string(id) + "__" + models[m] + "__negative.cspl"),
          [&](const fs::path& tmp) {
            cfcsp::write_logits(tmp, video.negative_streams[m],
                                cfcsp::Stage::Negative);
          });
    }

    // Oversampled frame-index list for training-set construction downstream.
    const auto indices =
        cfcsp::resample_indices(video.truth, args.threshold_t,
                                video_params.seed);
    cfcsp::atomic_write(resample_dir / (std::string(id) + ".txt"),
                        [&](const fs::path& tmp) {
                          std::string bytes;
                          for (std::size_t idx : indices) {
                            bytes += std::to_string(idx);
                            bytes += '\n';
                          }
                          std::ofstream fout(tmp, std::ios::binary);
                          fout << bytes;
                        });
  }

  std::cout << "generated videos=" << args.videos << " frames=" << args.frames
            << " models=" << models.size() << " out=" << out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string config_path;
  std::string logits_dir;
  std::string out_dir;
  std::string coarse_models;
  std::string negative_models;
  int window = -1;  // < 0 = keep config windows
  unsigned jobs = 1;
  std::string scheme_path;
};

cfcsp::PipelineConfig load_pipeline_config(const std::string& path) {
  if (path.empty()) return cfcsp::PipelineConfig{};
  return cfcsp::PipelineConfig::parse(slurp_file(path), path);
}

int run_predict(const PredictArgs& args) {
  const cfcsp::LabelScheme scheme = load_scheme_file(args.scheme_path);
  cfcsp::PipelineConfig config = load_pipeline_config(args.config_path);
  if (args.window >= 0) {
    config.smoothing.coarse.window = static_cast<unsigned>(args.window);
    config.smoothing.negative.window = static_cast<unsigned>(args.window);
  }

  const CorpusIndex index = scan_logits(args.logits_dir);
  if (index.videos.empty()) {
    cfcsp::raise(cfcsp::errc::io,
                 "no logit files found in '" + args.logits_dir + "'");
  }
  const std::vector<std::string> coarse_models = resolve_models(
      args.coarse_models, config.coarse_models, index.coarse_models);
  const std::vector<std::string> negative_models = resolve_models(
      args.negative_models, config.negative_models, index.negative_models);
  if (coarse_models.empty()) {
    throw UsageError("no coarse models selected (empty coarse subset)");
  }
  require_known(coarse_models, index.coarse_models, "coarse");
  require_known(negative_models, index.negative_models, "negative");

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  std::vector<std::string> video_ids;
  video_ids.reserve(index.videos.size());
  for (const auto& [id, entry] : index.videos) video_ids.push_back(id);

  std::vector<std::size_t> frame_counts(video_ids.size(), 0);
  std::vector<std::size_t> negative_counts(video_ids.size(), 0);
  for_each_parallel(video_ids.size(), args.jobs, [&](std::size_t v) {
    const std::string& id = video_ids[v];
    const VideoData data = load_video_data(id, index.videos.at(id),
                                           coarse_models, negative_models);
    const auto records = predict_one(data, config.smoothing, scheme);
    frame_counts[v] = records.size();
    for (const auto& record : records) {
      if (record.decided_by == cfcsp::DecidedBy::NegativeNet) {
        ++negative_counts[v];
      }
    }
    cfcsp::atomic_write(out_dir / (id + ".txt"), [&](const fs::path& tmp) {
      cfcsp::write_predictions(tmp, records, scheme);
    });
  });

  std::size_t frames = 0, negatives = 0;
  for (std::size_t v = 0; v < video_ids.size(); ++v) {
    frames += frame_counts[v];
    negatives += negative_counts[v];
  }
  const double negative_fraction =
      frames > 0 ? static_cast<double>(negatives) / static_cast<double>(frames)
                 : 0.0;
  std::cout << "videos=" << video_ids.size() << " frames=" << frames
            << " coarse_direct=" << fixed4(1.0 - negative_fraction)
            << " negative_net=" << fixed4(negative_fraction) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string predictions_dir;
  std::string annotations_dir;
  std::string report_path;
  std::string scheme_path;
};

struct EvalTotals {
  cfcsp::ConfusionMatrix confusion{cfcsp::kFineCount};
  std::uint64_t flips = 0;
  std::uint64_t transitions = 0;
  std::size_t videos = 0;
  std::size_t frames = 0;

  double flip_rate() const {
    return transitions > 0
               ? static_cast<double>(flips) / static_cast<double>(transitions)
               : 0.0;
  }
};

void accumulate_video(EvalTotals& totals, std::span<const int> preds,
                      std::span<const int> truths, const std::string& video_id) {
  if (preds.size() != truths.size()) {
    cfcsp::raise(cfcsp::errc::alignment,
                 "video '" + video_id + "': " + std::to_string(preds.size()) +
                     " predictions vs " + std::to_string(truths.size()) +
                     " annotated frames");
  }
  totals.confusion.merge(cfcsp::confusion(preds, truths, cfcsp::kFineCount));
  for (std::size_t i = 1; i < preds.size(); ++i) {
    if (preds[i] != preds[i - 1]) ++totals.flips;
  }
  if (!preds.empty()) totals.transitions += preds.size() - 1;
  ++totals.videos;
  totals.frames += preds.size();
}

int run_eval(const EvalArgs& args) {
  const cfcsp::LabelScheme scheme = load_scheme_file(args.scheme_path);
  const fs::path pred_dir(args.predictions_dir);
  const fs::path ann_dir(args.annotations_dir);
  if (!fs::is_directory(pred_dir)) {
    cfcsp::raise(cfcsp::errc::io, "prediction directory '" + pred_dir.string() +
                                      "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    cfcsp::raise(cfcsp::errc::io, "no prediction files in '" +
                                      pred_dir.string() + "'");
  }

  EvalTotals totals;
  for (const fs::path& pred_path : files) {
    const std::string video_id = cfcsp::video_id_from_path(pred_path);
    const fs::path ann_path = ann_dir / (video_id + ".txt");
    if (!fs::exists(ann_path)) {
      cfcsp::raise(cfcsp::errc::io, "missing annotations for video '" +
                                        video_id + "' (expected '" +
                                        ann_path.string() + "')");
    }
    const std::vector<int> preds = cfcsp::read_predictions(pred_path, scheme);
    const std::vector<int> truths = cfcsp::read_annotations(ann_path, scheme);
    accumulate_video(totals, preds, truths, video_id);
  }

  const cfcsp::F1Report report = cfcsp::f1_report(totals.confusion);
  std::cout << "macro_f1=" << fixed4(report.macro_f1)
            << " flip_rate=" << fixed4(totals.flip_rate())
            << " videos=" << totals.videos << " frames=" << totals.frames
            << " scored_frames=" << totals.confusion.total() << "\n";
  if (!args.report_path.empty()) {
    cfcsp::atomic_write(fs::path(args.report_path), [&](const fs::path& tmp) {
      std::ofstream out(tmp, std::ios::binary);
      cfcsp::write_report_csv(out, report, scheme.fine_names(),
                              totals.confusion.total());
    });
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweeps

class SmoothedCache {
 public:
  std::shared_ptr<const cfcsp::VideoLogitStream> get(
      const std::string& video, const cfcsp::VideoLogitStream& raw,
      const char* stage, unsigned window) {
    const std::string key = video + '\x1f' + raw.model_id + '\x1f' + stage +
                            '\x1f' + std::to_string(window);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto smoothed = std::make_shared<cfcsp::VideoLogitStream>(
        cfcsp::smooth_batch(raw, {window}));
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, std::move(smoothed)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const cfcsp::VideoLogitStream>> cache_;
};

struct SweepVideo {
  VideoData data;
  std::vector<int> annotations;
};

struct SweepCorpus {
  std::vector<SweepVideo> videos;
  CorpusIndex index;
};

SweepCorpus load_sweep_corpus(const std::string& logits_dir,
                              const std::string& annotations_dir,
                              const std::vector<std::string>& coarse_models,
                              const std::vector<std::string>& negative_models,
                              const cfcsp::LabelScheme& scheme) {
  SweepCorpus corpus;
  corpus.index = scan_logits(logits_dir);
  const fs::path ann_dir(annotations_dir);
  for (const auto& [id, entry] : corpus.index.videos) {
    SweepVideo video;
    video.data = load_video_data(id, entry, coarse_models, negative_models);
    const fs::path ann_path = ann_dir / (id + ".txt");
    if (!fs::exists(ann_path)) {
      cfcsp::raise(cfcsp::errc::io,
                   "missing annotations for video '" + id + "'");
    }
    video.annotations = cfcsp::read_annotations(ann_path, scheme);
    corpus.videos.push_back(std::move(video));
  }
  if (corpus.videos.empty()) {
    cfcsp::raise(cfcsp::errc::io,
                 "no videos found in '" + logits_dir + "'");
  }
  return corpus;
}

std::vector<cfcsp::VideoLogitStream> select_streams(
    const std::vector<cfcsp::VideoLogitStream>& streams,
    const std::vector<std::string>& models) {
  std::vector<cfcsp::VideoLogitStream> subset;
  subset.reserve(models.size());
  for (const std::string& model : models) {
    for (const cfcsp::VideoLogitStream& stream : streams) {
      if (stream.model_id == model) {
        subset.push_back(stream);
        break;
      }
    }
  }
  return subset;
}

struct SettingResult {
  double macro_f1 = 0.0;
  double flip_rate = 0.0;
};

SettingResult run_setting(const SweepCorpus& corpus,
                          const std::vector<std::string>& coarse_subset,
                          const std::vector<std::string>& negative_subset,
                          const cfcsp::StageSmoothing& smoothing,
                          unsigned jobs, SmoothedCache* cache,
                          const cfcsp::LabelScheme& scheme) {
  const bool cached =
      cache != nullptr &&
      smoothing.placement == cfcsp::SmoothingPlacement::PreFusion;
  std::vector<EvalTotals> partials(corpus.videos.size());
  for_each_parallel(corpus.videos.size(), jobs, [&](std::size_t v) {
    const SweepVideo& video = corpus.videos[v];
    std::vector<cfcsp::PredictionRecord> records;
    if (cached) {
      // Smoothing depends only on (stream, window), so smoothed streams are
      // shared across settings; the pipeline then runs with window 0.
      std::vector<cfcsp::VideoLogitStream> coarse;
      for (const auto& stream :
           select_streams(video.data.coarse, coarse_subset)) {
        coarse.push_back(*cache->get(video.data.id, stream, "coarse",
                                     smoothing.coarse.window));
      }
      std::vector<cfcsp::VideoLogitStream> negative;
      for (const auto& stream :
           select_streams(video.data.negative, negative_subset)) {
        negative.push_back(*cache->get(video.data.id, stream, "negative",
                                       smoothing.negative.window));
      }
      VideoData presmoothed;
      presmoothed.id = video.data.id;
      presmoothed.coarse = std::move(coarse);
      presmoothed.negative = std::move(negative);
      presmoothed.negative_gaps = video.data.negative_gaps;
      records = predict_one(presmoothed, cfcsp::StageSmoothing{}, scheme);
    } else {
      VideoData subset;
      subset.id = video.data.id;
      subset.coarse = select_streams(video.data.coarse, coarse_subset);
      subset.negative = select_streams(video.data.negative, negative_subset);
      subset.negative_gaps = video.data.negative_gaps;
      records = predict_one(subset, smoothing, scheme);
    }
    std::vector<int> labels;
    labels.reserve(records.size());
    for (const auto& record : records) labels.push_back(record.label.index);
    accumulate_video(partials[v], labels, video.annotations, video.data.id);
  });

  EvalTotals totals;
  for (const EvalTotals& partial : partials) {
    totals.confusion.merge(partial.confusion);
    totals.flips += partial.flips;
    totals.transitions += partial.transitions;
  }
  return {cfcsp::f1_report(totals.confusion).macro_f1, totals.flip_rate()};
}

struct SweepWindowArgs {
  std::string windows_csv;
  std::string config_path;
  std::string logits_dir;
  std::string annotations_dir;
  std::string out_csv;
  std::string coarse_models;
  std::string negative_models;
  unsigned jobs = 1;
  bool no_cache = false;
  std::string scheme_path;
};

int run_sweep_window(const SweepWindowArgs& args) {
  const cfcsp::LabelScheme scheme = load_scheme_file(args.scheme_path);
  const cfcsp::PipelineConfig config = load_pipeline_config(args.config_path);

  std::vector<unsigned> windows;
  for (const std::string& cell : cfcsp::detail::split_list(args.windows_csv)) {
    try {
      std::size_t consumed = 0;
      const long w = std::stol(cell, &consumed);
      if (consumed != cell.size() || w < 0) throw std::invalid_argument(cell);
      windows.push_back(static_cast<unsigned>(w));
    } catch (const std::exception&) {
      throw UsageError("--windows: bad window value '" + cell + "'");
    }
  }
  if (windows.empty()) throw UsageError("--windows must list at least one w");
  std::sort(windows.begin(), windows.end());
  const auto last = std::unique(windows.begin(), windows.end());
  if (last != windows.end()) {
    std::cerr << "warning: duplicate window values ignored\n";
    windows.erase(last, windows.end());
  }

  const CorpusIndex probe = scan_logits(args.logits_dir);
  const std::vector<std::string> coarse_models = resolve_models(
      args.coarse_models, config.coarse_models, probe.coarse_models);
  const std::vector<std::string> negative_models = resolve_models(
      args.negative_models, config.negative_models, probe.negative_models);
  if (coarse_models.empty()) {
    throw UsageError("no coarse models selected (empty coarse subset)");
  }
  require_known(coarse_models, probe.coarse_models, "coarse");
  require_known(negative_models, probe.negative_models, "negative");

  const SweepCorpus corpus = load_sweep_corpus(
      args.logits_dir, args.annotations_dir, coarse_models, negative_models,
      scheme);

  SmoothedCache cache;
  std::string csv = "w,macro_f1,flip_rate\n";
  for (unsigned w : windows) {
    cfcsp::StageSmoothing smoothing = config.smoothing;
    smoothing.coarse.window = w;
    smoothing.negative.window = w;
    const SettingResult result =
        run_setting(corpus, coarse_models, negative_models, smoothing,
                    args.jobs, args.no_cache ? nullptr : &cache, scheme);
    csv += std::to_string(w) + "," + fixed4(result.macro_f1) + "," +
           fixed4(result.flip_rate) + "\n";
  }
  cfcsp::atomic_write(fs::path(args.out_csv), [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary);
    out << csv;
  });
  std::cout << "sweep-window rows=" << windows.size() << " out=" << args.out_csv
            << "\n";
  return kExitOk;
}

struct SweepEnsembleArgs {
  std::vector<std::string> coarse_sets;    // one comma list per occurrence
  std::vector<std::string> negative_sets;  // one comma list per occurrence
  std::string config_path;
  std::string logits_dir;
  std::string annotations_dir;
  std::string out_csv;
  int window = -1;
  unsigned jobs = 1;
  bool no_cache = false;
  std::string scheme_path;
};

std::string join_models(const std::vector<std::string>& models) {
  std::string out;
  for (const std::string& model : models) {
    if (!out.empty()) out += '+';
    out += model;
  }
  return out;
}

int run_sweep_ensemble(const SweepEnsembleArgs& args) {
  const cfcsp::LabelScheme scheme = load_scheme_file(args.scheme_path);
  const cfcsp::PipelineConfig config = load_pipeline_config(args.config_path);
  cfcsp::StageSmoothing smoothing = config.smoothing;
  if (args.window >= 0) {
    smoothing.coarse.window = static_cast<unsigned>(args.window);
    smoothing.negative.window = static_cast<unsigned>(args.window);
  }

  const CorpusIndex probe = scan_logits(args.logits_dir);

  std::vector<std::vector<std::string>> coarse_subsets;
  for (const std::string& csv : args.coarse_sets) {
    coarse_subsets.push_back(split_models(csv));
  }
  if (coarse_subsets.empty()) {
    // Default: each available coarse model alone, plus the full ensemble.
    for (const std::string& model : probe.coarse_models) {
      coarse_subsets.push_back({model});
    }
    if (probe.coarse_models.size() > 1) {
      coarse_subsets.emplace_back(probe.coarse_models.begin(),
                                  probe.coarse_models.end());
    }
  }
  std::vector<std::vector<std::string>> negative_subsets;
  for (const std::string& csv : args.negative_sets) {
    negative_subsets.push_back(split_models(csv));
  }
  if (negative_subsets.empty()) {
    negative_subsets.emplace_back(probe.negative_models.begin(),
                                  probe.negative_models.end());
  }

  std::set<std::string> coarse_union_set, negative_union_set;
  for (const auto& subset : coarse_subsets) {
    if (subset.empty()) throw UsageError("empty coarse subset");
    require_known(subset, probe.coarse_models, "coarse");
    coarse_union_set.insert(subset.begin(), subset.end());
  }
  for (const auto& subset : negative_subsets) {
    require_known(subset, probe.negative_models, "negative");
    negative_union_set.insert(subset.begin(), subset.end());
  }
  const std::vector<std::string> coarse_union(coarse_union_set.begin(),
                                              coarse_union_set.end());
  const std::vector<std::string> negative_union(negative_union_set.begin(),
                                                negative_union_set.end());

  const SweepCorpus corpus = load_sweep_corpus(
      args.logits_dir, args.annotations_dir, coarse_union, negative_union,
      scheme);

  SmoothedCache cache;
  std::string csv = "coarse_models,negative_models,macro_f1\n";
  std::size_t rows = 0;
  for (const auto& coarse_subset : coarse_subsets) {
    for (const auto& negative_subset : negative_subsets) {
      const SettingResult result =
          run_setting(corpus, coarse_subset, negative_subset, smoothing,
                      args.jobs, args.no_cache ? nullptr : &cache, scheme);
      std::vector<std::string> coarse_sorted = coarse_subset;
      std::vector<std::string> negative_sorted = negative_subset;
      std::sort(coarse_sorted.begin(), coarse_sorted.end());
      std::sort(negative_sorted.begin(), negative_sorted.end());
      csv += join_models(coarse_sorted) + "," + join_models(negative_sorted) +
             "," + fixed4(result.macro_f1) + "\n";
      ++rows;
    }
  }
  cfcsp::atomic_write(fs::path(args.out_csv), [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary);
    out << csv;
  });
  std::cout << "sweep-ensemble rows=" << rows << " out=" << args.out_csv
            << "\n";
  return kExitOk;
}

int map_error_exit(const cfcsp::Error& e) {
  switch (e.code()) {
    case cfcsp::errc::unknown_model:
      return kExitUsage;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-to-fine cascade pipeline with temporal smoothing"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-synth", "Generate a synthetic corpus");
  gen_cmd->add_option("--out", gen.out, "Output corpus directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Base seed; video v uses seed^v");
  gen_cmd->add_option("--videos", gen.videos, "Video count")
      ->check(CLI::Range(1u, 100000u));
  gen_cmd->add_option("--frames", gen.frames, "Frames per video")
      ->check(CLI::Range(1u, 10000000u));
  gen_cmd->add_option("--models", gen.models, "Comma-separated model ids");
  gen_cmd->add_option("--noise-sigma", gen.noise_sigma, "Per-frame noise std")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--gain", gen.gain, "Signal strength at the true class");
  gen_cmd->add_option("--decorrelation", gen.decorrelation,
                      "0 = models err identically, 1 = independently")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--segment-min", gen.segment_min,
                      "Shortest truth segment (frames)")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--segment-max", gen.segment_max,
                      "Longest truth segment (frames)")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--fps", gen.fps, "Frame-rate hint")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--prior", gen.prior,
                      "Comma-separated class prior (8 values; normalized)");
  gen_cmd->add_option("--threshold-t", gen.threshold_t,
                      "Oversampling frequency threshold in (0, 1]")
      ->check(CLI::Range(1e-9, 1.0));
  gen_cmd->add_option("--scheme", gen.scheme_path, "Label scheme config file");

  PredictArgs predict;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Run the cascade over a logit corpus");
  predict_cmd->add_option("--config", predict.config_path,
                          "Pipeline config file");
  predict_cmd->add_option("--logits", predict.logits_dir, "Logit directory")
      ->required();
  predict_cmd->add_option("--out", predict.out_dir, "Prediction directory")
      ->required();
  predict_cmd->add_option("--coarse-models", predict.coarse_models,
                          "Override coarse model list (comma-separated)");
  predict_cmd->add_option("--negative-models", predict.negative_models,
                          "Override negative model list (comma-separated)");
  predict_cmd->add_option("--window", predict.window,
                          "Override both smoothing windows")
      ->check(CLI::Range(0, 1 << 20));
  predict_cmd->add_option("--jobs", predict.jobs, "Videos processed in parallel")
      ->check(CLI::Range(1u, 512u));
  predict_cmd->add_option("--scheme", predict.scheme_path,
                          "Label scheme config file");

  EvalArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score predictions against annotations");
  eval_cmd->add_option("--predictions", eval.predictions_dir,
                       "Prediction directory")
      ->required();
  eval_cmd
      ->add_option("--annotations", eval.annotations_dir,
                   "Annotation directory")
      ->required();
  eval_cmd->add_option("--report", eval.report_path,
                       "Write the per-class CSV report here");
  eval_cmd->add_option("--scheme", eval.scheme_path, "Label scheme config file");

  SweepWindowArgs sweep_window;
  CLI::App* sweep_window_cmd = app.add_subcommand(
      "sweep-window", "Evaluate a list of smoothing windows");
  sweep_window_cmd
      ->add_option("--windows", sweep_window.windows_csv,
                   "Comma-separated window sizes (w)")
      ->required();
  sweep_window_cmd->add_option("--config", sweep_window.config_path,
                               "Pipeline config file");
  sweep_window_cmd
      ->add_option("--logits", sweep_window.logits_dir, "Logit directory")
      ->required();
  sweep_window_cmd
      ->add_option("--annotations", sweep_window.annotations_dir,
                   "Annotation directory")
      ->required();
  sweep_window_cmd->add_option("--out", sweep_window.out_csv, "Output CSV path")
      ->required();
  sweep_window_cmd->add_option("--coarse-models", sweep_window.coarse_models,
                               "Coarse model list (comma-separated)");
  sweep_window_cmd->add_option("--negative-models",
                               sweep_window.negative_models,
                               "Negative model list (comma-separated)");
  sweep_window_cmd->add_option("--jobs", sweep_window.jobs, "Parallel videos")
      ->check(CLI::Range(1u, 512u));
  sweep_window_cmd->add_flag("--no-cache", sweep_window.no_cache,
                             "Disable the smoothed-stream cache");
  sweep_window_cmd->add_option("--scheme", sweep_window.scheme_path,
                               "Label scheme config file");

  SweepEnsembleArgs sweep_ensemble;
  CLI::App* sweep_ensemble_cmd = app.add_subcommand(
      "sweep-ensemble", "Evaluate model subsets per stage");
  sweep_ensemble_cmd->add_option(
      "--coarse-models", sweep_ensemble.coarse_sets,
      "One subset per occurrence, e.g. --coarse-models a,b --coarse-models a");
  sweep_ensemble_cmd->add_option("--negative-models",
                                 sweep_ensemble.negative_sets,
                                 "One subset per occurrence");
  sweep_ensemble_cmd->add_option("--config", sweep_ensemble.config_path,
                                 "Pipeline config file");
  sweep_ensemble_cmd
      ->add_option("--logits", sweep_ensemble.logits_dir, "Logit directory")
      ->required();
  sweep_ensemble_cmd
      ->add_option("--annotations", sweep_ensemble.annotations_dir,
                   "Annotation directory")
      ->required();
  sweep_ensemble_cmd
      ->add_option("--out", sweep_ensemble.out_csv, "Output CSV path")
      ->required();
  sweep_ensemble_cmd->add_option("--window", sweep_ensemble.window,
                                 "Override both smoothing windows")
      ->check(CLI::Range(0, 1 << 20));
  sweep_ensemble_cmd
      ->add_option("--jobs", sweep_ensemble.jobs, "Parallel videos")
      ->check(CLI::Range(1u, 512u));
  sweep_ensemble_cmd->add_flag("--no-cache", sweep_ensemble.no_cache,
                               "Disable the smoothed-stream cache");
  sweep_ensemble_cmd->add_option("--scheme", sweep_ensemble.scheme_path,
                                 "Label scheme config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (predict_cmd->parsed()) return run_predict(predict);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (sweep_window_cmd->parsed()) return run_sweep_window(sweep_window);
    if (sweep_ensemble_cmd->parsed()) return run_sweep_ensemble(sweep_ensemble);
    std::cerr << "error: no subcommand selected\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cfcsp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return map_error_exit(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
