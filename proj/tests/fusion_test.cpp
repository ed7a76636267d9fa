#include "cfcsp/fusion.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cfcsp/prng.hpp"
#include "support/oracles.hpp"

using cfcsp::Error;
using cfcsp::errc;
using cfcsp::FusedScores;
using cfcsp::LogitFrame;
using cfcsp::SplitMix64;

namespace {

std::vector<LogitFrame> frames_for(
    const std::vector<std::pair<std::string, std::vector<double>>>& models) {
  std::vector<LogitFrame> frames;
  for (const auto& [model, logits] : models) {
    frames.push_back({"vid", 0, model, logits});
  }
  return frames;
}

TEST(Softmax, UniformInputsGiveUniformOutput) {
  const std::vector<double> probs = cfcsp::softmax(std::vector<double>{0, 0, 0, 0});
  for (double p : probs) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Softmax, TwoToOneSplit) {
  const std::vector<double> probs =
      cfcsp::softmax(std::vector<double>{std::log(2.0), 0.0});
  EXPECT_NEAR(probs[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(probs[1], 1.0 / 3.0, 1e-12);
}

TEST(Softmax, ExtremeLogitsDoNotOverflow) {
  const std::vector<double> input{1000.0, 0.0};
  const std::vector<double> probs = cfcsp::softmax(input);
  const std::vector<double> expected = oracle::softmax(input);
  EXPECT_NEAR(probs[0], expected[0], 1e-12);
  EXPECT_NEAR(probs[1], expected[1], 1e-12);
  EXPECT_NEAR(probs[0], 1.0, 1e-12);
  EXPECT_NEAR(probs[1], 0.0, 1e-12);
}

TEST(Softmax, SumsToOne) {
  SplitMix64 rng(21);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> logits(2 + rng.below(7));
    for (double& v : logits) v = 40.0 * (rng.uniform01() - 0.5);
    const std::vector<double> probs = cfcsp::softmax(logits);
    double total = 0.0;
    for (double p : probs) {
      EXPECT_GT(p, 0.0);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Softmax, RejectsNonFiniteInput) {
  EXPECT_THROW(cfcsp::softmax(std::vector<double>{1.0, std::nan("")}), Error);
  EXPECT_THROW(
      cfcsp::softmax(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}),
      Error);
  EXPECT_THROW(cfcsp::softmax(std::vector<double>{}), Error);
}

TEST(Fuse, SingleModelEqualsItsSoftmax) {
  const std::vector<double> logits{0.3, -1.2, 2.0};
  const FusedScores fused = cfcsp::fuse(frames_for({{"m0", logits}}));
  const std::vector<double> probs = cfcsp::softmax(logits);
  ASSERT_EQ(fused.scores.size(), probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    EXPECT_DOUBLE_EQ(fused.scores[i], probs[i]);
  }
  EXPECT_EQ(fused.contributing_models, std::vector<std::string>{"m0"});
}

TEST(Fuse, TwoModelsSumPerClass) {
  // softmax([ln .6, ln .4]) = [.6, .4]; softmax([ln .3, ln .7]) = [.3, .7]
  const std::vector<double> a{std::log(0.6), std::log(0.4)};
  const std::vector<double> b{std::log(0.3), std::log(0.7)};
  const FusedScores fused = cfcsp::fuse(frames_for({{"a", a}, {"b", b}}));
  EXPECT_NEAR(fused.scores[0], 0.9, 1e-12);
  EXPECT_NEAR(fused.scores[1], 1.1, 1e-12);
  const std::vector<double> expected = oracle::fuse({a, b});
  EXPECT_NEAR(fused.scores[0], expected[0], 1e-12);
  EXPECT_NEAR(fused.scores[1], expected[1], 1e-12);
}

TEST(Fuse, IdenticalModelsScaleWithoutMovingArgmax) {
  const std::vector<double> logits{0.1, 1.4, -0.3, 0.8};
  const std::vector<double> single = cfcsp::softmax(logits);
  const FusedScores fused = cfcsp::fuse(
      frames_for({{"m0", logits}, {"m1", logits}, {"m2", logits}}));
  for (std::size_t i = 0; i < single.size(); ++i) {
    EXPECT_NEAR(fused.scores[i], 3.0 * single[i], 1e-12);
  }
  EXPECT_EQ(cfcsp::decide(fused), oracle::argmax(single));
}

TEST(Fuse, ErrorPaths) {
  EXPECT_THROW(cfcsp::fuse(std::vector<LogitFrame>{}), Error);
  try {
    cfcsp::fuse(std::vector<LogitFrame>{});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::no_models);
  }
  // mismatched class counts
  try {
    cfcsp::fuse(frames_for({{"a", {0.0, 1.0}}, {"b", {0.0, 1.0, 2.0}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::shape_mismatch);
  }
  // mismatched frame coordinates
  std::vector<LogitFrame> frames = frames_for({{"a", {0.0, 1.0}}});
  frames.push_back({"vid", 1, "b", {0.0, 1.0}});
  try {
    cfcsp::fuse(frames);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::alignment);
  }
}

TEST(Fuse, PermutationInvarianceIsExact) {
  SplitMix64 rng(1234);
  for (int round = 0; round < 300; ++round) {
    const std::size_t k = 2 + rng.below(7);
    const std::size_t m = 2 + rng.below(4);
    std::vector<std::pair<std::string, std::vector<double>>> models;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> logits(k);
      for (double& v : logits) v = 8.0 * (rng.uniform01() - 0.5);
      models.emplace_back("model_" + std::to_string(i), std::move(logits));
    }
    const FusedScores forward = cfcsp::fuse(frames_for(models));
    std::vector<std::pair<std::string, std::vector<double>>> shuffled = models;
    rng.shuffle(shuffled);
    const FusedScores permuted = cfcsp::fuse(frames_for(shuffled));
    EXPECT_EQ(forward.scores, permuted.scores);  // bitwise
    EXPECT_EQ(forward.contributing_models, permuted.contributing_models);
  }
}

TEST(Fuse, ScoreTotalEqualsModelCount) {
  SplitMix64 rng(77);
  for (int round = 0; round < 300; ++round) {
    const std::size_t k = 2 + rng.below(7);
    const std::size_t m = 1 + rng.below(5);
    std::vector<std::pair<std::string, std::vector<double>>> models;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> logits(k);
      for (double& v : logits) v = 20.0 * (rng.uniform01() - 0.5);
      models.emplace_back("m" + std::to_string(i), std::move(logits));
    }
    const FusedScores fused = cfcsp::fuse(frames_for(models));
    double total = 0.0;
    for (double s : fused.scores) {
      EXPECT_GT(s, 0.0);
      EXPECT_LT(s, static_cast<double>(m));
      total += s;
    }
    EXPECT_NEAR(total, static_cast<double>(m), 1e-9);
  }
}

TEST(Softmax, ShiftInvariance) {
  SplitMix64 rng(99);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> logits(2 + rng.below(7));
    for (double& v : logits) v = 10.0 * (rng.uniform01() - 0.5);
    const double shift = 100.0 * (rng.uniform01() - 0.5);
    std::vector<double> shifted = logits;
    for (double& v : shifted) v += shift;
    const std::vector<double> base = cfcsp::softmax(logits);
    const std::vector<double> moved = cfcsp::softmax(shifted);
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_NEAR(base[i], moved[i], 1e-12);
    }
  }
}

TEST(Decide, ExamplesAndTieBreak) {
  EXPECT_EQ(cfcsp::decide(std::vector<double>{0.9, 1.1}), 1u);
  EXPECT_EQ(cfcsp::decide(std::vector<double>{1.0, 1.0}), 0u);  // lowest index
  EXPECT_EQ(cfcsp::decide(std::vector<double>{0.2, 0.5, 0.3}), 1u);
  EXPECT_EQ(cfcsp::decide(std::vector<double>{0.2, 0.5, 0.3}),
            oracle::argmax(std::vector<double>{0.2, 0.5, 0.3}));
}

TEST(Decide, PositiveScalingInvariance) {
  SplitMix64 rng(5);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> scores(2 + rng.below(7));
    for (double& v : scores) v = rng.uniform01() * 3.0;
    const std::size_t base = cfcsp::decide(scores);
    for (double scale : {0.25, 2.0, 1024.0, 3.0}) {
      std::vector<double> scaled = scores;
      for (double& v : scaled) v *= scale;
      EXPECT_EQ(cfcsp::decide(scaled), base);
    }
  }
}

TEST(Decide, Errors) {
  EXPECT_THROW(cfcsp::decide(std::vector<double>{}), Error);
  EXPECT_THROW(cfcsp::decide(std::vector<double>{1.0, std::nan("")}), Error);
}

}  // namespace
