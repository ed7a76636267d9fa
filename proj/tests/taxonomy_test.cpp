#include "cfcsp/taxonomy.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <string>

using cfcsp::CoarseLabel;
using cfcsp::Error;
using cfcsp::errc;
using cfcsp::FineLabel;
using cfcsp::LabelScheme;
using cfcsp::NegativeLabel;

namespace {

void expect_error(const std::function<void()>& fn, errc code) {
  try {
    fn();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(Taxonomy, CanonicalSchemeShape) {
  const LabelScheme& scheme = LabelScheme::canonical();
  ASSERT_EQ(scheme.fine_names().size(), 8u);
  ASSERT_EQ(scheme.coarse_names().size(), 5u);
  ASSERT_EQ(scheme.negative_names().size(), 4u);
  EXPECT_EQ(scheme.fine_names()[0], "Neutral");
  EXPECT_EQ(scheme.fine_names()[7], "Other");
  EXPECT_EQ(scheme.coarse_name(scheme.negative_class()), "Negative");
}

TEST(Taxonomy, ToCoarseGroupsTheFourNegatives) {
  const LabelScheme& scheme = LabelScheme::canonical();
  EXPECT_EQ(scheme.to_coarse(scheme.fine_by_name("Anger")),
            scheme.negative_class());
  EXPECT_EQ(scheme.to_coarse(scheme.fine_by_name("Disgust")),
            scheme.negative_class());
  EXPECT_EQ(scheme.to_coarse(scheme.fine_by_name("Fear")),
            scheme.negative_class());
  EXPECT_EQ(scheme.to_coarse(scheme.fine_by_name("Sadness")),
            scheme.negative_class());
  // Non-grouped labels keep their name.
  EXPECT_EQ(scheme.coarse_name(scheme.to_coarse(scheme.fine_by_name("Happiness"))),
            "Happiness");
  EXPECT_EQ(scheme.coarse_name(scheme.to_coarse(scheme.fine_by_name("Other"))),
            "Other");
}

TEST(Taxonomy, FromNegativePreservesNames) {
  const LabelScheme& scheme = LabelScheme::canonical();
  EXPECT_EQ(scheme.from_negative(NegativeLabel{2}), (FineLabel{3}));  // Fear
  EXPECT_EQ(scheme.from_negative(NegativeLabel{0}), (FineLabel{1}));  // Anger
  EXPECT_EQ(scheme.from_negative(NegativeLabel{3}), (FineLabel{5}));  // Sadness
}

TEST(Taxonomy, RoundTripAndXorProperties) {
  const LabelScheme& scheme = LabelScheme::canonical();
  for (int n = 0; n < 4; ++n) {
    EXPECT_EQ(scheme.to_coarse(scheme.from_negative(NegativeLabel{n})),
              scheme.negative_class());
  }
  // Every fine label either groups to Negative or keeps its name, never both.
  for (int f = 0; f < 8; ++f) {
    const CoarseLabel coarse = scheme.to_coarse(FineLabel{f});
    const bool grouped = coarse == scheme.negative_class();
    const bool same_name =
        scheme.coarse_name(coarse) == scheme.fine_name(FineLabel{f});
    EXPECT_NE(grouped, same_name) << "fine index " << f;
  }
}

TEST(Taxonomy, InvalidIndicesRaise) {
  const LabelScheme& scheme = LabelScheme::canonical();
  expect_error([&] { scheme.to_coarse(FineLabel{8}); }, errc::invalid_label);
  expect_error([&] { scheme.to_coarse(FineLabel{-1}); }, errc::invalid_label);
  expect_error([&] { scheme.from_negative(NegativeLabel{4}); },
               errc::invalid_label);
  expect_error([&] { scheme.direct_fine(scheme.negative_class()); },
               errc::invalid_label);
  expect_error([&] { scheme.fine_by_name("Boredom"); }, errc::invalid_label);
}

TEST(Taxonomy, ParseDefaultRequests) {
  const LabelScheme a = LabelScheme::parse("");
  const LabelScheme b = LabelScheme::parse("default");
  const LabelScheme c = LabelScheme::parse("  DEFAULT \n");
  EXPECT_EQ(a.fine_names(), LabelScheme::canonical().fine_names());
  EXPECT_EQ(b.coarse_names(), LabelScheme::canonical().coarse_names());
  EXPECT_EQ(c.negative_names(), LabelScheme::canonical().negative_names());
}

TEST(Taxonomy, ParseExplicitConfigCaseInsensitive) {
  const std::string config =
      "fine = neutral, anger, disgust, fear, happiness, sadness, surprise, "
      "other\n"
      "coarse = neutral, negative, happiness, surprise, other\n"
      "negative = ANGER, DISGUST, FEAR, SADNESS\n"
      "negative_group = anger, disgust, fear, sadness\n";
  const LabelScheme scheme = LabelScheme::parse(config);
  // Names are stored with the fine list's spelling.
  EXPECT_EQ(scheme.negative_names()[0], "anger");
  EXPECT_EQ(scheme.to_coarse(scheme.fine_by_name("Fear")),
            scheme.negative_class());
}

TEST(Taxonomy, ParseSupportsReindexedSchemes) {
  // Same labels, different index assignment: no code change needed.
  const std::string config =
      "fine = Other, Surprise, Sadness, Happiness, Fear, Disgust, Anger, "
      "Neutral\n"
      "coarse = Grim, Other, Surprise, Happiness, Neutral\n"
      "negative = Sadness, Fear, Disgust, Anger\n"
      "negative_group = Anger, Disgust, Fear, Sadness\n";
  const LabelScheme scheme = LabelScheme::parse(config);
  EXPECT_EQ(scheme.coarse_name(scheme.negative_class()), "Grim");
  EXPECT_EQ(scheme.to_coarse(FineLabel{2}), scheme.negative_class());  // Sadness
  EXPECT_EQ(scheme.from_negative(NegativeLabel{0}), (FineLabel{2}));
  EXPECT_EQ(scheme.coarse_name(scheme.to_coarse(FineLabel{7})), "Neutral");
}

TEST(Taxonomy, ValidationCardinality) {
  const std::string config =
      "fine = Neutral, Anger, Disgust, Fear, Happiness, Sadness, Surprise, "
      "Other\n"
      "coarse = Neutral, Negative, Happiness, Surprise, Other\n"
      "negative = Anger, Disgust, Fear\n";  // Sadness missing
  expect_error([&] { LabelScheme::parse(config); }, errc::scheme_validation);
}

TEST(Taxonomy, ValidationDuplicateFineName) {
  const std::string config =
      "fine = Neutral, Anger, Anger, Fear, Happiness, Sadness, Surprise, "
      "Other\n"
      "coarse = Neutral, Negative, Happiness, Surprise, Other\n"
      "negative = Anger, Disgust, Fear, Sadness\n";
  expect_error([&] { LabelScheme::parse(config); }, errc::scheme_validation);
}

TEST(Taxonomy, ValidationPreimageMismatch) {
  const std::string config =
      "fine = Neutral, Anger, Disgust, Fear, Happiness, Sadness, Surprise, "
      "Other\n"
      "coarse = Neutral, Negative, Happiness, Surprise, Other\n"
      "negative = Anger, Disgust, Fear, Sadness\n"
      "negative_group = Anger, Disgust, Fear, Surprise\n";
  expect_error([&] { LabelScheme::parse(config); }, errc::scheme_validation);
}

TEST(Taxonomy, ValidationGroupedLabelInCoarseList) {
  const std::string config =
      "fine = Neutral, Anger, Disgust, Fear, Happiness, Sadness, Surprise, "
      "Other\n"
      "coarse = Neutral, Anger, Happiness, Surprise, Other\n"
      "negative = Anger, Disgust, Fear, Sadness\n";
  expect_error([&] { LabelScheme::parse(config); }, errc::scheme_validation);
}

TEST(Taxonomy, ValidationUnknownKey) {
  expect_error([&] { LabelScheme::parse("files = x\n"); },
               errc::scheme_validation);
}

}  // namespace
