#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cfcsp/detail/kv.hpp"
#include "cfcsp/error.hpp"

namespace cfcsp {

inline constexpr std::size_t kFineCount = 8;
inline constexpr std::size_t kCoarseCount = 5;
inline constexpr std::size_t kNegativeCount = 4;

/// Index into the fine (8-way) label space of a scheme.
struct FineLabel {
  int index = -1;
  friend bool operator==(const FineLabel&, const FineLabel&) = default;
};

/// Index into the coarse (5-way) label space.
struct CoarseLabel {
  int index = -1;
  friend bool operator==(const CoarseLabel&, const CoarseLabel&) = default;
};

/// Index into the negative (4-way) label space.
struct NegativeLabel {
  int index = -1;
  friend bool operator==(const NegativeLabel&, const NegativeLabel&) = default;
};

/// The three label spaces and the grouping maps between them.
///
/// The coarse space merges four hard-to-separate fine labels into a single
/// grouped class; the negative space re-expands that class. A scheme is
/// immutable after construction and safe to share across threads. All
/// structural invariants (cardinalities, bijections, round trips) are
/// enforced up front, so downstream code can index without checks.
class LabelScheme {
 public:
  /// Default scheme: fine indices Neutral=0, Anger=1, Disgust=2, Fear=3,
  /// Happiness=4, Sadness=5, Surprise=6, Other=7; the grouped coarse class
  /// is Negative = {Anger, Disgust, Fear, Sadness}.
  static const LabelScheme& canonical() {
    static const LabelScheme scheme(
        {"Neutral", "Anger", "Disgust", "Fear", "Happiness", "Sadness",
         "Surprise", "Other"},
        {"Neutral", "Negative", "Happiness", "Surprise", "Other"},
        {"Anger", "Disgust", "Fear", "Sadness"},
        {"Anger", "Disgust", "Fear", "Sadness"});
    return scheme;
  }

  /// Builds a scheme from a key/value config. Keys: `fine`, `coarse`,
  /// `negative` (ordered, comma-separated name lists) and optionally
  /// `negative_group` (defaults to the `negative` list). Empty text or the
  /// word "default" yields the canonical scheme. Names are matched
  /// case-insensitively and stored with the spelling of the `fine` list.
  static LabelScheme parse(std::string_view config_text,
                           const std::string& origin = "<scheme config>") {
    const std::string_view trimmed = detail::trim(config_text);
    if (trimmed.empty() || detail::iequals(trimmed, "default")) {
      return canonical();
    }
    std::vector<std::string> fine, coarse, negative, group;
    bool have_fine = false, have_coarse = false, have_negative = false,
         have_group = false;
    for (const auto& [key, value] : detail::parse_kv(config_text, origin)) {
      if (key == "fine") {
        fine = detail::split_list(value);
        have_fine = true;
      } else if (key == "coarse") {
        coarse = detail::split_list(value);
        have_coarse = true;
      } else if (key == "negative") {
        negative = detail::split_list(value);
        have_negative = true;
      } else if (key == "negative_group") {
        group = detail::split_list(value);
        have_group = true;
      } else {
        raise(errc::scheme_validation, "unknown scheme key '" + key + "'");
      }
    }
    if (!have_fine || !have_coarse || !have_negative) {
      raise(errc::scheme_validation,
            "scheme config must declare 'fine', 'coarse' and 'negative'");
    }
    if (!have_group) group = negative;
    return LabelScheme(std::move(fine), std::move(coarse), std::move(negative),
                       std::move(group));
  }

  const std::vector<std::string>& fine_names() const { return fine_names_; }
  const std::vector<std::string>& coarse_names() const { return coarse_names_; }
  const std::vector<std::string>& negative_names() const {
    return negative_names_;
  }

  const std::string& fine_name(FineLabel l) const {
    return fine_names_[checked(l.index, kFineCount, "fine")];
  }
  const std::string& coarse_name(CoarseLabel l) const {
    return coarse_names_[checked(l.index, kCoarseCount, "coarse")];
  }
  const std::string& negative_name(NegativeLabel l) const {
    return negative_names_[checked(l.index, kNegativeCount, "negative")];
  }

  /// The grouped coarse class.
  CoarseLabel negative_class() const { return {negative_coarse_}; }

  /// Maps a fine label onto the coarse space: grouped labels land on
  /// negative_class(), every other label keeps its name.
  CoarseLabel to_coarse(FineLabel l) const {
    return {fine_to_coarse_[checked(l.index, kFineCount, "fine")]};
  }

  /// Maps a negative label back to the fine label with the same name.
  FineLabel from_negative(NegativeLabel l) const {
    return {negative_to_fine_[checked(l.index, kNegativeCount, "negative")]};
  }

  bool is_negative_group(FineLabel l) const {
    return to_coarse(l) == negative_class();
  }

  /// Fine label carrying the same name as a non-grouped coarse label.
  /// Raises for the grouped class, which has no single fine counterpart.
  FineLabel direct_fine(CoarseLabel l) const {
    const int fine = coarse_to_fine_[checked(l.index, kCoarseCount, "coarse")];
    if (fine < 0) {
      raise(errc::invalid_label,
            "coarse label '" + coarse_names_[static_cast<std::size_t>(l.index)] +
                "' is the grouped class and maps to no single fine label");
    }
    return {fine};
  }

  /// Case-insensitive name lookup in the fine space.
  FineLabel fine_by_name(std::string_view name) const {
    for (std::size_t i = 0; i < fine_names_.size(); ++i) {
      if (detail::iequals(fine_names_[i], name)) return {static_cast<int>(i)};
    }
    raise(errc::invalid_label, "unknown fine label '" + std::string(name) + "'");
  }

 private:
  LabelScheme(std::vector<std::string> fine, std::vector<std::string> coarse,
              std::vector<std::string> negative, std::vector<std::string> group)
      : fine_names_(std::move(fine)),
        coarse_names_(std::move(coarse)),
        negative_names_(std::move(negative)) {
    require_names(fine_names_, kFineCount, "fine");
    require_names(coarse_names_, kCoarseCount, "coarse");
    require_names(negative_names_, kNegativeCount, "negative");
    if (group.size() != kNegativeCount) {
      raise(errc::scheme_validation,
            "negative_group must list exactly 4 fine labels, found " +
                std::to_string(group.size()));
    }

    // Preimage of the grouped class must equal the negative list: both are
    // resolved against the fine list, then compared as sets.
    std::vector<int> group_fine = resolve_fine(group, "negative_group");
    std::vector<int> negative_fine = resolve_fine(negative_names_, "negative");
    for (int g : group_fine) {
      bool found = false;
      for (int n : negative_fine) found = found || n == g;
      if (!found) {
        raise(errc::scheme_validation,
              "preimage-of-Negative mismatch: negative_group contains '" +
                  fine_names_[static_cast<std::size_t>(g)] +
                  "' which is absent from the negative list");
      }
    }
    // Same cardinality + injectivity, so set inclusion implies equality.

    // Canonicalize negative spellings to the fine list and build the
    // negative -> fine map (injective by the distinctness check above).
    for (std::size_t i = 0; i < kNegativeCount; ++i) {
      negative_to_fine_[i] = negative_fine[i];
      negative_names_[i] =
          fine_names_[static_cast<std::size_t>(negative_fine[i])];
    }

    // The grouped coarse class is the unique coarse name that is not a fine
    // name; the rest must be exactly the non-grouped fine labels.
    negative_coarse_ = -1;
    for (std::size_t c = 0; c < kCoarseCount; ++c) {
      int fine_idx = -1;
      for (std::size_t f = 0; f < kFineCount; ++f) {
        if (detail::iequals(coarse_names_[c], fine_names_[f])) {
          fine_idx = static_cast<int>(f);
          break;
        }
      }
      if (fine_idx < 0) {
        if (negative_coarse_ >= 0) {
          raise(errc::scheme_validation,
                "coarse list has more than one grouping class ('" +
                    coarse_names_[static_cast<std::size_t>(negative_coarse_)] +
                    "' and '" + coarse_names_[c] + "')");
        }
        negative_coarse_ = static_cast<int>(c);
        coarse_to_fine_[c] = -1;
        continue;
      }
      bool grouped = false;
      for (int g : group_fine) grouped = grouped || g == fine_idx;
      if (grouped) {
        raise(errc::scheme_validation,
              "coarse list may not contain grouped fine label '" +
                  coarse_names_[c] + "'");
      }
      coarse_to_fine_[c] = fine_idx;
      coarse_names_[c] = fine_names_[static_cast<std::size_t>(fine_idx)];
    }
    if (negative_coarse_ < 0) {
      raise(errc::scheme_validation,
            "coarse list must contain exactly one grouping class that is not "
            "a fine label");
    }

    // fine -> coarse: grouped labels to the grouping class, the rest by name.
    for (std::size_t f = 0; f < kFineCount; ++f) {
      bool grouped = false;
      for (int g : group_fine) grouped = grouped || g == static_cast<int>(f);
      if (grouped) {
        fine_to_coarse_[f] = negative_coarse_;
        continue;
      }
      int coarse_idx = -1;
      for (std::size_t c = 0; c < kCoarseCount; ++c) {
        if (detail::iequals(fine_names_[f], coarse_names_[c])) {
          coarse_idx = static_cast<int>(c);
          break;
        }
      }
      if (coarse_idx < 0) {
        raise(errc::scheme_validation,
              "fine label '" + fine_names_[f] +
                  "' is neither grouped nor present in the coarse list");
      }
      fine_to_coarse_[f] = coarse_idx;
    }
  }

  static void require_names(const std::vector<std::string>& names,
                            std::size_t expected, const char* which) {
    if (names.size() != expected) {
      raise(errc::scheme_validation,
            std::string(which) + " list must contain exactly " +
                std::to_string(expected) + " names, found " +
                std::to_string(names.size()));
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].empty()) {
        raise(errc::scheme_validation,
              std::string(which) + " list contains an empty name");
      }
      for (std::size_t j = i + 1; j < names.size(); ++j) {
        if (detail::iequals(names[i], names[j])) {
          raise(errc::scheme_validation,
                std::string(which) + " list breaks the name bijection: '" +
                    names[i] + "' appears more than once");
        }
      }
    }
  }

  std::vector<int> resolve_fine(const std::vector<std::string>& names,
                                const char* which) const {
    std::vector<int> out;
    out.reserve(names.size());
    for (const std::string& name : names) {
      int idx = -1;
      for (std::size_t f = 0; f < kFineCount; ++f) {
        if (detail::iequals(name, fine_names_[f])) {
          idx = static_cast<int>(f);
          break;
        }
      }
      if (idx < 0) {
        raise(errc::scheme_validation, std::string(which) + " contains '" +
                                           name +
                                           "' which is not a fine label");
      }
      out.push_back(idx);
    }
    return out;
  }

  static std::size_t checked(int index, std::size_t count, const char* which) {
    if (index < 0 || static_cast<std::size_t>(index) >= count) {
      raise(errc::invalid_label, std::string(which) + " label index " +
                                     std::to_string(index) +
                                     " out of range [0, " +
                                     std::to_string(count) + ")");
    }
    return static_cast<std::size_t>(index);
  }

  std::vector<std::string> fine_names_;
  std::vector<std::string> coarse_names_;
  std::vector<std::string> negative_names_;
  int fine_to_coarse_[kFineCount] = {};
  int negative_to_fine_[kNegativeCount] = {};
  int coarse_to_fine_[kCoarseCount] = {};
  int negative_coarse_ = -1;
};

inline LabelScheme load_scheme(std::string_view config_text,
                               const std::string& origin = "<scheme config>") {
  return LabelScheme::parse(config_text, origin);
}

}  // namespace cfcsp
