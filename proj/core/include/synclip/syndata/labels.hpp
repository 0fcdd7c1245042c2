#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "synclip/autodiff/rng.hpp"

namespace synclip::syndata {

enum class Finding : std::size_t {
  DrMild,
  DrSevere,
  Glaucoma,
  AgeRelatedDegeneration,
  HypertensiveRetinopathy,
  VeinOcclusion,
  PathologicalMyopia,
  CataractHaze,
};
inline constexpr std::size_t kNumFindings = 8;

enum class Region : std::size_t { WholeImage, OpticDisc, Macula, Vessels };
inline constexpr std::size_t kNumRegions = 4;

/// Snake-case names used in manifests and configs, e.g. "dr_mild".
std::string_view finding_name(Finding f);
std::string_view region_name(Region r);

inline constexpr int kReadabilityPoor = 0;
inline constexpr int kReadabilityFair = 1;
inline constexpr int kReadabilityGood = 2;

/// Disease flags plus the derived DR grade (0 when no DR, 1-2 mild, 3-4
/// severe) and one readability score per region.
struct Labels {
  std::array<bool, kNumFindings> findings{};
  int dr_grade = 0;
  std::array<int, kNumRegions> readability{kReadabilityGood, kReadabilityGood, kReadabilityGood, kReadabilityGood};

  bool has(Finding f) const { return findings[static_cast<std::size_t>(f)]; }
  void set(Finding f, bool value) { findings[static_cast<std::size_t>(f)] = value; }
  int readability_of(Region r) const { return readability[static_cast<std::size_t>(r)]; }
  /// No disease flag set (readability is ignored).
  bool normal() const;
  /// Throws syndata::LabelError when the DR flags and grade disagree or a
  /// readability score is outside {0, 1, 2}.
  void validate() const;

  bool operator==(const Labels&) const = default;
};

/// Independent Bernoulli priors per flag, except that the two DR flags form
/// one exclusive group (at most one is drawn). Readability draws "poor" and
/// "fair" with the given probabilities, otherwise "good".
struct LabelPriors {
  std::array<double, kNumFindings> finding{0.12, 0.08, 0.2, 0.2, 0.08, 0.08, 0.08, 0.08};
  double readability_fair = 0.15;
  double readability_poor = 0.05;

  double& operator[](Finding f) { return finding[static_cast<std::size_t>(f)]; }
  double operator[](Finding f) const { return finding[static_cast<std::size_t>(f)]; }
  void validate() const;

  bool operator==(const LabelPriors&) const = default;
};

Labels sample_labels(autodiff::Rng& rng, const LabelPriors& priors);

}  // namespace synclip::syndata
