#include "synclip/syndata/labels.hpp"

#include <algorithm>
#include <string>

#include "synclip/syndata/errors.hpp"

namespace synclip::syndata {

namespace {
constexpr std::array<std::string_view, kNumFindings> kFindingNames = {
    "dr_mild",      "dr_severe",      "glaucoma", "age_related_degeneration", "hypertensive_retinopathy",
    "vein_occlusion", "pathological_myopia", "cataract_haze"};
constexpr std::array<std::string_view, kNumRegions> kRegionNames = {"whole_image", "optic_disc", "macula",
                                                                    "vessels"};

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

int sample_readability(autodiff::Rng& rng, const LabelPriors& priors) {
  const double u = rng.uniform();
  if (u < priors.readability_poor) return kReadabilityPoor;
  if (u < priors.readability_poor + priors.readability_fair) return kReadabilityFair;
  return kReadabilityGood;
}
}  // namespace

std::string_view finding_name(Finding f) { return kFindingNames.at(static_cast<std::size_t>(f)); }
std::string_view region_name(Region r) { return kRegionNames.at(static_cast<std::size_t>(r)); }

bool Labels::normal() const { return std::none_of(findings.begin(), findings.end(), [](bool b) { return b; }); }

void Labels::validate() const {
  const bool mild = has(Finding::DrMild);
  const bool severe = has(Finding::DrSevere);
  if (mild && severe) throw LabelError("labels: mild and severe diabetic retinopathy are mutually exclusive");
  const bool grade_ok = (!mild && !severe && dr_grade == 0) || (mild && (dr_grade == 1 || dr_grade == 2)) ||
                        (severe && (dr_grade == 3 || dr_grade == 4));
  if (!grade_ok) throw LabelError("labels: dr_grade " + std::to_string(dr_grade) + " disagrees with the DR flags");
  for (int r : readability) {
    if (r < kReadabilityPoor || r > kReadabilityGood) {
      throw LabelError("labels: readability score " + std::to_string(r) + " outside {0, 1, 2}");
    }
  }
}

void LabelPriors::validate() const {
  for (std::size_t i = 0; i < kNumFindings; ++i) {
    if (!is_probability(finding[i])) {
      throw LabelError("priors: " + std::string(kFindingNames[i]) + " = " + std::to_string(finding[i]) +
                       " is not a probability");
    }
  }
  if ((*this)[Finding::DrMild] + (*this)[Finding::DrSevere] > 1.0) {
    throw LabelError("priors: dr_mild + dr_severe must not exceed 1");
  }
  if (!is_probability(readability_fair) || !is_probability(readability_poor) ||
      readability_fair + readability_poor > 1.0) {
    throw LabelError("priors: readability fair + poor must be probabilities summing to at most 1");
  }
}

Labels sample_labels(autodiff::Rng& rng, const LabelPriors& priors) {
  priors.validate();
  Labels labels;
  const double dr = rng.uniform();
  if (dr < priors[Finding::DrMild]) {
    labels.set(Finding::DrMild, true);
  } else if (dr < priors[Finding::DrMild] + priors[Finding::DrSevere]) {
    labels.set(Finding::DrSevere, true);
  }
  for (std::size_t i = static_cast<std::size_t>(Finding::Glaucoma); i < kNumFindings; ++i) {
    labels.findings[i] = rng.uniform() < priors.finding[i];
  }
  const bool high = rng.uniform() < 0.5;
  if (labels.has(Finding::DrMild)) labels.dr_grade = high ? 2 : 1;
  if (labels.has(Finding::DrSevere)) labels.dr_grade = high ? 4 : 3;
  for (auto& r : labels.readability) r = sample_readability(rng, priors);
  return labels;
}

}  // namespace synclip::syndata
