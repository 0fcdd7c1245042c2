#pragma once

#include <array>

#include "synclip/autodiff/tensor.hpp"
#include "synclip/syndata/labels.hpp"

namespace synclip::syndata {

/// Pixel statistics that recover each disease flag from a rendered image
/// without access to the recipe. All of them work on the hue ratio
/// h = (R - G) / (R - B) of fundus pixels (R - B > 0.02), which haze and
/// shading leave unchanged. Pixel counts are normalized to a 64 x 64 image.
struct FindingStatistics {
  double corner_brightness = 0.0;           // mean of the four corner patches
  double lesion_pixels = 0.0;               // h > 1.05
  double largest_lesion_component = 0.0;    // 4-connected
  double cup_fraction = 0.0;                // h < 0.45 near the nominal disc, per nominal disc area
  double drusen_pixels = 0.0;               // h < 0.38 near the nominal macula
  double peripapillary_vessel_pixels = 0.0; // 0.72 <= h <= 1.02 in a ring around the disc
  double peripheral_vessel_fraction = 0.0;  // same hue band, outer ring, outside the wedge sector
  double wedge_pale_fraction = 0.0;         // h < 0.45 in the vein-occlusion window
};

struct DetectorThresholds {
  double corner_brightness = 0.08;
  double mild_lesion_pixels = 8.0;
  double severe_component = 17.0;
  double cup_fraction = 0.36;
  double drusen_pixels = 16.0;
  double narrowed_vessel_pixels = 13.0;
  double peripheral_vessel_fraction = 0.25;
  double wedge_pale_fraction = 0.4;
};

FindingStatistics measure_findings(const autodiff::Tensor& image);

std::array<bool, kNumFindings> classify_findings(const FindingStatistics& stats,
                                                 const DetectorThresholds& thresholds = {});

inline std::array<bool, kNumFindings> detect_findings(const autodiff::Tensor& image) {
  return classify_findings(measure_findings(image));
}

}  // namespace synclip::syndata
