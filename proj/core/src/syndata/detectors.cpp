#include "synclip/syndata/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "geometry.hpp"
#include "synclip/syndata/recipe.hpp"

namespace synclip::syndata {

namespace g = geometry;

namespace {

constexpr double kFundusMinChroma = 0.02;

struct HueMap {
  std::size_t size = 0;
  std::vector<double> hue;  // NaN outside the fundus
  std::vector<double> brightness;
};

HueMap hue_map(const autodiff::Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) != image.dim(2)) {
    throw autodiff::ShapeError("measure_findings", image.shape(), {3, 0, 0}, "expected [3, S, S]");
  }
  HueMap m;
  m.size = image.dim(1);
  const std::size_t n = m.size * m.size;
  m.hue.assign(n, std::numeric_limits<double>::quiet_NaN());
  m.brightness.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = image[i], gr = image[n + i], b = image[2 * n + i];
    m.brightness[i] = (r + gr + b) / 3.0;
    if (r - b > kFundusMinChroma) m.hue[i] = (r - gr) / (r - b);
  }
  return m;
}

double largest_component(const std::vector<char>& mask, std::size_t size) {
  std::vector<char> seen(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t best = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    std::size_t count = 0;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const std::size_t i = p / size, j = p % size;
      const std::size_t neighbors[4] = {i > 0 ? p - size : p, i + 1 < size ? p + size : p, j > 0 ? p - 1 : p,
                                        j + 1 < size ? p + 1 : p};
      for (auto q : neighbors) {
        if (mask[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    best = std::max(best, count);
  }
  return static_cast<double>(best);
}

}  // namespace

FindingStatistics measure_findings(const autodiff::Tensor& image) {
  const HueMap m = hue_map(image);
  const std::size_t n = m.size;
  const double s = static_cast<double>(n);
  const double area_scale = (64.0 / s) * (64.0 / s);
  const Point center = nominal_center(n);
  const Point disc = nominal_disc_center(n);
  const Point macula = nominal_macula_center(n);
  const double disc_area = std::numbers::pi * g::kDiscRadius * s * g::kDiscRadius * s * 1.1;

  FindingStatistics st;
  const std::size_t patch = std::max<std::size_t>(1, n / 16);
  double corner = 0.0;
  for (std::size_t i = 0; i < patch; ++i) {
    for (std::size_t j = 0; j < patch; ++j) {
      corner += m.brightness[i * n + j] + m.brightness[i * n + (n - 1 - j)] + m.brightness[(n - 1 - i) * n + j] +
                m.brightness[(n - 1 - i) * n + (n - 1 - j)];
    }
  }
  st.corner_brightness = corner / static_cast<double>(4 * patch * patch);

  std::vector<char> lesion(n * n, 0);
  double lesion_count = 0, cup = 0, drusen = 0, ring_vessels = 0, periphery = 0, periphery_vessels = 0;
  double wedge = 0, wedge_pale = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double h = m.hue[i * n + j];
      const Point p{static_cast<double>(j) + 0.5, static_cast<double>(i) + 0.5};
      const double dc = std::hypot(p.x - center.x, p.y - center.y) / s;
      const double dd = std::hypot(p.x - disc.x, p.y - disc.y) / s;
      const double dm = std::hypot(p.x - macula.x, p.y - macula.y) / s;
      const double disc_angle = std::atan2(p.y - disc.y, p.x - disc.x);
      const bool fundus = !std::isnan(h);
      const bool vessel_hue = fundus && h >= 0.72 && h <= 1.02;

      if (fundus && h > 1.05) {
        lesion[i * n + j] = 1;
        ++lesion_count;
      }
      if (dd < 0.14 && fundus && h < 0.45) ++cup;
      if (dm < 0.13 && fundus && h < 0.38) ++drusen;
      if (dd >= 0.14 && dd <= 0.22 && vessel_hue) ++ring_vessels;
      const bool in_wedge_sector = std::abs(g::angle_diff(disc_angle, g::deg(-110.0))) <= g::deg(35.0);
      if (dc >= 0.30 && dc <= 0.42 && dd > 0.3 && !in_wedge_sector && fundus) {
        ++periphery;
        if (vessel_hue) ++periphery_vessels;
      }
      if (dd >= 0.27 && dd <= 0.34 && std::abs(g::angle_diff(disc_angle, g::deg(-110.0))) <= g::deg(12.0)) {
        ++wedge;
        if (fundus && h < 0.45) ++wedge_pale;
      }
    }
  }
  st.lesion_pixels = lesion_count * area_scale;
  st.largest_lesion_component = largest_component(lesion, n) * area_scale;
  st.cup_fraction = cup / disc_area;
  st.drusen_pixels = drusen * area_scale;
  st.peripapillary_vessel_pixels = ring_vessels * area_scale;
  st.peripheral_vessel_fraction = periphery > 0 ? periphery_vessels / periphery : 0.0;
  st.wedge_pale_fraction = wedge > 0 ? wedge_pale / wedge : 0.0;
  return st;
}

std::array<bool, kNumFindings> classify_findings(const FindingStatistics& st, const DetectorThresholds& t) {
  std::array<bool, kNumFindings> out{};
  const bool severe = st.largest_lesion_component >= t.severe_component;
  out[static_cast<std::size_t>(Finding::DrSevere)] = severe;
  out[static_cast<std::size_t>(Finding::DrMild)] = !severe && st.lesion_pixels >= t.mild_lesion_pixels;
  out[static_cast<std::size_t>(Finding::Glaucoma)] = st.cup_fraction > t.cup_fraction;
  out[static_cast<std::size_t>(Finding::AgeRelatedDegeneration)] = st.drusen_pixels > t.drusen_pixels;
  out[static_cast<std::size_t>(Finding::HypertensiveRetinopathy)] = st.peripapillary_vessel_pixels < t.narrowed_vessel_pixels;
  out[static_cast<std::size_t>(Finding::VeinOcclusion)] = st.wedge_pale_fraction > t.wedge_pale_fraction;
  out[static_cast<std::size_t>(Finding::PathologicalMyopia)] = st.peripheral_vessel_fraction > t.peripheral_vessel_fraction;
  out[static_cast<std::size_t>(Finding::CataractHaze)] = st.corner_brightness > t.corner_brightness;
  return out;
}

}  // namespace synclip::syndata
