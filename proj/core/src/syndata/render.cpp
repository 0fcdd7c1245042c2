#include "synclip/syndata/render.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "geometry.hpp"

namespace synclip::syndata {

namespace g = geometry;

namespace {

class Canvas {
 public:
  explicit Canvas(std::size_t size) : size_(size), planes_(3 * size * size, 0.0) {}

  std::size_t size() const { return size_; }
  double* plane(std::size_t c) { return planes_.data() + c * size_ * size_; }

  void blend(std::size_t idx, Rgb color, double alpha) {
    if (alpha <= 0.0) return;
    const std::size_t n = size_ * size_;
    planes_[idx] += alpha * (color.r - planes_[idx]);
    planes_[n + idx] += alpha * (color.g - planes_[n + idx]);
    planes_[2 * n + idx] += alpha * (color.b - planes_[2 * n + idx]);
  }

  void scale(std::size_t idx, double factor) {
    const std::size_t n = size_ * size_;
    for (std::size_t c = 0; c < 3; ++c) planes_[c * n + idx] *= factor;
  }

  std::vector<double> release() { return std::move(planes_); }

 private:
  std::size_t size_;
  std::vector<double> planes_;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Point pixel_center(std::size_t i, std::size_t j) { return {static_cast<double>(j) + 0.5, static_cast<double>(i) + 0.5}; }

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double segment_distance(Point p, const VesselSegment& s) {
  const double dx = s.to.x - s.from.x, dy = s.to.y - s.from.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - s.from.x) * dx + (p.y - s.from.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (s.from.x + t * dx), p.y - (s.from.y + t * dy));
}

// Area coverage of a shape whose boundary lies `signed_distance` away
// (negative inside), approximated by a one-pixel linear ramp.
double coverage(double signed_distance) { return clamp01(0.5 - signed_distance); }

// Union coverage of circles, evaluated only inside each circle's bounding box.
std::vector<double> circle_mask(std::size_t size, const std::vector<Circle>& circles) {
  std::vector<double> mask(size * size, 0.0);
  const auto last = static_cast<double>(size - 1);
  for (const auto& c : circles) {
    const auto i0 = static_cast<std::size_t>(std::clamp(std::floor(c.center.y - c.radius - 1.0), 0.0, last));
    const auto i1 = static_cast<std::size_t>(std::clamp(std::ceil(c.center.y + c.radius + 1.0), 0.0, last));
    const auto j0 = static_cast<std::size_t>(std::clamp(std::floor(c.center.x - c.radius - 1.0), 0.0, last));
    const auto j1 = static_cast<std::size_t>(std::clamp(std::ceil(c.center.x + c.radius + 1.0), 0.0, last));
    for (std::size_t i = i0; i <= i1; ++i) {
      for (std::size_t j = j0; j <= j1; ++j) {
        const double cov = coverage(distance(pixel_center(i, j), c.center) - c.radius);
        mask[i * size + j] = std::max(mask[i * size + j], cov);
      }
    }
  }
  return mask;
}

std::vector<double> vessel_mask(std::size_t size, const std::vector<VesselSegment>& vessels) {
  std::vector<double> mask(size * size, 0.0);
  const auto last = static_cast<double>(size - 1);
  for (const auto& v : vessels) {
    const double pad = v.width / 2.0 + 1.0;
    const auto i0 = static_cast<std::size_t>(std::clamp(std::floor(std::min(v.from.y, v.to.y) - pad), 0.0, last));
    const auto i1 = static_cast<std::size_t>(std::clamp(std::ceil(std::max(v.from.y, v.to.y) + pad), 0.0, last));
    const auto j0 = static_cast<std::size_t>(std::clamp(std::floor(std::min(v.from.x, v.to.x) - pad), 0.0, last));
    const auto j1 = static_cast<std::size_t>(std::clamp(std::ceil(std::max(v.from.x, v.to.x) + pad), 0.0, last));
    for (std::size_t i = i0; i <= i1; ++i) {
      for (std::size_t j = j0; j <= j1; ++j) {
        const double cov = coverage(segment_distance(pixel_center(i, j), v) - v.width / 2.0);
        mask[i * size + j] = std::max(mask[i * size + j], cov);
      }
    }
  }
  return mask;
}

double ellipse_coverage(Point p, Point center, double rx, double ry) {
  const double q = std::hypot((p.x - center.x) / rx, (p.y - center.y) / ry);
  return coverage((q - 1.0) * rx);
}

void gaussian_blur(Canvas& canvas, double sigma) {
  if (sigma <= 0.0) return;
  const std::size_t n = canvas.size();
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double w = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (auto& w : kernel) w /= total;
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  std::vector<double> tmp(n * n);
  for (std::size_t c = 0; c < 3; ++c) {
    double* p = canvas.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const auto jj = std::clamp(static_cast<std::ptrdiff_t>(j) + k, std::ptrdiff_t{0}, last);
          acc += kernel[static_cast<std::size_t>(k + radius)] * p[i * n + static_cast<std::size_t>(jj)];
        }
        tmp[i * n + j] = acc;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const auto ii = std::clamp(static_cast<std::ptrdiff_t>(i) + k, std::ptrdiff_t{0}, last);
          acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(ii) * n + j];
        }
        p[i * n + j] = acc;
      }
    }
  }
}

}  // namespace

autodiff::Tensor render_image(const SceneRecipe& r) {
  r.validate();
  const std::size_t n = r.image_size;
  const double s = static_cast<double>(n);
  Canvas canvas(n);

  const auto vessels = vessel_mask(n, r.vessels);
  const auto drusen = circle_mask(n, r.drusen);
  std::vector<Circle> red_lesions = r.microaneurysms;
  red_lesions.insert(red_lesions.end(), r.hemorrhages.begin(), r.hemorrhages.end());
  const auto lesions = circle_mask(n, red_lesions);
  const double cup_rx = r.cup_to_disc_ratio * r.disc_radius;

  std::vector<double> fundus_cover(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = i * n + j;
      const Point p = pixel_center(i, j);
      fundus_cover[idx] = coverage(distance(p, r.fundus.center) - r.fundus.radius);
      canvas.blend(idx, palette::kFundus, 1.0);

      const double dm = distance(p, r.macula_center);
      canvas.scale(idx, 1.0 - r.macula_depth * std::exp(-dm * dm / (2.0 * r.macula_sigma * r.macula_sigma)));

      const double dd = distance(p, r.disc_center);
      if (r.tessellation && distance(p, r.fundus.center) > g::kTessellationCenterClearance * s &&
          dd > g::kTessellationDiscClearance * s) {
        const double u = (p.x * std::cos(r.tessellation_angle) + p.y * std::sin(r.tessellation_angle)) /
                             r.tessellation_period +
                         r.tessellation_phase;
        const double from_stripe = std::abs(u - std::floor(u) - 0.5) * r.tessellation_period;
        canvas.blend(idx, palette::kTessellation, coverage(from_stripe - r.tessellation_period / 4.0));
      }

      canvas.blend(idx, r.vessel_color, vessels[idx]);

      if (r.pale_wedge && dd > 0.0) {
        const double angle = std::atan2(p.y - r.disc_center.y, p.x - r.disc_center.x);
        const double off_axis = (std::abs(g::angle_diff(angle, r.wedge_angle)) - r.wedge_half_width) * dd;
        const double cov = std::min(coverage(off_axis), coverage(r.wedge_inner_radius - dd));
        canvas.blend(idx, palette::kWedge, palette::kWedgeOpacity * cov);
      }

      canvas.blend(idx, palette::kDiscRim, ellipse_coverage(p, r.disc_center, r.disc_radius, r.disc_radius * r.disc_aspect));
      canvas.blend(idx, palette::kCup, ellipse_coverage(p, r.disc_center, cup_rx, cup_rx * r.disc_aspect));
      canvas.blend(idx, palette::kDrusen, drusen[idx]);
      canvas.blend(idx, palette::kLesion, lesions[idx]);

      canvas.scale(idx, fundus_cover[idx]);
      if (r.haze_opacity > 0.0) {
        canvas.blend(idx, {palette::kHazeGray, palette::kHazeGray, palette::kHazeGray}, r.haze_opacity);
      }
    }
  }

  gaussian_blur(canvas, r.blur_sigma);

  const double shadow_sigma = 0.12 * s;
  const double ca = std::cos(r.illumination_angle), sa = std::sin(r.illumination_angle);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Point p = pixel_center(i, j);
      const double proj = ((p.x - r.fundus.center.x) * ca + (p.y - r.fundus.center.y) * sa) / (0.5 * s);
      double factor = 1.0 - r.illumination_falloff * clamp01(0.5 * (proj + 1.0));
      const double dd = distance(p, r.disc_center);
      const double dm = distance(p, r.macula_center);
      factor *= 1.0 - r.disc_shadow * std::exp(-dd * dd / (2.0 * shadow_sigma * shadow_sigma));
      factor *= 1.0 - r.macula_shadow * std::exp(-dm * dm / (2.0 * shadow_sigma * shadow_sigma));
      canvas.scale(i * n + j, factor);
    }
  }

  std::vector<double> data = canvas.release();
  for (auto& v : data) v = clamp01(v);
  return autodiff::Tensor({3, n, n}, std::move(data));
}

}  // namespace synclip::syndata
