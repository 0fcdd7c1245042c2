#include "synclip/syndata/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "geometry.hpp"
#include "synclip/syndata/errors.hpp"

namespace synclip::syndata {

using autodiff::Rng;
namespace g = geometry;

namespace {

constexpr Rgb kVesselColor{0.52, 0.12, 0.08};
constexpr Rgb kNarrowedVesselColor{0.9, 0.58, 0.42};
constexpr double kVesselWidth = 0.025;
constexpr double kNarrowedWidthFactor = 0.55;

constexpr std::array<double, 3> kBlurSigma{0.8, 0.45, 0.0};  // indexed by readability score
constexpr std::array<double, 3> kIlluminationFalloff{0.3, 0.15, 0.0};
constexpr std::array<double, 3> kRegionShadow{0.4, 0.2, 0.0};

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point offset(Point p, double angle, double length) {
  return {p.x + length * std::cos(angle), p.y + length * std::sin(angle)};
}

Point point_in_disk(Rng& rng, Point center, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  return offset(center, rng.uniform(0.0, 2.0 * std::numbers::pi), r);
}

struct Trunk {
  std::vector<Point> points;
  std::vector<double> headings;
};

// Walks from the disc rim, relaxing the heading towards `target` each step.
Trunk grow_vessel(Rng& rng, const SceneRecipe& r, Point start, double heading, double target, double rate,
                  std::size_t steps, double step_length) {
  Trunk t;
  t.points.push_back(start);
  t.headings.push_back(heading);
  Point p = start;
  for (std::size_t k = 0; k < steps; ++k) {
    heading += rate * g::angle_diff(target, heading) + 0.12 * rng.normal();
    const Point next = offset(p, heading, step_length);
    if (distance(next, r.fundus.center) > 0.97 * r.fundus.radius) break;
    t.points.push_back(next);
    t.headings.push_back(heading);
    p = next;
  }
  return t;
}

void emit_segments(SceneRecipe& r, const Trunk& t, double width) {
  const std::size_t n = t.points.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double taper = 1.0 - 0.3 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
    r.vessels.push_back({t.points[k], t.points[k + 1], width * taper});
  }
}

void build_vessels(SceneRecipe& r, const Labels& labels, Rng& rng) {
  const double s = static_cast<double>(r.image_size);
  const bool narrowed = labels.has(Finding::HypertensiveRetinopathy);
  const double width = kVesselWidth * s * (narrowed ? kNarrowedWidthFactor : 1.0);
  r.vessel_color = narrowed ? kNarrowedVesselColor : kVesselColor;
  const double step = 0.035 * s;

  struct TrunkPlan {
    double start, target, rate;
    std::size_t steps;
  };
  const TrunkPlan plans[] = {
      {g::deg(-100.0), g::deg(-175.0), 0.2, 18},
      {g::deg(100.0), g::deg(175.0), 0.2, 18},
      {g::deg(-40.0), g::deg(-40.0), 0.0, 10},
      {g::deg(40.0), g::deg(40.0), 0.0, 10},
  };
  std::vector<Trunk> arcades;
  for (const auto& plan : plans) {
    const double start_angle = plan.start + g::deg(6.0) * rng.normal();
    const Point start = offset(r.disc_center, start_angle, r.disc_radius * 0.9);
    Trunk t = grow_vessel(rng, r, start, start_angle, plan.target, plan.rate, plan.steps, step);
    emit_segments(r, t, width);
    if (plan.rate > 0.0) arcades.push_back(std::move(t));
  }
  const std::size_t branches = 1 + rng.below(3);
  for (std::size_t b = 0; b < branches; ++b) {
    const Trunk& parent = arcades[rng.below(arcades.size())];
    if (parent.points.size() < 6) continue;
    const std::size_t at = 2 + rng.below(parent.points.size() - 4);
    const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double heading = parent.headings[at] + side * g::deg(35.0);
    Trunk t = grow_vessel(rng, r, parent.points[at], heading, heading, 0.0, 4 + rng.below(3), step * 0.9);
    emit_segments(r, t, width * 0.75);
  }
}

bool in_wedge_window(const SceneRecipe& r, Point p) {
  const double d = distance(p, r.disc_center);
  const double a = std::atan2(p.y - r.disc_center.y, p.x - r.disc_center.x);
  return d > 0.22 * static_cast<double>(r.image_size) && d < 0.38 * static_cast<double>(r.image_size) &&
         std::abs(g::angle_diff(a, g::deg(g::kWedgeAngleDeg))) < g::deg(20.0);
}

// Rejection-samples a lesion center inside the lesion zone, clear of the disc,
// the macula, the vein-occlusion window and previously placed lesions.
bool place_lesion(Rng& rng, const SceneRecipe& r, std::vector<Circle>& placed, double radius, double gap, Point& out) {
  const double s = static_cast<double>(r.image_size);
  for (int attempt = 0; attempt < 400; ++attempt) {
    const Point p = point_in_disk(rng, r.fundus.center, 0.34 * s);
    if (distance(p, r.disc_center) < 0.26 * s) continue;
    if (distance(p, r.macula_center) < 0.17 * s) continue;
    if (in_wedge_window(r, p)) continue;
    bool clear = true;
    for (const auto& c : placed) clear = clear && distance(p, c.center) >= c.radius + radius + gap;
    if (!clear) continue;
    out = p;
    placed.push_back({p, radius});
    return true;
  }
  return false;
}

void build_dr_lesions(SceneRecipe& r, int grade, Rng& rng) {
  if (grade == 0) return;
  const double s = static_cast<double>(r.image_size);
  std::vector<Circle> placed;
  std::size_t blobs = 0;
  std::size_t dots = 0;
  switch (grade) {
    case 1: dots = 4 + rng.below(4); break;
    case 2: dots = 9 + rng.below(6); break;
    case 3: blobs = 3 + rng.below(3); dots = 3 + rng.below(3); break;
    default: blobs = 6 + rng.below(3); dots = 4 + rng.below(4); break;
  }
  for (std::size_t i = 0; i < blobs; ++i) {
    const double radius = rng.uniform(0.045, 0.06) * s;
    Point c;
    if (!place_lesion(rng, r, placed, radius, 0.05 * s, c)) continue;
    const std::size_t lobes = 3 + rng.below(2);
    for (std::size_t l = 0; l < lobes; ++l) {
      const Point lobe = point_in_disk(rng, c, 0.4 * radius);
      r.hemorrhages.push_back({lobe, radius * rng.uniform(0.6, 0.8)});
    }
  }
  for (std::size_t i = 0; i < dots; ++i) {
    const double radius = rng.uniform(0.02, 0.025) * s;
    Point c;
    if (place_lesion(rng, r, placed, radius, 0.05 * s, c)) r.microaneurysms.push_back({c, radius});
  }
}

}  // namespace

Point nominal_center(std::size_t size) { return {0.5 * static_cast<double>(size), 0.5 * static_cast<double>(size)}; }

Point nominal_disc_center(std::size_t size) {
  const Point c = nominal_center(size);
  return {c.x + g::kDiscOffset * static_cast<double>(size), c.y};
}

Point nominal_macula_center(std::size_t size) {
  const Point c = nominal_center(size);
  return {c.x - g::kMaculaOffset * static_cast<double>(size), c.y};
}

void SceneRecipe::validate() const {
  if (image_size < 8) throw LabelError("recipe: image_size must be at least 8");
  if (cup_to_disc_ratio < 0.2 || cup_to_disc_ratio > 0.9) {
    throw LabelError("recipe: cup_to_disc_ratio " + std::to_string(cup_to_disc_ratio) + " outside [0.2, 0.9]");
  }
  const double s = static_cast<double>(image_size);
  auto inside = [s](Point p, double margin) {
    return p.x - margin >= 0.0 && p.y - margin >= 0.0 && p.x + margin <= s && p.y + margin <= s;
  };
  if (!inside(fundus.center, fundus.radius)) throw LabelError("recipe: fundus leaves the image");
  if (!inside(disc_center, disc_radius * disc_aspect)) throw LabelError("recipe: optic disc leaves the image");
  for (const auto* list : {&drusen, &microaneurysms, &hemorrhages}) {
    for (const auto& c : *list) {
      if (!inside(c.center, c.radius)) throw LabelError("recipe: lesion leaves the image");
    }
  }
  for (const auto& v : vessels) {
    if (!inside(v.from, 0.0) || !inside(v.to, 0.0)) throw LabelError("recipe: vessel leaves the image");
  }
}

SceneRecipe make_recipe(const Labels& labels, std::size_t size, Rng& rng) {
  labels.validate();
  SceneRecipe r;
  r.image_size = size;
  const double s = static_cast<double>(size);
  const Point c = nominal_center(size);

  r.fundus.center = {c.x + rng.uniform(-1.0, 1.0) * g::kCenterJitter * s,
                     c.y + rng.uniform(-1.0, 1.0) * g::kCenterJitter * s};
  r.fundus.radius = g::kFundusRadius * s;
  r.disc_center = {r.fundus.center.x + g::kDiscOffset * s + rng.uniform(-1.0, 1.0) * g::kDiscJitter * s,
                   r.fundus.center.y + rng.uniform(-1.0, 1.0) * g::kDiscJitter * s};
  r.disc_radius = g::kDiscRadius * s;
  r.cup_to_disc_ratio = labels.has(Finding::Glaucoma) ? rng.uniform(0.7, 0.9) : rng.uniform(0.2, 0.5);
  r.macula_center = {r.fundus.center.x - g::kMaculaOffset * s + rng.uniform(-1.0, 1.0) * g::kMaculaJitter * s,
                     r.fundus.center.y + rng.uniform(-0.5, 0.5) * g::kMaculaJitter * s};
  r.macula_sigma = 0.07 * s;
  r.macula_depth = rng.uniform(0.25, 0.35);

  build_vessels(r, labels, rng);

  if (labels.has(Finding::PathologicalMyopia)) {
    r.tessellation = true;
    r.tessellation_angle = rng.uniform(0.0, std::numbers::pi);
    r.tessellation_period = 0.1 * s;
    r.tessellation_phase = rng.uniform();
  }
  if (labels.has(Finding::VeinOcclusion)) {
    r.pale_wedge = true;
    r.wedge_angle = g::deg(g::kWedgeAngleDeg + rng.uniform(-1.0, 1.0) * g::kWedgeAngleJitterDeg);
    r.wedge_half_width = g::deg(g::kWedgeHalfWidthDeg);
    r.wedge_inner_radius = g::kWedgeInnerRadius * s;
  }
  if (labels.has(Finding::AgeRelatedDegeneration)) {
    const std::size_t count = 5 + rng.below(6);
    for (std::size_t i = 0; i < count; ++i) {
      r.drusen.push_back({point_in_disk(rng, r.macula_center, 0.1 * s), rng.uniform(0.024, 0.034) * s});
    }
  }
  build_dr_lesions(r, labels.dr_grade, rng);
  if (labels.has(Finding::CataractHaze)) r.haze_opacity = 0.35;

  const double scale = s / 64.0;
  r.blur_sigma = kBlurSigma[labels.readability_of(Region::Vessels)] * scale;
  r.illumination_falloff = kIlluminationFalloff[labels.readability_of(Region::WholeImage)];
  r.illumination_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  r.disc_shadow = kRegionShadow[labels.readability_of(Region::OpticDisc)];
  r.macula_shadow = kRegionShadow[labels.readability_of(Region::Macula)];
  return r;
}

}  // namespace synclip::syndata
