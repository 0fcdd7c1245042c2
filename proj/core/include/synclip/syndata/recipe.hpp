#pragma once

#include <cstddef>
#include <vector>

#include "synclip/autodiff/rng.hpp"
#include "synclip/syndata/labels.hpp"

namespace synclip::syndata {

/// Pixel coordinates: x to the right, y down, pixel (i, j) centered at
/// (j + 0.5, i + 0.5). Angles are radians measured from +x towards +y.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Circle {
  Point center;
  double radius = 0.0;
};

struct VesselSegment {
  Point from;
  Point to;
  double width = 0.0;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

/// Everything the renderer needs, fully resolved from labels and an Rng.
struct SceneRecipe {
  std::size_t image_size = 64;

  Circle fundus;
  Point disc_center;
  double disc_radius = 0.0;  // horizontal semi-axis; vertical is disc_aspect times this
  double disc_aspect = 1.1;
  double cup_to_disc_ratio = 0.3;
  Point macula_center;
  double macula_sigma = 0.0;
  double macula_depth = 0.0;  // fractional darkening at the macula center

  std::vector<VesselSegment> vessels;
  Rgb vessel_color;

  bool tessellation = false;
  double tessellation_angle = 0.0;
  double tessellation_period = 0.0;
  double tessellation_phase = 0.0;

  bool pale_wedge = false;
  double wedge_angle = 0.0;  // direction from the disc center
  double wedge_half_width = 0.0;
  double wedge_inner_radius = 0.0;

  std::vector<Circle> drusen;
  std::vector<Circle> microaneurysms;
  std::vector<Circle> hemorrhages;  // irregular blobs as clusters of overlapping lobes

  double haze_opacity = 0.0;

  double blur_sigma = 0.0;
  double illumination_falloff = 0.0;
  double illumination_angle = 0.0;
  double disc_shadow = 0.0;
  double macula_shadow = 0.0;

  /// Throws LabelError when geometry leaves the image or the cup ratio is
  /// outside [0.2, 0.9].
  void validate() const;
};

/// Nominal (unjittered) landmark positions for an image of side `size`.
Point nominal_center(std::size_t size);
Point nominal_disc_center(std::size_t size);
Point nominal_macula_center(std::size_t size);

/// Recipe for `labels` at side `size`. Cup ratio is drawn from [0.7, 0.9]
/// with glaucoma and [0.2, 0.5] without.
SceneRecipe make_recipe(const Labels& labels, std::size_t size, autodiff::Rng& rng);

}  // namespace synclip::syndata
