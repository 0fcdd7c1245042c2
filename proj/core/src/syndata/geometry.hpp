#pragma once

// Scene layout shared by the recipe builder, the renderer and the detectors.
// Lengths are fractions of the image side.

#include <cmath>
#include <numbers>

namespace synclip::syndata::geometry {

inline constexpr double kFundusRadius = 0.44;
inline constexpr double kCenterJitter = 0.02;
inline constexpr double kDiscOffset = 0.25;
inline constexpr double kDiscJitter = 0.015;
inline constexpr double kDiscRadius = 0.09;
inline constexpr double kMaculaOffset = 0.2;
inline constexpr double kMaculaJitter = 0.02;

inline constexpr double kWedgeAngleDeg = -110.0;
inline constexpr double kWedgeAngleJitterDeg = 8.0;
inline constexpr double kWedgeHalfWidthDeg = 25.0;
inline constexpr double kWedgeInnerRadius = 0.25;

inline constexpr double kTessellationCenterClearance = 0.28;
inline constexpr double kTessellationDiscClearance = 0.3;

inline constexpr double deg(double degrees) { return degrees * std::numbers::pi / 180.0; }

/// Signed angular difference a - b wrapped to (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return d <= -std::numbers::pi ? d + 2.0 * std::numbers::pi : d;
}

}  // namespace synclip::syndata::geometry
