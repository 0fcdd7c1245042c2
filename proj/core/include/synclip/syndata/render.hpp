#pragma once

#include "synclip/autodiff/tensor.hpp"
#include "synclip/syndata/recipe.hpp"

namespace synclip::syndata {

/// Palette. Every tissue color is chosen so that the ratio (R - G) / (R - B)
/// separates the structures and is unchanged by the multiplicative shading
/// and gray haze the renderer applies.
namespace palette {
inline constexpr Rgb kFundus{0.80, 0.40, 0.16};
inline constexpr Rgb kDiscRim{1.0, 0.72, 0.45};
inline constexpr Rgb kCup{0.97, 0.95, 0.86};
inline constexpr Rgb kTessellation{0.6, 0.2, 0.14};
inline constexpr Rgb kWedge{0.92, 0.86, 0.55};
inline constexpr Rgb kDrusen{0.95, 0.88, 0.35};
inline constexpr Rgb kLesion{0.45, 0.0, 0.25};
inline constexpr double kHazeGray = 0.9;
inline constexpr double kWedgeOpacity = 0.7;
}  // namespace palette

/// Draws `recipe` into a [3, S, S] tensor with values in [0, 1].
///
/// Layers, bottom to top: black background, fundus disc with macular
/// shading, myopic tessellation, vessels, pale wedge, optic disc and cup,
/// drusen, red lesions, cataract haze. Readability degradations come last:
/// Gaussian blur, linear illumination falloff, local shadows over the disc
/// and the macula.
autodiff::Tensor render_image(const SceneRecipe& recipe);

}  // namespace synclip::syndata
