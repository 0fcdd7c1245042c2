#pragma once

#include <filesystem>

#include "synclip/autodiff/tensor.hpp"

namespace synclip::syndata {

/// Rounds every value to the nearest multiple of 1/255 (values are clamped
/// to [0, 1] first), i.e. exactly what survives a PPM round trip.
autodiff::Tensor quantize_8bit(const autodiff::Tensor& image);

/// Binary P6, maxval 255, samples round(v * 255). image is [3, H, W].
void write_ppm(const std::filesystem::path& path, const autodiff::Tensor& image);

/// Reads a binary P6 file (maxval 1..255) into [3, H, W] values v / maxval.
autodiff::Tensor read_ppm(const std::filesystem::path& path);

/// Nearest-neighbor resampling of [3, H, W] to [3, size, size]: output pixel
/// (i, j) takes source (floor(i * H / size), floor(j * W / size)).
autodiff::Tensor resize_nearest(const autodiff::Tensor& image, std::size_t size);

}  // namespace synclip::syndata
