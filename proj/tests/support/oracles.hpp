#pragma once

#include <cstddef>
#include <vector>

#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tensor.hpp"

namespace synclip::testkit {

/// [n, d] rows drawn from N(0, 1) and normalized.
autodiff::Tensor unit_rows(autodiff::Rng& rng, std::size_t n, std::size_t d);

/// Cosine of every (image, class) pair computed from scratch; the first
/// maximum wins.
std::vector<std::size_t> brute_force_classify(const autodiff::Tensor& images, const autodiff::Tensor& classes);

}  // namespace synclip::testkit
