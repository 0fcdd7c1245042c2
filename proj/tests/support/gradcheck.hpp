#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tensor.hpp"

namespace synclip::testkit {

using ScalarFn = std::function<autodiff::Tensor(std::span<const autodiff::Tensor>)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "input i element j: analytic a numeric n"
};

/// Compares tape gradients of `f` against central differences
///   (f(x + h e_j) - f(x - h e_j)) / 2h
/// for every element of every input. The relative error of one element is
///   |a - n| / max(|a|, |n|, floor).
GradCheckResult check_gradients(const ScalarFn& f, const std::vector<autodiff::Tensor>& inputs, double h = 1e-6,
                                double floor = 1e-4);

/// Central-difference gradient of `f` with respect to input `which`.
std::vector<double> numeric_gradient(const ScalarFn& f, const std::vector<autodiff::Tensor>& inputs,
                                     std::size_t which, double h = 1e-6);

/// sum(y * w) for a fixed weight tensor: turns a tensor-valued op into a
/// scalar with a non-trivial upstream gradient.
autodiff::Tensor weighted_sum(const autodiff::Tensor& y, const autodiff::Tensor& w);

autodiff::Tensor random_tensor(autodiff::Rng& rng, autodiff::Shape shape, double lo = -1.0, double hi = 1.0);

/// Like random_tensor but every |value| is at least `gap`, for ops with a kink at 0.
autodiff::Tensor random_away_from_zero(autodiff::Rng& rng, autodiff::Shape shape, double gap = 0.05);

}  // namespace synclip::testkit
