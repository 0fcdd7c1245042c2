#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gradcheck.hpp"
#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tensor.hpp"

namespace synclip::testkit {

/// One differentiable op reduced to a scalar by fixed random output weights.
struct OpCase {
  const char* name;
  std::function<std::vector<autodiff::Tensor>(autodiff::Rng&)> make_inputs;
  std::function<autodiff::Tensor(std::span<const autodiff::Tensor>)> fn;
};

/// sum(y * w) for weights w in [-1, 1] that depend only on the shape of y.
autodiff::Tensor fixed_weight_sum(const autodiff::Tensor& y);

/// Every differentiable op, including broadcasting and axis variants.
std::vector<OpCase> op_cases();

/// Worst relative error of `c` over `points` random input draws.
GradCheckResult check_op_case(const OpCase& c, std::size_t case_index, int points);

/// Finite-difference check of every parameter of a tiny model through both
/// encoders and the contrastive loss.
GradCheckResult check_encoder_to_loss();

}  // namespace synclip::testkit
