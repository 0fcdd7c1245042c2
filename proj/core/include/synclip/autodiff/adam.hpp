#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "synclip/autodiff/parameters.hpp"
#include "synclip/autodiff/tape.hpp"

namespace synclip::autodiff {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  explicit AdamState(AdamOptions options = {});

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t step_count() const noexcept { return step_count_; }

  const std::vector<double>* first_moment(const std::string& name) const;
  const std::vector<double>* second_moment(const std::string& name) const;

 private:
  friend void adam_step(ParameterSet&, const GradientMap&, AdamState&);

  AdamOptions options_;
  std::uint64_t step_count_ = 0;
  std::map<std::string, std::vector<double>> m_;
  std::map<std::string, std::vector<double>> v_;
};

/// One bias-corrected Adam update of every parameter in `params`. Updated
/// parameters are fresh leaves. Throws TapeError naming the first parameter
/// without a gradient, before any parameter is modified.
void adam_step(ParameterSet& params, const GradientMap& grads, AdamState& state);

}  // namespace synclip::autodiff
