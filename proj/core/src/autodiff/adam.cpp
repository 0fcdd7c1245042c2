#include "synclip/autodiff/adam.hpp"

#include <cmath>

namespace synclip::autodiff {

AdamState::AdamState(AdamOptions options) : options_(options) {
  if (!(options_.beta1 > 0.0 && options_.beta1 < 1.0)) throw DomainError("Adam: beta1 must lie in (0, 1)");
  if (!(options_.beta2 > 0.0 && options_.beta2 < 1.0)) throw DomainError("Adam: beta2 must lie in (0, 1)");
  if (!(options_.epsilon > 0.0)) throw DomainError("Adam: epsilon must be positive");
  if (!(options_.learning_rate > 0.0)) throw DomainError("Adam: learning rate must be positive");
}

const std::vector<double>* AdamState::first_moment(const std::string& name) const {
  auto it = m_.find(name);
  return it == m_.end() ? nullptr : &it->second;
}

const std::vector<double>* AdamState::second_moment(const std::string& name) const {
  auto it = v_.find(name);
  return it == v_.end() ? nullptr : &it->second;
}

void adam_step(ParameterSet& params, const GradientMap& grads, AdamState& state) {
  for (const auto& [name, value] : params) {
    const Tensor* g = grads.find(value);
    if (!g) throw TapeError("adam_step: no gradient for parameter '" + name + "'");
    if (g->shape() != value.shape()) throw ShapeError("adam_step(" + name + ")", value.shape(), g->shape());
    auto m = state.m_.find(name);
    if (m != state.m_.end() && m->second.size() != value.size()) {
      throw ShapeError("adam_step(" + name + ")", value.shape(), Shape{m->second.size()}, "moment size mismatch");
    }
  }

  const auto& opt = state.options_;
  const auto t = static_cast<double>(state.step_count_ + 1);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);

  std::vector<std::pair<std::string, Tensor>> updated;
  updated.reserve(params.size());
  for (const auto& [name, value] : params) {
    const Tensor& g = *grads.find(value);
    auto& m = state.m_[name];
    auto& v = state.v_[name];
    if (m.empty()) {
      m.assign(value.size(), 0.0);
      v.assign(value.size(), 0.0);
    }
    std::vector<double> next(value.data().begin(), value.data().end());
    for (std::size_t i = 0; i < next.size(); ++i) {
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      next[i] -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon);
    }
    updated.emplace_back(name, Tensor::parameter(value.shape(), std::move(next)));
  }
  for (auto& [name, value] : updated) params.set(name, std::move(value));
  ++state.step_count_;
}

}  // namespace synclip::autodiff
