#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "synclip/autodiff/ops.hpp"
#include "synclip/autodiff/tape.hpp"

namespace synclip::testkit {

using autodiff::Tensor;

namespace {

double evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  const Tensor y = f(inputs);
  if (y.size() != 1) throw std::logic_error("gradcheck: function must return a single element");
  return y[0];
}

}  // namespace

std::vector<double> numeric_gradient(const ScalarFn& f, const std::vector<Tensor>& inputs, std::size_t which,
                                     double h) {
  std::vector<Tensor> probe;
  for (const auto& t : inputs) probe.push_back(t.detached());
  const Tensor& base = inputs[which];
  std::vector<double> grad(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) {
    std::vector<double> v(base.data().begin(), base.data().end());
    v[j] = base[j] + h;
    probe[which] = Tensor(base.shape(), v);
    const double up = evaluate(f, probe);
    v[j] = base[j] - h;
    probe[which] = Tensor(base.shape(), v);
    const double down = evaluate(f, probe);
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradCheckResult check_gradients(const ScalarFn& f, const std::vector<Tensor>& inputs, double h, double floor) {
  std::vector<Tensor> leaves;
  for (const auto& t : inputs) leaves.push_back(t.detached().as_parameter());

  autodiff::Tape tape;
  autodiff::GradientMap grads;
  {
    autodiff::TapeScope scope(tape);
    const Tensor loss = f(leaves);
    grads = tape.backward(loss);
  }

  GradCheckResult result;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const auto numeric = numeric_gradient(f, inputs, i, h);
    const Tensor* analytic = grads.find(leaves[i]);
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      const double a = analytic ? (*analytic)[j] : 0.0;
      const double n = numeric[j];
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      ++result.checked;
      if (rel >= result.max_relative_error) {
        result.max_relative_error = rel;
        char buf[160];
        std::snprintf(buf, sizeof buf, "input %zu element %zu: analytic %.10g numeric %.10g", i, j, a, n);
        result.worst = buf;
      }
    }
  }
  return result;
}

Tensor weighted_sum(const Tensor& y, const Tensor& w) { return autodiff::ops::sum(autodiff::ops::mul(y, w)); }

Tensor random_tensor(autodiff::Rng& rng, autodiff::Shape shape, double lo, double hi) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

Tensor random_away_from_zero(autodiff::Rng& rng, autodiff::Shape shape, double gap) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(n);
  for (auto& x : v) {
    const double mag = rng.uniform(gap, 1.0);
    x = rng.bernoulli(0.5) ? mag : -mag;
  }
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace synclip::testkit
