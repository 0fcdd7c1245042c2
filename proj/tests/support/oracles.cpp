#include "oracles.hpp"

#include <cmath>

#include "synclip/autodiff/ops.hpp"

namespace synclip::testkit {

autodiff::Tensor unit_rows(autodiff::Rng& rng, std::size_t n, std::size_t d) {
  return autodiff::ops::l2_normalize(autodiff::standard_normal(rng, {n, d}));
}

std::vector<std::size_t> brute_force_classify(const autodiff::Tensor& images, const autodiff::Tensor& classes) {
  const std::size_t n = images.dim(0), c = classes.dim(0), d = images.dim(1);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -INFINITY;
    for (std::size_t k = 0; k < c; ++k) {
      double dot = 0.0, ni = 0.0, nk = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        dot += images[i * d + j] * classes[k * d + j];
        ni += images[i * d + j] * images[i * d + j];
        nk += classes[k * d + j] * classes[k * d + j];
      }
      const double cosine = dot / std::sqrt(ni * nk);
      if (cosine > best) {
        best = cosine;
        out[i] = k;
      }
    }
  }
  return out;
}

}  // namespace synclip::testkit
