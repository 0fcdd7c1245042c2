#include "synclip/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <string>

#include "synclip/autodiff/tape.hpp"

namespace synclip::autodiff::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

template <class Fn>
Tensor finish(const char* op, std::initializer_list<const Tensor*> inputs, const Tensor& out, Fn&& backward) {
  Tape* tape = active_tape();
  if (!tape) return out;
  const bool tracked = std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
  if (!tracked) return out;
  const NodeId id = tape->record(op, std::span<const Tensor* const>(inputs.begin(), inputs.size()),
                                 BackwardFn(std::forward<Fn>(backward)));
  return out.with_node(id);
}

std::size_t normalize_axis(const char* op, const Shape& shape, std::ptrdiff_t axis) {
  const auto r = static_cast<std::ptrdiff_t>(shape.size());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw ShapeError(op, shape, {}, "axis out of range");
  return static_cast<std::size_t>(axis);
}

// outer x n x inner decomposition around one axis.
struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

// ---------------------------------------------------------------- broadcasting

struct Broadcast {
  Shape out;
  std::vector<std::size_t> a_stride;  // per output axis; 0 where broadcast
  std::vector<std::size_t> b_stride;
  bool same = false;
};

std::vector<std::size_t> contiguous_strides(const Shape& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) st[i - 1] = st[i] * shape[i];
  return st;
}

Broadcast plan_broadcast(const char* op, const Shape& a, const Shape& b) {
  Broadcast p;
  if (a == b) {
    p.out = a;
    p.same = true;
    return p;
  }
  const std::size_t r = std::max(a.size(), b.size());
  p.out.assign(r, 1);
  p.a_stride.assign(r, 0);
  p.b_stride.assign(r, 0);
  const auto as = contiguous_strides(a);
  const auto bs = contiguous_strides(b);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t oa = r - a.size(), ob = r - b.size();
    const std::size_t da = i >= oa ? a[i - oa] : 1;
    const std::size_t db = i >= ob ? b[i - ob] : 1;
    if (da != db && da != 1 && db != 1) throw ShapeError(op, a, b, "shapes are not broadcastable");
    p.out[i] = std::max(da, db);
    if (i >= oa && da != 1) p.a_stride[i] = as[i - oa];
    if (i >= ob && db != 1) p.b_stride[i] = bs[i - ob];
  }
  return p;
}

// Calls f(out_index, a_index, b_index) for every output element.
template <class F>
void for_each_broadcast(const Broadcast& p, F&& f) {
  const std::size_t total = numel(p.out);
  if (p.same) {
    for (std::size_t i = 0; i < total; ++i) f(i, i, i);
    return;
  }
  const std::size_t r = p.out.size();
  std::vector<std::size_t> idx(r, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < total; ++i) {
    f(i, ia, ib);
    for (std::size_t d = r; d-- > 0;) {
      ++idx[d];
      ia += p.a_stride[d];
      ib += p.b_stride[d];
      if (idx[d] < p.out[d]) break;
      ia -= p.a_stride[d] * idx[d];
      ib -= p.b_stride[d] * idx[d];
      idx[d] = 0;
    }
  }
}

template <class Combine, class GradA, class GradB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Combine combine, GradA grad_a, GradB grad_b) {
  auto plan = plan_broadcast(op, a.shape(), b.shape());
  std::vector<double> out(numel(plan.out));
  const double* pa = a.raw();
  const double* pb = b.raw();
  for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) { out[i] = combine(pa[ia], pb[ib]); });
  Tensor result(plan.out, std::move(out));
  return finish(op, {&a, &b}, result, [plan, a, b, grad_a, grad_b](std::span<const double> g, GradSink& sink) {
    double* ga = sink.buffer(0);
    double* gb = sink.buffer(1);
    const double* pa = a.raw();
    const double* pb = b.raw();
    for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
      if (ga) ga[ia] += grad_a(g[i], pa[ia], pb[ib]);
      if (gb) gb[ib] += grad_b(g[i], pa[ia], pb[ib]);
    });
  });
}

template <class Forward, class Derivative>
Tensor unary(const char* op, const Tensor& x, Forward forward, Derivative derivative) {
  std::vector<double> out(x.size());
  const double* px = x.raw();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(px[i]);
  Tensor result(x.shape(), std::move(out));
  return finish(op, {&x}, result, [x, result, derivative](std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    if (!gx) return;
    const double* px = x.raw();
    const double* py = result.raw();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * derivative(px[i], py[i]);
  });
}

// ---------------------------------------------------------------- im2col

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t out_channels, kh, kw;
  std::size_t out_h, out_w;
  std::size_t stride, padding;

  std::size_t patch() const { return channels * kh * kw; }
  std::size_t plane() const { return out_h * out_w; }
};

// One sample: cols[(c, i, j), (oh, ow)] from x[c, h, w].
void im2col(const ConvGeometry& g, const double* x, double* cols) {
  const std::size_t plane = g.plane();
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* src = x + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        double* dst = cols + ((c * g.kh + ki) * g.kw + kj) * plane;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) - static_cast<std::ptrdiff_t>(g.padding);
          double* drow = dst + oh * g.out_w;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(drow, drow + g.out_w, 0.0);
            continue;
          }
          const double* srow = src + static_cast<std::size_t>(ih) * g.width;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) - static_cast<std::ptrdiff_t>(g.padding);
            drow[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.width)) ? 0.0 : srow[iw];
          }
        }
      }
    }
  }
}

void col2im_accumulate(const ConvGeometry& g, const double* cols, double* dx) {
  const std::size_t plane = g.plane();
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* dst = dx + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const double* src = cols + ((c * g.kh + ki) * g.kw + kj) * plane;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) - static_cast<std::ptrdiff_t>(g.padding);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
          double* drow = dst + static_cast<std::size_t>(ih) * g.width;
          const double* srow = src + oh * g.out_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) - static_cast<std::ptrdiff_t>(g.padding);
            if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.width)) drow[iw] += srow[ow];
          }
        }
      }
    }
  }
}

Tensor conv2d_impl(const Tensor& input, const Tensor& weight, const Tensor* bias, Conv2dOptions opt) {
  const auto& xs = input.shape();
  const auto& ws = weight.shape();
  if (xs.size() != 4 || ws.size() != 4) throw ShapeError("conv2d", xs, ws, "expected [B,C,H,W] input and [O,C,kh,kw] weight");
  if (xs[1] != ws[1]) throw ShapeError("conv2d", xs, ws, "input channels differ from weight channels");
  if (opt.stride == 0) throw ShapeError("conv2d", xs, ws, "stride must be positive");
  if (xs[2] + 2 * opt.padding < ws[2] || xs[3] + 2 * opt.padding < ws[3]) {
    throw ShapeError("conv2d", xs, ws, "kernel larger than padded input");
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != ws[0])) throw ShapeError("conv2d", ws, bias->shape(), "bias must be [O]");

  ConvGeometry g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2], ws[3], 0, 0, opt.stride, opt.padding};
  g.out_h = (g.height + 2 * g.padding - g.kh) / g.stride + 1;
  g.out_w = (g.width + 2 * g.padding - g.kw) / g.stride + 1;
  const std::size_t plane = g.plane();
  const std::size_t in_size = g.channels * g.height * g.width;
  const std::size_t out_size = g.out_channels * plane;

  // im2col one sample at a time keeps the column buffer cache-sized.
  std::vector<double> out(g.batch * out_size);
  std::vector<double> cols(g.patch() * plane);
  const auto w = ConstMap(weight.raw(), g.out_channels, g.patch());
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(g, input.raw() + b * in_size, cols.data());
    auto y = MutMap(out.data() + b * out_size, g.out_channels, plane);
    y.noalias() = w * ConstMap(cols.data(), g.patch(), plane);
    if (bias) {
      for (std::size_t o = 0; o < g.out_channels; ++o) y.row(static_cast<Eigen::Index>(o)).array() += (*bias)[o];
    }
  }
  Tensor result(Shape{g.batch, g.out_channels, g.out_h, g.out_w}, std::move(out));
  auto backward = [g, input, weight, has_bias = bias != nullptr](std::span<const double> grad, GradSink& sink) {
    const std::size_t plane = g.plane();
    const std::size_t in_size = g.channels * g.height * g.width;
    const std::size_t out_size = g.out_channels * plane;
    double* gx = sink.buffer(0);
    double* gw = sink.buffer(1);
    double* gb = has_bias ? sink.buffer(2) : nullptr;
    const auto w = ConstMap(weight.raw(), g.out_channels, g.patch());
    std::vector<double> cols(g.patch() * plane);
    RowMat dcols;
    for (std::size_t b = 0; b < g.batch; ++b) {
      const auto dy = ConstMap(grad.data() + b * out_size, g.out_channels, plane);
      if (gw) {
        im2col(g, input.raw() + b * in_size, cols.data());
        MutMap(gw, g.out_channels, g.patch()).noalias() += dy * ConstMap(cols.data(), g.patch(), plane).transpose();
      }
      if (gx) {
        dcols.noalias() = w.transpose() * dy;
        col2im_accumulate(g, dcols.data(), gx + b * in_size);
      }
      if (gb) {
        // Plain loop: Eigen's reductions peel by address, which breaks run-to-run bit equality.
        const double* row = grad.data() + b * out_size;
        for (std::size_t o = 0; o < g.out_channels; ++o, row += plane) {
          double acc = 0.0;
          for (std::size_t k = 0; k < plane; ++k) acc += row[k];
          gb[o] += acc;
        }
      }
    }
  };
  if (bias) return finish("conv2d", {&input, &weight, bias}, result, backward);
  return finish("conv2d", {&input, &weight}, result, backward);
}

}  // namespace

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return x * factor; }, [factor](double, double) { return factor; });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return unary(
      "gelu", x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [](double v, double) { return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v); });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) throw DomainError("log: input must be strictly positive, got " + std::to_string(v));
  }
  return unary(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

// ---------------------------------------------------------------- matmul

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as.size() < 2 || bs.size() < 2) throw ShapeError("matmul", as, bs, "operands must have rank >= 2");
  const std::size_t m = as[as.size() - 2], k = as.back();
  const std::size_t kb = bs[bs.size() - 2], n = bs.back();
  if (k != kb) throw ShapeError("matmul", as, bs, "inner dimensions differ");
  const bool shared_rhs = bs.size() == 2;
  if (!shared_rhs && (bs.size() != as.size() || !std::equal(as.begin(), as.end() - 2, bs.begin()))) {
    throw ShapeError("matmul", as, bs, "batch dimensions differ");
  }
  std::size_t batch = 1;
  for (std::size_t i = 0; i + 2 < as.size(); ++i) batch *= as[i];

  Shape out_shape(as.begin(), as.end() - 1);
  out_shape.push_back(n);
  std::vector<double> out(batch * m * n);
  if (shared_rhs) {
    MutMap(out.data(), batch * m, n).noalias() = ConstMap(a.raw(), batch * m, k) * ConstMap(b.raw(), k, n);
  } else {
    for (std::size_t s = 0; s < batch; ++s) {
      MutMap(out.data() + s * m * n, m, n).noalias() =
          ConstMap(a.raw() + s * m * k, m, k) * ConstMap(b.raw() + s * k * n, k, n);
    }
  }
  Tensor result(std::move(out_shape), std::move(out));
  return finish("matmul", {&a, &b}, result, [a, b, m, k, n, batch, shared_rhs](std::span<const double> g, GradSink& sink) {
    double* ga = sink.buffer(0);
    double* gb = sink.buffer(1);
    if (shared_rhs) {
      ConstMap G(g.data(), batch * m, n);
      if (ga) MutMap(ga, batch * m, k).noalias() += G * ConstMap(b.raw(), k, n).transpose();
      if (gb) MutMap(gb, k, n).noalias() += ConstMap(a.raw(), batch * m, k).transpose() * G;
      return;
    }
    for (std::size_t s = 0; s < batch; ++s) {
      ConstMap G(g.data() + s * m * n, m, n);
      if (ga) MutMap(ga + s * m * k, m, k).noalias() += G * ConstMap(b.raw() + s * k * n, k, n).transpose();
      if (gb) MutMap(gb + s * k * n, k, n).noalias() += ConstMap(a.raw() + s * m * k, m, k).transpose() * G;
    }
  });
}

// ---------------------------------------------------------------- conv2d

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dOptions options) {
  return conv2d_impl(input, weight, &bias, options);
}

Tensor conv2d(const Tensor& input, const Tensor& weight, Conv2dOptions options) {
  return conv2d_impl(input, weight, nullptr, options);
}

// ---------------------------------------------------------------- normalization

namespace {

Tensor layer_norm_impl(const Tensor& x, const Tensor* gamma, const Tensor* beta, double eps) {
  if (x.rank() == 0) throw ShapeError("layer_norm", x.shape(), {}, "input must have rank >= 1");
  const std::size_t d = x.shape().back();
  if (gamma && (gamma->shape() != Shape{d} || beta->shape() != Shape{d})) {
    throw ShapeError("layer_norm", x.shape(), gamma->shape(), "gamma and beta must be [D]");
  }
  const std::size_t rows = x.size() / d;
  std::vector<double> xhat(x.size()), inv(rows), out(x.size());
  const double* px = x.raw();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = px + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    inv[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * inv[r];
      xhat[r * d + j] = h;
      out[r * d + j] = gamma ? h * (*gamma)[j] + (*beta)[j] : h;
    }
  }
  Tensor result(x.shape(), std::move(out));
  const Tensor g_copy = gamma ? *gamma : Tensor();
  auto backward = [d, rows, xhat = std::move(xhat), inv = std::move(inv), g_copy, affine = gamma != nullptr](
                      std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    double* gg = affine ? sink.buffer(1) : nullptr;
    double* gb = affine ? sink.buffer(2) : nullptr;
    std::vector<double> ghat(d);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* grow = g.data() + r * d;
      const double* hrow = xhat.data() + r * d;
      if (gg)
        for (std::size_t j = 0; j < d; ++j) gg[j] += grow[j] * hrow[j];
      if (gb)
        for (std::size_t j = 0; j < d; ++j) gb[j] += grow[j];
      if (!gx) continue;
      double mean_g = 0.0, mean_gh = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        ghat[j] = affine ? grow[j] * g_copy[j] : grow[j];
        mean_g += ghat[j];
        mean_gh += ghat[j] * hrow[j];
      }
      mean_g /= static_cast<double>(d);
      mean_gh /= static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += inv[r] * (ghat[j] - mean_g - hrow[j] * mean_gh);
    }
  };
  if (gamma) return finish("layer_norm", {&x, gamma, beta}, result, std::move(backward));
  return finish("layer_norm", {&x}, result, std::move(backward));
}

}  // namespace

Tensor layer_norm(const Tensor& x, double epsilon) { return layer_norm_impl(x, nullptr, nullptr, epsilon); }

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double epsilon) {
  return layer_norm_impl(x, &gamma, &beta, epsilon);
}

Tensor softmax(const Tensor& x, std::ptrdiff_t axis) {
  if (x.rank() == 0) throw ShapeError("softmax", x.shape(), {}, "softmax over an empty axis");
  const auto ax = normalize_axis("softmax", x.shape(), axis);
  const auto s = split_at(x.shape(), ax);
  std::vector<double> out(x.size());
  const double* px = x.raw();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.n * s.inner + i;
      double mx = px[base];
      for (std::size_t j = 1; j < s.n; ++j) mx = std::max(mx, px[base + j * s.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const double e = std::exp(px[base + j * s.inner] - mx);
        out[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.n; ++j) out[base + j * s.inner] /= total;
    }
  }
  Tensor result(x.shape(), std::move(out));
  return finish("softmax", {&x}, result, [s, result](std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    if (!gx) return;
    const double* y = result.raw();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.n * s.inner + i;
        double dot = 0.0;
        for (std::size_t j = 0; j < s.n; ++j) dot += g[base + j * s.inner] * y[base + j * s.inner];
        for (std::size_t j = 0; j < s.n; ++j) {
          const std::size_t k = base + j * s.inner;
          gx[k] += y[k] * (g[k] - dot);
        }
      }
    }
  });
}

// ---------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result = Tensor::scalar(total);
  return finish("sum", {&x}, result, [n = x.size()](std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    if (!gx) return;
    for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor sum(const Tensor& x, std::ptrdiff_t axis) {
  const auto ax = normalize_axis("sum", x.shape(), axis);
  const auto s = split_at(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  std::vector<double> out(s.outer * s.inner, 0.0);
  const double* px = x.raw();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t j = 0; j < s.n; ++j)
      for (std::size_t i = 0; i < s.inner; ++i) out[o * s.inner + i] += px[(o * s.n + j) * s.inner + i];
  Tensor result(std::move(out_shape), std::move(out));
  return finish("sum_axis", {&x}, result, [s](std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    if (!gx) return;
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t j = 0; j < s.n; ++j)
        for (std::size_t i = 0; i < s.inner; ++i) gx[(o * s.n + j) * s.inner + i] += g[o * s.inner + i];
  });
}

Tensor mean(const Tensor& x, std::ptrdiff_t axis) {
  const auto ax = normalize_axis("mean", x.shape(), axis);
  return scale(sum(x, static_cast<std::ptrdiff_t>(ax)), 1.0 / static_cast<double>(x.shape()[ax]));
}

// ---------------------------------------------------------------- shape ops

Tensor permute(const Tensor& x, std::span<const std::size_t> axes) {
  const auto& xs = x.shape();
  if (axes.size() != xs.size()) throw ShapeError("permute", xs, Shape(axes.begin(), axes.end()), "axis count differs from rank");
  std::vector<bool> seen(xs.size(), false);
  for (auto a : axes) {
    if (a >= xs.size() || seen[a]) throw ShapeError("permute", xs, Shape(axes.begin(), axes.end()), "not a permutation");
    seen[a] = true;
  }
  const auto in_strides = contiguous_strides(xs);
  Shape out_shape(xs.size());
  std::vector<std::size_t> stride(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out_shape[i] = xs[axes[i]];
    stride[i] = in_strides[axes[i]];
  }
  // Flat output index -> flat input index.
  std::vector<std::size_t> mapping(x.size());
  {
    std::vector<std::size_t> idx(out_shape.size(), 0);
    std::size_t src = 0;
    for (std::size_t i = 0; i < mapping.size(); ++i) {
      mapping[i] = src;
      for (std::size_t d = out_shape.size(); d-- > 0;) {
        ++idx[d];
        src += stride[d];
        if (idx[d] < out_shape[d]) break;
        src -= stride[d] * idx[d];
        idx[d] = 0;
      }
    }
  }
  std::vector<double> out(x.size());
  const double* px = x.raw();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = px[mapping[i]];
  Tensor result(std::move(out_shape), std::move(out));
  return finish("permute", {&x}, result, [mapping = std::move(mapping)](std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    if (!gx) return;
    for (std::size_t i = 0; i < g.size(); ++i) gx[mapping[i]] += g[i];
  });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) throw ShapeError("transpose", x.shape(), {}, "rank must be >= 2");
  std::vector<std::size_t> axes(x.rank());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  std::swap(axes[axes.size() - 1], axes[axes.size() - 2]);
  return permute(x, axes);
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) throw ShapeError("reshape", x.shape(), shape, "element counts differ");
  Tensor result = x.with_shape(std::move(shape));
  return finish("reshape", {&x}, result, [](std::span<const double> g, GradSink& sink) {
    double* gx = sink.buffer(0);
    if (!gx) return;
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Tensor concat(std::span<const Tensor> parts, std::ptrdiff_t axis) {
  if (parts.empty()) throw ShapeError("concat", {}, {}, "no inputs");
  const auto ax = normalize_axis("concat", parts[0].shape(), axis);
  Shape out_shape = parts[0].shape();
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    if (p.rank() != parts[0].rank()) throw ShapeError("concat", parts[0].shape(), p.shape(), "ranks differ");
    for (std::size_t d = 0; d < p.rank(); ++d) {
      if (d != ax && p.shape()[d] != parts[0].shape()[d]) {
        throw ShapeError("concat", parts[0].shape(), p.shape(), "non-concatenated dimensions differ");
      }
    }
    out_shape[ax] += p.shape()[ax];
  }
  const auto s = split_at(out_shape, ax);
  std::vector<double> out(numel(out_shape));
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.shape()[ax] * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy(p.raw() + o * w, p.raw() + (o + 1) * w, out.data() + o * s.n * s.inner + offset);
    }
    widths.push_back(w);
    offset += w;
  }
  Tensor result(std::move(out_shape), std::move(out));

  Tape* tape = active_tape();
  const bool tracked = std::any_of(parts.begin(), parts.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (!tape || !tracked) return result;
  std::vector<const Tensor*> inputs;
  for (const auto& p : parts) inputs.push_back(&p);
  const NodeId id = tape->record("concat", inputs, [s, widths](std::span<const double> g, GradSink& sink) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (double* gp = sink.buffer(k)) {
        for (std::size_t o = 0; o < s.outer; ++o) {
          const double* src = g.data() + o * s.n * s.inner + offset;
          for (std::size_t i = 0; i < widths[k]; ++i) gp[o * widths[k] + i] += src[i];
        }
      }
      offset += widths[k];
    }
  });
  return result.with_node(id);
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> indices, Shape index_shape) {
  if (table.rank() != 2) throw ShapeError("embedding_lookup", table.shape(), index_shape, "table must be [V, D]");
  if (numel(index_shape) != indices.size()) {
    throw ShapeError("embedding_lookup", index_shape, Shape{indices.size()}, "index shape does not match index count");
  }
  const std::size_t vocab = table.shape()[0], d = table.shape()[1];
  for (auto id : indices) {
    if (id >= vocab) {
      throw DomainError("embedding_lookup: index " + std::to_string(id) + " out of range for table with " +
                        std::to_string(vocab) + " rows");
    }
  }
  std::vector<double> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy(table.raw() + indices[i] * d, table.raw() + (indices[i] + 1) * d, out.data() + i * d);
  }
  Shape out_shape = std::move(index_shape);
  out_shape.push_back(d);
  Tensor result(std::move(out_shape), std::move(out));
  std::vector<std::size_t> ids(indices.begin(), indices.end());
  return finish("embedding_lookup", {&table}, result, [ids = std::move(ids), d](std::span<const double> g, GradSink& sink) {
    double* gt = sink.buffer(0);
    if (!gt) return;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) gt[ids[i] * d + j] += g[i * d + j];
  });
}

Tensor l2_normalize(const Tensor& x, std::ptrdiff_t axis, double epsilon) {
  const auto ax = normalize_axis("l2_normalize", x.shape(), axis);
  const auto s = split_at(x.shape(), ax);
  std::vector<double> out(x.size()), norms(s.outer * s.inner);
  const double* px = x.raw();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.n * s.inner + i;
      double sq = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) sq += px[base + j * s.inner] * px[base + j * s.inner];
      const double norm = std::sqrt(sq);
      norms[o * s.inner + i] = norm;
      const double denom = std::max(norm, epsilon);
      for (std::size_t j = 0; j < s.n; ++j) out[base + j * s.inner] = px[base + j * s.inner] / denom;
    }
  }
  Tensor result(x.shape(), std::move(out));
  return finish("l2_normalize", {&x}, result,
                [s, result, norms = std::move(norms), epsilon](std::span<const double> g, GradSink& sink) {
                  double* gx = sink.buffer(0);
                  if (!gx) return;
                  const double* y = result.raw();
                  for (std::size_t o = 0; o < s.outer; ++o) {
                    for (std::size_t i = 0; i < s.inner; ++i) {
                      const std::size_t base = o * s.n * s.inner + i;
                      const double norm = norms[o * s.inner + i];
                      if (norm <= epsilon) {
                        for (std::size_t j = 0; j < s.n; ++j) gx[base + j * s.inner] += g[base + j * s.inner] / epsilon;
                        continue;
                      }
                      double dot = 0.0;
                      for (std::size_t j = 0; j < s.n; ++j) dot += g[base + j * s.inner] * y[base + j * s.inner];
                      for (std::size_t j = 0; j < s.n; ++j) {
                        const std::size_t k = base + j * s.inner;
                        gx[k] += (g[k] - y[k] * dot) / norm;
                      }
                    }
                  }
                });
}

}  // namespace synclip::autodiff::ops
