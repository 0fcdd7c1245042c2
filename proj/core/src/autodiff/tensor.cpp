#include "synclip/autodiff/tensor.hpp"

#include <atomic>
#include <cstring>
#include <sstream>

namespace synclip::autodiff {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::string shape_message(const std::string& op, const Shape& lhs, const Shape& rhs,
                          const std::string& detail) {
  std::string msg = op + ": shape mismatch " + to_string(lhs) + " vs " + to_string(rhs);
  if (!detail.empty()) msg += " (" + detail + ")";
  return msg;
}

void check_shape(const Shape& shape, std::size_t n) {
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor", shape, {}, "dimensions must be positive");
  }
  if (numel(shape) != n) {
    throw ShapeError("tensor", shape, Shape{n}, "element count does not match shape");
  }
}

}  // namespace

ShapeError::ShapeError(std::string op, Shape lhs, Shape rhs, const std::string& detail)
    : Error(shape_message(op, lhs, rhs, detail)),
      op_(std::move(op)),
      lhs_(std::move(lhs)),
      rhs_(std::move(rhs)) {}

NodeId next_node_id() {
  static std::atomic<NodeId> counter{0};
  return ++counter;
}

Tensor::Tensor() : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)) {
  check_shape(shape_, data.size());
  data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  Tensor t(std::move(shape), std::move(data));
  t.requires_grad_ = true;
  t.node_ = next_node_id();
  return t;
}

Tensor Tensor::with_node(NodeId node) const {
  Tensor t = *this;
  t.requires_grad_ = node != 0;
  t.node_ = node;
  return t;
}

std::size_t Tensor::dim(std::ptrdiff_t axis) const {
  const auto r = static_cast<std::ptrdiff_t>(rank());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw ShapeError("dim", shape_, {}, "axis out of range");
  return shape_[static_cast<std::size_t>(axis)];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item", shape_, Shape{1}, "tensor has more than one element");
  return (*data_)[0];
}

Tensor Tensor::detached() const {
  Tensor t = *this;
  t.requires_grad_ = false;
  t.node_ = 0;
  return t;
}

Tensor Tensor::as_parameter() const {
  Tensor t = *this;
  t.requires_grad_ = true;
  t.node_ = next_node_id();
  return t;
}

Tensor Tensor::with_shape(Shape shape) const {
  check_shape(shape, size());
  Tensor t = detached();
  t.shape_ = std::move(shape);
  return t;
}

bool Tensor::identical(const Tensor& other) const {
  return shape_ == other.shape_ && size() == other.size() &&
         std::memcmp(raw(), other.raw(), size() * sizeof(double)) == 0;
}

}  // namespace synclip::autodiff
