#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace synclip::autodiff {

using Shape = std::vector<std::size_t>;

/// Identifier of a tensor on the differentiation tape. Zero means untracked.
using NodeId = std::uint64_t;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when operand shapes do not conform; carries the op name and both shapes.
class ShapeError : public Error {
 public:
  ShapeError(std::string op, Shape lhs, Shape rhs, const std::string& detail = {});

  const std::string& op() const noexcept { return op_; }
  const Shape& lhs() const noexcept { return lhs_; }
  const Shape& rhs() const noexcept { return rhs_; }

 private:
  std::string op_;
  Shape lhs_;
  Shape rhs_;
};

/// Raised for arguments outside an op's documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised for misuse of the tape (non-scalar loss, consumed tape, ...).
class TapeError : public Error {
 public:
  using Error::Error;
};

/// Dense row-major array of doubles. Values are immutable once constructed;
/// copies share storage.
class Tensor {
 public:
  /// Rank-0 tensor holding 0.0.
  Tensor();
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  /// A trainable leaf: requires_grad and a fresh node id.
  static Tensor parameter(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_->size(); }
  std::size_t dim(std::ptrdiff_t axis) const;

  std::span<const double> data() const noexcept { return {data_->data(), data_->size()}; }
  const double* raw() const noexcept { return data_->data(); }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const noexcept { return requires_grad_; }
  NodeId node_id() const noexcept { return node_; }

  /// Same values, no gradient tracking.
  Tensor detached() const;
  /// Same values as a fresh trainable leaf.
  Tensor as_parameter() const;
  /// Same storage, new shape; numel must match. Not recorded on the tape.
  Tensor with_shape(Shape shape) const;

  /// Same storage tagged with a tape node; used by op implementations.
  Tensor with_node(NodeId node) const;

  /// Bitwise equality of shape and values.
  bool identical(const Tensor& other) const;

 private:
  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  bool requires_grad_ = false;
  NodeId node_ = 0;
};

NodeId next_node_id();

}  // namespace synclip::autodiff
