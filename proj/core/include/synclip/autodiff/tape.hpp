#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "synclip/autodiff/tensor.hpp"

namespace synclip::autodiff {

/// Gradients of the loss with respect to the leaves reachable from it.
class GradientMap {
 public:
  const Tensor* find(NodeId id) const;
  const Tensor* find(const Tensor& leaf) const { return find(leaf.node_id()); }
  /// Throws TapeError if the leaf has no gradient.
  const Tensor& at(const Tensor& leaf) const;
  std::size_t size() const noexcept { return grads_.size(); }

  void insert(NodeId id, Tensor grad);

 private:
  std::unordered_map<NodeId, Tensor> grads_;
};

/// Gives an op's backward function write access to its inputs' gradient
/// accumulators. Buffers are zero-initialized and sized to the input.
class GradSink {
 public:
  virtual ~GradSink() = default;
  /// Accumulator for input `index`, or nullptr if that input is untracked.
  virtual double* buffer(std::size_t index) = 0;
};

using BackwardFn = std::function<void(std::span<const double> grad_out, GradSink& sink)>;

/// Records one forward pass. Consumed by a single call to backward().
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Appends a node; returns the output's node id.
  NodeId record(const char* op, std::span<const Tensor* const> inputs, BackwardFn backward);

  /// Reverse sweep from a single-element loss. Marks the tape consumed.
  GradientMap backward(const Tensor& loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }

 private:
  struct Input {
    NodeId id;
    Shape shape;
  };
  struct Node {
    const char* op;
    NodeId output;
    std::vector<Input> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// Tape that receives ops on the calling thread while this scope is alive.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape() noexcept;

}  // namespace synclip::autodiff
