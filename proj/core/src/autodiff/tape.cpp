#include "synclip/autodiff/tape.hpp"

#include <string>
#include <unordered_set>

namespace synclip::autodiff {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

Tape* active_tape() noexcept { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

const Tensor* GradientMap::find(NodeId id) const {
  auto it = grads_.find(id);
  return it == grads_.end() ? nullptr : &it->second;
}

const Tensor& GradientMap::at(const Tensor& leaf) const {
  const Tensor* g = find(leaf);
  if (!g) throw TapeError("no gradient recorded for tensor of shape " + to_string(leaf.shape()));
  return *g;
}

void GradientMap::insert(NodeId id, Tensor grad) { grads_.insert_or_assign(id, std::move(grad)); }

NodeId Tape::record(const char* op, std::span<const Tensor* const> inputs, BackwardFn backward) {
  if (consumed_) throw TapeError(std::string(op) + ": tape already consumed by backward()");
  Node node{op, next_node_id(), {}, std::move(backward)};
  node.inputs.reserve(inputs.size());
  for (const Tensor* t : inputs) {
    node.inputs.push_back({t->requires_grad() ? t->node_id() : NodeId{0}, t->shape()});
  }
  nodes_.push_back(std::move(node));
  return nodes_.back().output;
}

namespace {

using Accumulators = std::unordered_map<NodeId, std::vector<double>>;

class NodeSink final : public GradSink {
 public:
  NodeSink(Accumulators& acc, const std::vector<std::pair<NodeId, std::size_t>>& inputs)
      : acc_(acc), inputs_(inputs) {}

  double* buffer(std::size_t index) override {
    const auto [id, n] = inputs_.at(index);
    if (id == 0) return nullptr;
    auto& slot = acc_[id];
    if (slot.empty()) slot.assign(n, 0.0);
    return slot.data();
  }

 private:
  Accumulators& acc_;
  const std::vector<std::pair<NodeId, std::size_t>>& inputs_;
};

}  // namespace

GradientMap Tape::backward(const Tensor& loss) {
  if (consumed_) throw TapeError("backward: tape already consumed");
  if (loss.size() != 1) {
    throw TapeError("backward: loss must be a single-element tensor, got shape " + to_string(loss.shape()));
  }
  if (nodes_.empty()) throw TapeError("backward: tape is empty");
  if (loss.node_id() == 0) throw TapeError("backward: loss is not tracked on any tape");

  std::unordered_set<NodeId> produced;
  produced.reserve(nodes_.size());
  for (const auto& node : nodes_) produced.insert(node.output);
  if (!produced.count(loss.node_id())) throw TapeError("backward: loss was not recorded on this tape");

  std::unordered_map<NodeId, Shape> leaf_shapes;
  Accumulators acc;
  acc[loss.node_id()] = {1.0};

  std::vector<std::pair<NodeId, std::size_t>> inputs;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    auto found = acc.find(it->output);
    if (found == acc.end()) continue;
    std::vector<double> grad_out = std::move(found->second);
    acc.erase(found);

    inputs.clear();
    for (const auto& in : it->inputs) {
      inputs.emplace_back(in.id, numel(in.shape));
      if (in.id != 0 && !produced.count(in.id)) leaf_shapes.emplace(in.id, in.shape);
    }
    NodeSink sink(acc, inputs);
    it->backward(grad_out, sink);
  }

  GradientMap result;
  for (auto& [id, values] : acc) {
    auto shape = leaf_shapes.find(id);
    if (shape == leaf_shapes.end()) continue;
    result.insert(id, Tensor(shape->second, std::move(values)));
  }
  nodes_.clear();
  nodes_.shrink_to_fit();
  consumed_ = true;
  return result;
}

}  // namespace synclip::autodiff
