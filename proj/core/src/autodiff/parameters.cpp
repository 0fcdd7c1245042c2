#include "synclip/autodiff/parameters.hpp"

namespace synclip::autodiff {

void ParameterSet::add(std::string name, Tensor value) {
  if (index_.count(name)) throw Error("ParameterSet: duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value)});
}

void ParameterSet::set(const std::string& name, Tensor value) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("ParameterSet: unknown parameter '" + name + "'");
  auto& slot = entries_[it->second].value;
  if (slot.shape() != value.shape()) throw ShapeError("ParameterSet::set(" + name + ")", slot.shape(), value.shape());
  slot = std::move(value);
}

bool ParameterSet::contains(const std::string& name) const { return index_.count(name) != 0; }

const Tensor& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("ParameterSet: unknown parameter '" + name + "'");
  return entries_[it->second].value;
}

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool ParameterSet::identical(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (!entries_[i].value.identical(other.entries_[i].value)) return false;
  }
  return true;
}

}  // namespace synclip::autodiff
