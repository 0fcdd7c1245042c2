#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "synclip/autodiff/tensor.hpp"

namespace synclip::autodiff {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Insertion-ordered collection of named trainable tensors.
class ParameterSet {
 public:
  void add(std::string name, Tensor value);
  void set(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  /// Total number of scalar parameters.
  std::size_t element_count() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const std::vector<NamedTensor>& entries() const noexcept { return entries_; }

  /// Bitwise equality of names, order, shapes and values.
  bool identical(const ParameterSet& other) const;

 private:
  std::vector<NamedTensor> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace synclip::autodiff
