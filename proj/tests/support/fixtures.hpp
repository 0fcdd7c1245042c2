#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "synclip/autodiff/parameters.hpp"
#include "synclip/training/model.hpp"

namespace synclip::testkit {

/// 8x8 images, d = 8: small enough for full finite-difference sweeps.
training::ModelConfig tiny_model_config(std::size_t vocab_size);

encoders::Vocabulary tiny_vocabulary();

/// Copies `values` into the parameters of `params` in insertion order.
void assign_parameters(autodiff::ParameterSet& params, std::span<const autodiff::Tensor> values);

std::vector<autodiff::Tensor> parameter_values(const autodiff::ParameterSet& params);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace synclip::testkit
