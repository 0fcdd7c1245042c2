#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace synclip::testkit {

training::ModelConfig tiny_model_config(std::size_t vocab_size) {
  training::ModelConfig c;
  c.image = {8, 2, 2, 8};
  c.text.vocab_size = vocab_size;
  c.text.max_seq_len = 6;
  c.text.model_dim = 8;
  c.text.num_layers = 1;
  c.text.num_heads = 2;
  c.text.embed_dim = 8;
  return c;
}

encoders::Vocabulary tiny_vocabulary() {
  const std::vector<std::string> words = {"disc", "macula", "normal", "pale", "red", "vessel"};
  return encoders::Vocabulary::from_words(words);
}

void assign_parameters(autodiff::ParameterSet& params, std::span<const autodiff::Tensor> values) {
  if (values.size() != params.size()) throw std::logic_error("assign_parameters: count mismatch");
  std::size_t i = 0;
  for (const auto& name : [&] {
         std::vector<std::string> names;
         for (const auto& e : params) names.push_back(e.name);
         return names;
       }()) {
    params.set(name, values[i++]);
  }
}

std::vector<autodiff::Tensor> parameter_values(const autodiff::ParameterSet& params) {
  std::vector<autodiff::Tensor> out;
  for (const auto& e : params) out.push_back(e.value);
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("synclip-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

}  // namespace synclip::testkit
