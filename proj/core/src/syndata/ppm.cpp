#include "synclip/syndata/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "synclip/syndata/errors.hpp"

namespace synclip::syndata {

using autodiff::Tensor;

namespace {

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

void check_image(const Tensor& image, const char* op) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw autodiff::ShapeError(op, image.shape(), {3, 0, 0}, "expected [3, H, W]");
  }
}

class HeaderReader {
 public:
  HeaderReader(const std::vector<unsigned char>& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

  std::string token() {
    skip_space();
    std::string t;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) t.push_back(static_cast<char>(bytes_[pos_++]));
    if (t.empty()) fail("truncated header");
    return t;
  }

  std::size_t number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        t.size() > 9) {
      fail("bad header field '" + t + "'");
    }
    return std::stoul(t);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing raster separator");
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError("ppm " + path_ + ": " + what); }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor quantize_8bit(const Tensor& image) {
  std::vector<double> out(image.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = to_byte(image[i]) / 255.0;
  return Tensor(image.shape(), std::move(out));
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  check_image(image, "write_ppm");
  const std::size_t h = image.dim(1), w = image.dim(2);
  std::string bytes = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t header = bytes.size();
  bytes.resize(header + 3 * h * w);
  for (std::size_t i = 0; i < h * w; ++i) {
    for (std::size_t c = 0; c < 3; ++c) bytes[header + 3 * i + c] = static_cast<char>(to_byte(image[c * h * w + i]));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing image file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  HeaderReader reader(bytes, path.string());
  if (reader.token() != "P6") reader.fail("not a binary P6 file");
  const std::size_t w = reader.number();
  const std::size_t h = reader.number();
  const std::size_t maxval = reader.number();
  if (w == 0 || h == 0) reader.fail("zero dimension");
  if (maxval == 0 || maxval > 255) reader.fail("only 8-bit maxval is supported");
  const std::size_t offset = reader.raster_offset();
  if (bytes.size() - offset < 3 * w * h) reader.fail("truncated raster");
  std::vector<double> data(3 * w * h);
  const double scale = static_cast<double>(maxval);
  for (std::size_t i = 0; i < w * h; ++i) {
    for (std::size_t c = 0; c < 3; ++c) data[c * w * h + i] = bytes[offset + 3 * i + c] / scale;
  }
  return Tensor({3, h, w}, std::move(data));
}

Tensor resize_nearest(const Tensor& image, std::size_t size) {
  check_image(image, "resize_nearest");
  const std::size_t h = image.dim(1), w = image.dim(2);
  if (h == size && w == size) return image;
  std::vector<double> out(3 * size * size);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t si = i * h / size;
      for (std::size_t j = 0; j < size; ++j) out[(c * size + i) * size + j] = image[(c * h + si) * w + j * w / size];
    }
  }
  return Tensor({3, size, size}, std::move(out));
}

}  // namespace synclip::syndata
