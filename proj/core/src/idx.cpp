#include "alignlab/classifier.hpp"
#include "alignlab/error.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace alignlab {

namespace {

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4))
    fail(ErrorKind::format, std::string("truncated IDX ") + what + " header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::string hex_magic(std::uint32_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setfill('0') << std::setw(8) << v;
  return s.str();
}

void expect_magic(std::uint32_t got, std::uint32_t want, const char* what) {
  if (got != want)
    fail(ErrorKind::format, std::string("IDX ") + what + " file has magic " + hex_magic(got) +
                                ", expected " + hex_magic(want));
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

LabeledImages load_idx(std::istream& images, std::istream& labels) {
  expect_magic(read_u32(images, "image"), kIdxImageMagic, "image");
  const std::uint32_t n = read_u32(images, "image");
  const std::uint32_t rows = read_u32(images, "image");
  const std::uint32_t cols = read_u32(images, "image");
  expect_magic(read_u32(labels, "label"), kIdxLabelMagic, "label");
  const std::uint32_t n_labels = read_u32(labels, "label");
  if (n != n_labels)
    fail(ErrorKind::format, "IDX image count " + std::to_string(n) + " differs from label count " +
                                std::to_string(n_labels));

  const auto pixels = static_cast<std::size_t>(rows) * cols;
  LabeledImages out;
  out.images.resize(n, static_cast<Index>(pixels));
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!images.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
      fail(ErrorKind::format, "IDX image file truncated at image " + std::to_string(i) + " of " +
                                  std::to_string(n));
    for (std::size_t p = 0; p < pixels; ++p) out.images(i, static_cast<Index>(p)) = buf[p] / 255.0;
  }
  out.labels.resize(n);
  if (n > 0 && !labels.read(reinterpret_cast<char*>(out.labels.data()), n))
    fail(ErrorKind::format, "IDX label file truncated: expected " + std::to_string(n) + " labels");
  out.validate();
  return out;
}

LabeledImages load_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  std::ifstream images = open_binary(images_path);
  std::ifstream labels = open_binary(labels_path);
  try {
    return load_idx(images, labels);
  } catch (const Error& e) {
    fail(e.kind(), std::string(e.what()) + " (" + images_path.string() + ", " + labels_path.string() + ")");
  }
}

void write_idx(std::ostream& images, std::ostream& labels, const LabeledImages& data,
               std::uint32_t rows, std::uint32_t cols) {
  data.validate();
  if (static_cast<Index>(rows) * cols != data.pixels())
    fail(ErrorKind::shape, "image shape does not match pixel count");
  const auto n = static_cast<std::uint32_t>(data.size());
  write_u32(images, kIdxImageMagic);
  write_u32(images, n);
  write_u32(images, rows);
  write_u32(images, cols);
  for (Index i = 0; i < data.size(); ++i)
    for (Index p = 0; p < data.pixels(); ++p)
      images.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * data.images(i, p)))));
  write_u32(labels, kIdxLabelMagic);
  write_u32(labels, n);
  labels.write(reinterpret_cast<const char*>(data.labels.data()), static_cast<std::streamsize>(n));
  if (!images || !labels) fail(ErrorKind::io, "IDX write failed");
}

std::uint64_t label_checksum(const std::vector<std::uint8_t>& labels) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : labels) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace alignlab
