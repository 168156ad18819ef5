#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tdal/dataset.hpp"
#include "tdal/error.hpp"

namespace tdal {

namespace detail {

inline std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw io_error(what + ": truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

/// IDX image/label pair (the MNIST file layout). Pixels scaled to [0,1].
inline Dataset load_idx(const std::string& image_path, const std::string& label_path) {
  std::ifstream img(image_path, std::ios::binary);
  if (!img) throw io_error("load_idx: cannot open " + image_path);
  std::ifstream lab(label_path, std::ios::binary);
  if (!lab) throw io_error("load_idx: cannot open " + label_path);

  const std::uint32_t img_magic = detail::read_u32_be(img, image_path);
  if (img_magic != 0x00000803u)
    throw io_error("load_idx: bad image magic in " + image_path);
  const std::uint32_t n_img = detail::read_u32_be(img, image_path);
  const std::uint32_t rows = detail::read_u32_be(img, image_path);
  const std::uint32_t cols = detail::read_u32_be(img, image_path);

  const std::uint32_t lab_magic = detail::read_u32_be(lab, label_path);
  if (lab_magic != 0x00000801u)
    throw io_error("load_idx: bad label magic in " + label_path);
  const std::uint32_t n_lab = detail::read_u32_be(lab, label_path);

  if (n_img != n_lab)
    throw io_error("load_idx: image count " + std::to_string(n_img) +
                   " does not match label count " + std::to_string(n_lab));
  if (n_img == 0) throw io_error("load_idx: empty dataset");

  const std::size_t d = std::size_t(rows) * std::size_t(cols);
  std::vector<unsigned char> pixels(std::size_t(n_img) * d);
  if (!img.read(reinterpret_cast<char*>(pixels.data()),
                static_cast<std::streamsize>(pixels.size())))
    throw io_error("load_idx: truncated image data in " + image_path);

  std::vector<unsigned char> raw_labels(n_img);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()),
                static_cast<std::streamsize>(raw_labels.size())))
    throw io_error("load_idx: truncated label data in " + label_path);

  Dataset ds;
  ds.features = Matrix(n_img, d);
  for (std::size_t k = 0; k < pixels.size(); ++k)
    ds.features.data()[k] = static_cast<double>(pixels[k]) / 255.0;
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  return ds;
}

/// Appends `extra` below `base`, offsetting its labels past base's classes.
/// Used to combine a target-bearing dataset with a redundant one.
inline Dataset concat_with_class_offset(const Dataset& base, const Dataset& extra) {
  require_dims(base.dim() == extra.dim(), "concat_with_class_offset: feature dims differ");
  const int offset = base.class_count();
  Dataset out;
  out.features = Matrix(base.size() + extra.size(), base.dim());
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto src = base.features.row(i);
    auto dst = out.features.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  for (std::size_t i = 0; i < extra.size(); ++i) {
    auto src = extra.features.row(i);
    auto dst = out.features.row(base.size() + i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  out.labels = base.labels;
  out.labels.reserve(base.size() + extra.size());
  for (int y : extra.labels) out.labels.push_back(y + offset);
  return out;
}

}  // namespace tdal
