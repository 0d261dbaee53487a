#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "opsplit/grid.hpp"
#include "opsplit/model.hpp"

namespace opsplit {

/// Stacks the class token on top of the embedded patches:
/// row 0 = class_token, rows 1.. = patches * embed. Patches are (n_x - 1) x D.
GridFunction vit_pre(const Matrix& patches, const VitParams& p);

/// First row of u times the head matrix; length d.
std::vector<double> vit_post(const GridFunction& u, const VitParams& p);

/// vit_post(propagate(vit_pre(patches))).
std::vector<double> vit_forward(const Matrix& patches, const VitParams& vit, const ModelParams& m);

/// 8-bit grayscale image with intensities rescaled to [0, 1].
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major
};

/// Reads a binary (P5) or ASCII (P2) PGM file with maxval <= 255.
GrayImage read_pgm(const std::filesystem::path& path);

/// Cuts the image into non-overlapping patch x patch crops in row-major
/// order; each crop becomes one flattened row. Trailing pixels that do not
/// fill a whole patch are dropped.
Matrix extract_patches(const GrayImage& image, std::size_t patch);

}  // namespace opsplit
