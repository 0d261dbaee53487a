#include "opsplit/vit.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "opsplit/splitting.hpp"

namespace opsplit {

GridFunction vit_pre(const Matrix& patches, const VitParams& p) {
  if (patches.cols() != p.embed.rows()) {
    throw DimensionError("vit_pre: patch length " + std::to_string(patches.cols()) +
                         " does not match embedding rows " + std::to_string(p.embed.rows()));
  }
  if (p.class_token.size() != p.embed.cols()) {
    throw DimensionError("vit_pre: class token length does not match embedding width");
  }
  const Matrix embedded = matmul(patches, p.embed);
  GridFunction u(patches.rows() + 1, p.embed.cols());
  auto first = u.row(0);
  for (std::size_t l = 0; l < first.size(); ++l) first[l] = p.class_token[l];
  for (std::size_t k = 0; k < embedded.rows(); ++k) {
    const auto src = embedded.row(k);
    auto dst = u.row(k + 1);
    for (std::size_t l = 0; l < dst.size(); ++l) dst[l] = src[l];
  }
  return u;
}

std::vector<double> vit_post(const GridFunction& u, const VitParams& p) {
  if (u.cols() != p.head.rows()) {
    throw DimensionError("vit_post: state width " + std::to_string(u.cols()) +
                         " does not match head rows " + std::to_string(p.head.rows()));
  }
  std::vector<double> out(p.head.cols(), 0.0);
  const auto cls = u.row(0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = 0.0;
    for (std::size_t l = 0; l < cls.size(); ++l) s += cls[l] * p.head(l, c);
    out[c] = s;
  }
  return out;
}

std::vector<double> vit_forward(const Matrix& patches, const VitParams& vit, const ModelParams& m) {
  return vit_post(propagate(vit_pre(patches, vit), m), vit);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

std::size_t parse_extent(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PGM header in " + path.string() + ": '" + tok + "'");
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw std::runtime_error(path.string() + " is not a grayscale PGM (magic '" + magic + "')");
  }
  GrayImage img;
  img.width = parse_extent(next_token(in), path);
  img.height = parse_extent(next_token(in), path);
  const std::size_t maxval = parse_extent(next_token(in), path);
  if (img.width == 0 || img.height == 0) throw std::runtime_error(path.string() + ": empty image");
  if (maxval == 0 || maxval > 255) {
    throw std::runtime_error(path.string() + ": only 8-bit PGM is supported");
  }

  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);
  if (magic == "P5") {
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
      throw std::runtime_error(path.string() + ": truncated pixel data");
    }
    for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<double>(raw[i]) / static_cast<double>(maxval);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw std::runtime_error(path.string() + ": truncated pixel data");
      img.pixels[i] = static_cast<double>(parse_extent(tok, path)) / static_cast<double>(maxval);
    }
  }
  return img;
}

Matrix extract_patches(const GrayImage& image, std::size_t patch) {
  if (patch == 0) throw ConfigError("extract_patches: patch size must be positive");
  const std::size_t ph = image.height / patch;
  const std::size_t pw = image.width / patch;
  if (ph == 0 || pw == 0) throw DimensionError("extract_patches: image smaller than one patch");
  Matrix out(ph * pw, patch * patch);
  for (std::size_t bi = 0; bi < ph; ++bi) {
    for (std::size_t bj = 0; bj < pw; ++bj) {
      auto dst = out.row(bi * pw + bj);
      for (std::size_t i = 0; i < patch; ++i) {
        for (std::size_t j = 0; j < patch; ++j) {
          dst[i * patch + j] = image.pixels[(bi * patch + i) * image.width + bj * patch + j];
        }
      }
    }
  }
  return out;
}

}  // namespace opsplit
