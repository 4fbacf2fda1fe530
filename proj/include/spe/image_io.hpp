// spe/image_io.hpp
//
// PGM (P2/P5) and PPM (P3/P6) reading and writing, maxval 255 or 65535.

#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spe/common.hpp"
#include "spe/metrics.hpp"

namespace spe {

namespace detail {

// Reads the next header token, skipping whitespace and '#' comments.
inline std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

inline int parse_int(const std::string& tok, const char* what) {
  require(!tok.empty(), std::string("image header: missing ") + what);
  for (char ch : tok)
    require(std::isdigit(static_cast<unsigned char>(ch)),
            std::string("image header: bad ") + what + " '" + tok + "'");
  return std::stoi(tok);
}

}  // namespace detail

inline ImageBuffer load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open image: " + path);
  const std::string magic = detail::next_token(in);
  int channels = 0;
  bool ascii = false;
  if (magic == "P2") { channels = 1; ascii = true; }
  else if (magic == "P5") { channels = 1; }
  else if (magic == "P3") { channels = 3; ascii = true; }
  else if (magic == "P6") { channels = 3; }
  else throw Error("unsupported image magic '" + magic + "' in " + path);

  const int width = detail::parse_int(detail::next_token(in), "width");
  const int height = detail::parse_int(detail::next_token(in), "height");
  const int maxval = detail::parse_int(detail::next_token(in), "maxval");
  require(width > 0 && height > 0, "image header: bad dimensions");
  require(maxval == 255 || maxval == 65535, "unsupported maxval (must be 255 or 65535)");

  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  std::vector<double> vals(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      const int v = detail::parse_int(detail::next_token(in), "pixel");
      require(v <= maxval, "pixel value exceeds maxval");
      vals[i] = static_cast<double>(v) / maxval;
    }
  } else {
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(static_cast<std::size_t>(in.gcount()) == raw.size(),
            "image data truncated: " + path);
    for (std::size_t i = 0; i < count; ++i) {
      int v;
      if (bytes == 1) {
        v = raw[i];
      } else {  // 16-bit samples are big-endian
        v = (raw[2 * i] << 8) | raw[2 * i + 1];
      }
      vals[i] = static_cast<double>(v) / maxval;
    }
  }
  return ImageBuffer(width, height, channels, std::move(vals));
}

inline void save_pnm(const ImageBuffer& img, const std::string& path, bool ascii = false) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write image: " + path);
  const bool gray = img.channels == 1;
  out << (gray ? (ascii ? "P2" : "P5") : (ascii ? "P3" : "P6")) << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::size_t col = 0;
  for (double v : img.values) {
    const int q = static_cast<int>(std::lround(v * 255.0));
    if (ascii) {
      out << q << (++col % 16 == 0 ? '\n' : ' ');
    } else {
      out.put(static_cast<char>(q));
    }
  }
  if (ascii && col % 16 != 0) out << '\n';
  require(out.good(), "failed writing image: " + path);
}

}  // namespace spe
