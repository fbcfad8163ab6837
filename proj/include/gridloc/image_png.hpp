#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridloc {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major
};

bool looks_like_png(const std::vector<uint8_t>& bytes);

// Decodes an 8-bit grayscale PNG (gray or gray+alpha; palette and RGB are
// rejected, 16-bit depth is rejected). Throws MapParseError on failure.
GrayImage decode_png_gray8(const std::vector<uint8_t>& bytes);

void write_png_gray8(const std::string& path, const GrayImage& img);
void write_png_rgb8(const std::string& path, int width, int height,
                    const std::vector<uint8_t>& rgb);

}  // namespace gridloc
