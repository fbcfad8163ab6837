#include "gridloc/image_png.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "gridloc/occupancy_map.hpp"

namespace gridloc {

namespace {

struct PngReadState {
  const std::vector<uint8_t>* bytes;
  std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + len > st->bytes->size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, st->bytes->data() + st->offset, len);
  st->offset += len;
}

}  // namespace

bool looks_like_png(const std::vector<uint8_t>& bytes) {
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

GrayImage decode_png_gray8(const std::vector<uint8_t>& bytes) {
  if (!looks_like_png(bytes)) {
    throw MapParseError(MapError::kMalformedHeader, "not a PNG stream");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }

  GrayImage img;
  std::vector<png_bytep> rows;
  PngReadState state{&bytes, 0};

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MapParseError(MapError::kMalformedHeader, "corrupt PNG stream");
  }

  png_set_read_fn(png, &state, png_read_from_vector);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (w == 0 || h == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MapParseError(MapError::kZeroDimensions, "PNG with zero dimension");
  }
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MapParseError(MapError::kUnsupportedBitDepth,
                        "16-bit PNG not supported; expected 8-bit grayscale");
  }
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MapParseError(MapError::kUnsupportedFormat,
                        "PNG is not grayscale");
  }

  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  rows.resize(h);
  for (png_uint_32 j = 0; j < h; ++j) {
    rows[j] = img.pixels.data() + static_cast<std::size_t>(j) * w;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

namespace {

void write_png(const std::string& path, int width, int height, int color_type,
               const uint8_t* data, int channels) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open for writing: " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw std::runtime_error("PNG write failed: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  for (int j = 0; j < height; ++j) {
    rows[j] = const_cast<png_bytep>(data + static_cast<std::size_t>(j) * width * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

void write_png_gray8(const std::string& path, const GrayImage& img) {
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY,
            img.pixels.data(), 1);
}

void write_png_rgb8(const std::string& path, int width, int height,
                    const std::vector<uint8_t>& rgb) {
  write_png(path, width, height, PNG_COLOR_TYPE_RGB, rgb.data(), 3);
}

}  // namespace gridloc
