#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaze9/image/eye_strip.hpp"

namespace gaze9 {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// Encodes as 8-bit RGB PNG. Output is a pure function of the pixels.
inline std::vector<std::uint8_t> encode_png(const EyeStrip& strip) {
  std::vector<std::uint8_t> rgb(strip.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = quantize(strip.pixels()[i]);

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(strip.width());
  image.height = static_cast<png_uint_32>(strip.height());
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw ImageError(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw ImageError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

inline EyeStrip decode_png(const std::uint8_t* data, std::size_t size) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data, size)) {
    throw ImageError(std::string("png decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ImageError(std::string("png decode failed: ") + image.message);
  }
  std::vector<float> pixels(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) pixels[i] = static_cast<float>(rgb[i]) / 255.0f;
  return EyeStrip(static_cast<int>(image.height), static_cast<int>(image.width), std::move(pixels));
}

inline EyeStrip decode_png(const std::vector<std::uint8_t>& bytes) { return decode_png(bytes.data(), bytes.size()); }

inline void write_png(const std::filesystem::path& path, const EyeStrip& strip) {
  const auto bytes = encode_png(strip);
  std::ofstream os(path, std::ios::binary);
  if (!os || !os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw ImageError("cannot write " + path.string());
  }
}

inline EyeStrip read_png(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const ImageError& e) {
    throw ImageError(path.string() + ": " + e.what());
  }
}

}  // namespace gaze9
