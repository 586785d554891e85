#pragma once

#include <filesystem>

#include "panda/raster.hpp"

namespace panda {

/// Reads an 8-bit RGB PNG or baseline JPEG (detected by magic bytes).
/// Grey or alpha inputs are converted to RGB. Throws MissingFile / IoError.
RgbImage read_rgb_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. Output bytes depend only on the pixels.
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

}  // namespace panda
