#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "robovis/imaging/image.hpp"

namespace robovis {

/// Reads binary PGM (P5, maxval <= 255) or binary PPM (P6, converted to Rec. 601 luma).
Image read_pnm(const std::filesystem::path& path);
Image decode_pnm(std::span<const std::uint8_t> bytes);

/// Writes binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const Image& img);
std::string encode_pgm(const Image& img);

}  // namespace robovis
