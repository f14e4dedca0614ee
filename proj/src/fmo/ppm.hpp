#pragma once

#include <string>

#include "fmo/image.hpp"

namespace fmo {

// Binary PPM (P6, 8-bit) frame I/O. Channel values map linearly to [0,1].
// P5 grayscale files are read as gray RGB. Throws std::runtime_error with a
// file diagnostic on malformed input.
Frame read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Frame& f);

// 8-bit binary PGM (P5) for masks and single-channel maps; values scaled by
// `scale` before quantization.
void write_pgm(const std::string& path, const GrayImage& g, double scale = 255.0);

}  // namespace fmo
