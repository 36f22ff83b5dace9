#pragma once

#include <string>

#include "naima/tensor.hpp"

namespace naima {

// 8-bit binary PPM (P6). Values clamped to [0,1] and rounded to 255 levels.
void write_ppm(const std::string& path, const TensorF& rgb);
TensorF read_ppm(const std::string& path);  // -> 3 x H x W in [0,1]

// 16-bit binary PGM (P5, maxval 65535, big-endian samples per the netpbm
// format). `scale` converts stored integers to map units (e.g. 0.001 for
// millimeter-quantized meters).
void write_pgm16(const std::string& path, const TensorF& map, double scale);
TensorF read_pgm16(const std::string& path, double scale);

// Raw float32 grid: 16-byte header (magic 'NFG1', dtype code, height, width;
// all little-endian u32) followed by h*w float32. Lossless depth storage.
void write_f32_grid(const std::string& path, const TensorF& map);
TensorF read_f32_grid(const std::string& path);

// |a - b| rendered through a fixed blue->red ramp, annotated with
// "RMSE <value> CM" in the top-left corner. Deterministic bytes.
TensorF render_error_map(const TensorF& pred, const TensorF& gt, double rmse_cm);

// Single-channel map -> grayscale 3-channel image, min-max stretched.
TensorF render_grayscale(const TensorF& map);

// Stamp a short uppercase string (A-Z, 0-9, '.', ' ') with a 5x7 pixel font.
void stamp_text(TensorF& img, int y, int x, const std::string& text,
                float r, float g, float b);

}  // namespace naima
