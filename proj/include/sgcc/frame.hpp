#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgcc/core_types.hpp"

namespace sgcc {

// One 8-bit luma plane.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pix;

  Plane() = default;
  Plane(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pix(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const {
    return pix[static_cast<size_t>(y) * width + x];
  }
  void set(int x, int y, uint8_t v) {
    pix[static_cast<size_t>(y) * width + x] = v;
  }
  // Edge-replicated read; motion compensation may reach outside the frame.
  uint8_t at_clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return pix[static_cast<size_t>(y) * width + x];
  }
  const uint8_t* row(int y) const {
    return pix.data() + static_cast<size_t>(y) * width;
  }
  uint8_t* row(int y) { return pix.data() + static_cast<size_t>(y) * width; }

  bool operator==(const Plane&) const = default;
};

using Clip = std::vector<Plane>;

// Raw 8-bit luma, frame-major. Throws validation_error when the file is
// shorter than width*height*frames.
Clip read_luma_raw(const std::string& path, int width, int height,
                   int frames);
void write_luma_raw(const Clip& clip, const std::string& path);

// Sum of squared differences over one CTU, exact in integers.
int64_t ctu_sse(const Plane& a, const Plane& b, const FrameLayout::Rect& r);

// Per-CTU mean squared error between two equally sized planes.
std::vector<double> per_ctu_mse(const Plane& a, const Plane& b,
                                const FrameLayout& layout);

}  // namespace sgcc
