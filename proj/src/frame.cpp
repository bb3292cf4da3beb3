#include "sgcc/frame.hpp"

#include <fstream>

namespace sgcc {

Clip read_luma_raw(const std::string& path, int width, int height,
                   int frames) {
  if (width < 1 || height < 1 || frames < 1) {
    throw validation_error("raw read needs positive width/height/frames");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open video file " + path);
  Clip clip;
  clip.reserve(frames);
  const size_t plane_bytes = static_cast<size_t>(width) * height;
  for (int k = 0; k < frames; ++k) {
    Plane p(width, height);
    in.read(reinterpret_cast<char*>(p.pix.data()),
            static_cast<std::streamsize>(plane_bytes));
    if (static_cast<size_t>(in.gcount()) != plane_bytes) {
      throw validation_error("video file " + path + " ends at frame " +
                             std::to_string(k) + " of " +
                             std::to_string(frames));
    }
    clip.push_back(std::move(p));
  }
  return clip;
}

void write_luma_raw(const Clip& clip, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw validation_error("cannot write video file " + path);
  for (const Plane& p : clip) {
    out.write(reinterpret_cast<const char*>(p.pix.data()),
              static_cast<std::streamsize>(p.pix.size()));
  }
}

int64_t ctu_sse(const Plane& a, const Plane& b, const FrameLayout::Rect& r) {
  int64_t acc = 0;
  for (int y = r.y0; y < r.y1; ++y) {
    const uint8_t* pa = a.row(y);
    const uint8_t* pb = b.row(y);
    for (int x = r.x0; x < r.x1; ++x) {
      const int d = static_cast<int>(pa[x]) - static_cast<int>(pb[x]);
      acc += static_cast<int64_t>(d) * d;
    }
  }
  return acc;
}

std::vector<double> per_ctu_mse(const Plane& a, const Plane& b,
                                const FrameLayout& layout) {
  if (a.width != b.width || a.height != b.height ||
      a.width != layout.width || a.height != layout.height) {
    throw validation_error("plane dimensions do not match layout");
  }
  std::vector<double> mse(layout.n_ctus, 0.0);
  for (int n = 0; n < layout.n_ctus; ++n) {
    const FrameLayout::Rect r = layout.ctu_rect(n);
    mse[n] = static_cast<double>(ctu_sse(a, b, r)) /
             static_cast<double>(r.pixels());
  }
  return mse;
}

}  // namespace sgcc
