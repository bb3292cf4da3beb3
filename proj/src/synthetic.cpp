#include "sgcc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sgcc {

namespace {

uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Lattice value in [-1,1] for integer coordinates, keyed by seed and salt.
double lattice(int64_t ix, int64_t iy, uint64_t seed, uint64_t salt) {
  uint64_t h = mix64(seed ^ (salt * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ static_cast<uint64_t>(ix) * 0xd6e8feb86659fd93ULL);
  h = mix64(h ^ static_cast<uint64_t>(iy) * 0xc2b2ae3d27d4eb4fULL);
  return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

// Bilinear value noise at continuous coordinates with the given cell size.
double value_noise(double u, double v, double cell, uint64_t seed,
                   uint64_t salt) {
  const double su = u / cell;
  const double sv = v / cell;
  const int64_t iu = static_cast<int64_t>(std::floor(su));
  const int64_t iv = static_cast<int64_t>(std::floor(sv));
  const double fu = su - static_cast<double>(iu);
  const double fv = sv - static_cast<double>(iv);
  const double v00 = lattice(iu, iv, seed, salt);
  const double v10 = lattice(iu + 1, iv, seed, salt);
  const double v01 = lattice(iu, iv + 1, seed, salt);
  const double v11 = lattice(iu + 1, iv + 1, seed, salt);
  const double top = v00 + (v10 - v00) * fu;
  const double bot = v01 + (v11 - v01) * fu;
  return top + (bot - top) * fv;
}

double texture(double u, double v, uint64_t seed) {
  return value_noise(u, v, 6.0, seed, 1) +
         0.7 * value_noise(u, v, 24.0, seed, 2);
}

// Frame-independent sensor grain; survives quantization only at fine QPs,
// so coefficient work scales with rate the way coded video does.
double grain(int x, int y, int t, uint64_t seed) {
  return 8.0 * lattice(x, y, seed, 1000 + static_cast<uint64_t>(t));
}

uint8_t to_pixel(double v) {
  const long r = std::lround(v);
  return static_cast<uint8_t>(std::clamp(r, 8L, 247L));
}

// Quarter-sample velocity component, nonzero, magnitude <= 1.5 so that an
// 8-frame reference distance plus the warp stays inside the search range.
double pick_velocity(std::mt19937_64& rng) {
  static constexpr double mags[] = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  std::uniform_int_distribution<int> mag(0, 5);
  std::uniform_int_distribution<int> sign(0, 1);
  return (sign(rng) ? 1.0 : -1.0) * mags[mag(rng)];
}

Clip gen_static(int w, int h, int frames) {
  Clip clip;
  clip.reserve(frames);
  for (int t = 0; t < frames; ++t) clip.emplace_back(w, h, 128);
  return clip;
}

Clip gen_translating_texture(int w, int h, int frames, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double vx = pick_velocity(rng);
  const double vy = pick_velocity(rng);
  std::uniform_real_distribution<double> frac(0.2, 0.8);
  const double cx = frac(rng) * w;
  const double cy = frac(rng) * h;
  const double sigma = 0.22 * std::min(w, h);
  // A slow warp on top of the pan, so the motion field varies across the
  // frame instead of being one global vector.
  const double rot = (rng() % 2 ? 1.0 : -1.0) * 0.0008;
  const double zoom = (rng() % 2 ? 1.0 : -1.0) * 0.0006;
  const double wcx = 0.5 * w;
  const double wcy = 0.5 * h;

  Clip clip;
  clip.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    Plane p(w, h);
    const double ox = vx * t;
    const double oy = vy * t;
    const double scale = 1.0 + zoom * t;
    const double cosr = std::cos(rot * t);
    const double sinr = std::sin(rot * t);
    for (int y = 0; y < h; ++y) {
      uint8_t* row = p.row(y);
      const double sdy = (y - cy) / sigma;
      const double wy = y - wcy;
      for (int x = 0; x < w; ++x) {
        const double sdx = (x - cx) / sigma;
        const double amp =
            0.40 + 0.60 * std::exp(-0.5 * (sdx * sdx + sdy * sdy));
        const double wx = x - wcx;
        const double u = wcx + scale * (wx * cosr - wy * sinr) + ox;
        const double v = wcy + scale * (wx * sinr + wy * cosr) + oy;
        const double tex = texture(u, v, seed);
        row[x] = to_pixel(128.0 + 48.0 * amp * tex + grain(x, y, t, seed));
      }
    }
    clip.push_back(std::move(p));
  }
  return clip;
}

Clip gen_moving_gradient(int w, int h, int frames, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double radius = 0.2 * std::min(w, h);
  // Keep the disc inside the frame for the whole clip.
  const double travel_x = std::max(1.0, w - 4.0 * radius);
  const double vx = std::min(1.75, travel_x / std::max(frames, 1));
  const double vy = 0.25 * (rng() % 2 ? 1.0 : -1.0);
  const double x0 = 2.0 * radius;
  const double y0 = 0.5 * h;

  Clip clip;
  clip.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    Plane p(w, h);
    const double cx = x0 + vx * t;
    const double cy = y0 + vy * t;
    for (int y = 0; y < h; ++y) {
      uint8_t* row = p.row(y);
      for (int x = 0; x < w; ++x) {
        double v = 60.0 + 80.0 * (static_cast<double>(x) + y) / (w + h);
        const double dx = x - cx;
        const double dy = y - cy;
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d < radius) {
          const double mask = 0.5 * (1.0 + std::cos(3.14159265358979 * d /
                                                    radius));
          const double tex = texture(dx, dy, seed);
          v += mask * (45.0 + 50.0 * tex);
        }
        row[x] = to_pixel(v + grain(x, y, t, seed));
      }
    }
    clip.push_back(std::move(p));
  }
  return clip;
}

}  // namespace

Clip generate_clip(const std::string& name, int width, int height, int frames,
                   uint64_t seed) {
  if (width < 16 || height < 16 || frames < 1) {
    throw validation_error("clip needs width/height >= 16 and frames >= 1");
  }
  if (name == "static") return gen_static(width, height, frames);
  if (name == "translating_texture") {
    return gen_translating_texture(width, height, frames, seed);
  }
  if (name == "moving_gradient") {
    return gen_moving_gradient(width, height, frames, seed);
  }
  throw validation_error(
      "unknown clip '" + name +
      "', expected static|moving_gradient|translating_texture");
}

std::vector<SaliencyMap> derive_saliency(const Clip& clip,
                                         const FrameLayout& layout) {
  std::vector<SaliencyMap> maps;
  maps.reserve(clip.size());
  for (size_t t = 0; t < clip.size(); ++t) {
    const Plane& p = clip[t];
    std::vector<double> raw(layout.n_ctus, 0.0);
    for (int n = 0; n < layout.n_ctus; ++n) {
      const FrameLayout::Rect r = layout.ctu_rect(n);
      int64_t acc = 0;
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
          if (x + 1 < p.width) acc += std::abs(p.at(x + 1, y) - p.at(x, y));
          if (y + 1 < p.height) acc += std::abs(p.at(x, y + 1) - p.at(x, y));
          if (t > 0) acc += std::abs(p.at(x, y) - clip[t - 1].at(x, y));
        }
      }
      raw[n] = static_cast<double>(acc) / static_cast<double>(r.pixels());
    }
    maps.push_back(normalize_saliency(layout, raw));
  }
  return maps;
}

}  // namespace sgcc
