#include "sgcc/proxy_codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace sgcc {

namespace {

template <typename Fn>
void for_each_index(int count, ExecMode mode, Fn&& fn) {
  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) fn(i);
  } else {
    for (int i = 0; i < count; ++i) fn(i);
  }
}

}  // namespace

GopStructure GopStructure::make(int num_frames, int gop_size,
                                int intra_period) {
  if (num_frames < 1) throw validation_error("GOP needs at least one frame");
  if (gop_size < 1 || (gop_size & (gop_size - 1)) != 0) {
    throw validation_error("gop_size must be a power of two");
  }
  if (intra_period % gop_size != 0) {
    throw validation_error("intra_period must be a multiple of gop_size");
  }
  GopStructure gop;
  gop.gop_size = gop_size;
  gop.intra_period = intra_period;
  gop.frames.resize(num_frames);
  for (int poc = 0; poc < num_frames; ++poc) {
    gop.frames[poc].poc = poc;
  }

  auto set_intra = [&](int poc) {
    FrameInfo& f = gop.frames[poc];
    f.is_intra = true;
    f.layer = 0;
    f.qp_offset = 0;
    f.refs.clear();
  };

  // Binary hierarchy between two coded anchors: the midpoint references
  // both ends and is coded first, then each half recursively.
  auto fill_between = [&](auto&& self, int lo, int hi, int layer) -> void {
    if (hi - lo < 2) return;
    const int mid = (lo + hi) / 2;
    FrameInfo& f = gop.frames[mid];
    f.layer = layer;
    f.qp_offset = layer;
    f.refs = {lo, hi};
    gop.coding_order.push_back(mid);
    self(self, lo, mid, layer + 1);
    self(self, mid, hi, layer + 1);
  };

  set_intra(0);
  gop.coding_order.push_back(0);
  int anchor = 0;
  while (anchor + gop_size < num_frames) {
    const int next = anchor + gop_size;
    if (next % intra_period == 0) {
      set_intra(next);
    } else {
      FrameInfo& f = gop.frames[next];
      f.layer = 1;
      f.qp_offset = 1;
      f.refs = {anchor};
    }
    gop.coding_order.push_back(next);
    fill_between(fill_between, anchor, next, 2);
    anchor = next;
  }
  // Tail after the last anchor: low-delay chain on the previous frame.
  for (int poc = anchor + 1; poc < num_frames; ++poc) {
    FrameInfo& f = gop.frames[poc];
    f.layer = 4;
    f.qp_offset = 4;
    f.refs = {poc - 1};
    gop.coding_order.push_back(poc);
  }
  return gop;
}

SkipPattern skip_pattern(int g) {
  if (g < 0 || g > 3) throw validation_error("g level must be in {0,1,2,3}");
  // Positions: 0=TL, 1=TR, 2=BL, 3=BR. Copies always source an MC-computed
  // position of the same group.
  SkipPattern p;
  p.g = g;
  switch (g) {
    case 0:
      break;
    case 1:
      p.copied[3] = true;
      p.source[3] = 0;
      break;
    case 2:
      p.copied[1] = true;
      p.source[1] = 0;
      p.copied[3] = true;
      p.source[3] = 2;
      break;
    case 3:
      p.copied[1] = true;
      p.source[1] = 0;
      p.copied[2] = true;
      p.source[2] = 0;
      p.copied[3] = true;
      p.source[3] = 0;
      break;
  }
  return p;
}

CostProfile CostProfile::parse(const std::string& text) {
  CostProfile p;
  double v[3];
  std::stringstream ss(text);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',')) {
    if (i >= 3) throw validation_error("cost profile needs 'mc,df,base'");
    try {
      v[i++] = std::stod(tok);
    } catch (const std::exception&) {
      throw validation_error("bad cost profile value '" + tok + "'");
    }
  }
  if (i != 3) throw validation_error("cost profile needs 'mc,df,base'");
  if (v[0] <= 0.0 || v[1] <= 0.0 || v[2] <= 0.0) {
    throw validation_error("cost profile weights must be positive");
  }
  p.mc = v[0];
  p.df = v[1];
  p.base = v[2];
  return p;
}

std::string CostProfile::format() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g", mc, df, base);
  return buf;
}

CtuCost FrameCost::totals() const {
  CtuCost t;
  for (const CtuCost& c : ctus) {
    t.mc_ops += c.mc_ops;
    t.df_ops += c.df_ops;
    t.base_ops += c.base_ops;
  }
  return t;
}

double FrameCost::weighted_ctu(const CtuCost& c, const CostProfile& p) {
  return p.mc * static_cast<double>(c.mc_ops) +
         p.df * static_cast<double>(c.df_ops) +
         p.base * static_cast<double>(c.base_ops);
}

double FrameCost::weighted(const CostProfile& p) const {
  double acc = 0.0;
  for (const CtuCost& c : ctus) acc += weighted_ctu(c, p);
  return acc;
}

namespace {

// 8-tap luma interpolation filters for quarter-sample positions 1..3.
constexpr int kTaps[4][8] = {
    {0, 0, 0, 64, 0, 0, 0, 0},
    {-1, 4, -10, 58, 17, -5, 1, 0},
    {-1, 4, -11, 40, 40, -11, 4, -1},
    {0, 1, -5, 17, 58, -10, 4, -1},
};

inline uint8_t clip_pixel(int v) {
  return static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

// Predicted sample at quarter-sample reference position (qx, qy), with
// edge replication outside the frame. Adds the interpolation MAC count
// (1 for a plain copy) to *ops.
uint8_t predict_sample(const Plane& ref, int qx, int qy, int64_t* ops) {
  const int ix = qx >> 2;
  const int fx = qx & 3;
  const int iy = qy >> 2;
  const int fy = qy & 3;
  if (fx == 0 && fy == 0) {
    *ops += 1;
    return ref.at_clamped(ix, iy);
  }
  if (fy == 0) {
    int acc = 0;
    for (int k = 0; k < 8; ++k) {
      acc += kTaps[fx][k] * ref.at_clamped(ix - 3 + k, iy);
    }
    *ops += 8;
    return clip_pixel((acc + 32) >> 6);
  }
  if (fx == 0) {
    int acc = 0;
    for (int k = 0; k < 8; ++k) {
      acc += kTaps[fy][k] * ref.at_clamped(ix, iy - 3 + k);
    }
    *ops += 8;
    return clip_pixel((acc + 32) >> 6);
  }
  int mid[8];
  for (int j = 0; j < 8; ++j) {
    int acc = 0;
    for (int k = 0; k < 8; ++k) {
      acc += kTaps[fx][k] * ref.at_clamped(ix - 3 + k, iy - 3 + j);
    }
    mid[j] = acc;
  }
  int acc = 0;
  for (int j = 0; j < 8; ++j) acc += kTaps[fy][j] * mid[j];
  *ops += 72;
  return clip_pixel((acc + 2048) >> 12);
}

double quant_step(int qp) { return std::exp2((qp - 4) / 6.0); }

// Coefficient processing cost grows with coded magnitude, standing in for
// entropy decoding whose share rises at low QP.
inline int coeff_ops(int16_t level) {
  if (level == 0) return 0;
  int m = std::abs(level);
  int bits = 0;
  while (m) {
    ++bits;
    m >>= 1;
  }
  return 2 + 3 * bits;
}

inline int16_t quantize(int residual, double step) {
  return static_cast<int16_t>(std::lround(residual / step));
}

inline int dequant(int16_t level, double step) {
  return static_cast<int>(std::lround(level * step));
}

struct BlockRect {
  int x0, y0, x1, y1;
};

// Deblocking constants: engage on visible discontinuities, leave genuine
// edges and flat areas alone.
constexpr int kDeblockBeta = 48;
constexpr int kDeblockTc = 8;

void deblock_pass_rows(Plane& frame, std::span<const uint8_t> flags,
                       const FrameLayout& layout, FrameCost* cost,
                       int ctu_row, bool vertical) {
  const int w = frame.width;
  const int h = frame.height;
  const int y0 = ctu_row * layout.ctu_size;
  const int y1 = std::min(y0 + layout.ctu_size, h);
  if (vertical) {
    for (int x = 8; x < w; x += 8) {
      const int owner = ctu_row * layout.ctu_cols + x / layout.ctu_size;
      if (flags[owner]) continue;
      int64_t ops = 0;
      for (int y = y0; y < y1; ++y) {
        uint8_t* row = frame.row(y);
        const int p0 = row[x - 1];
        const int q0 = row[x];
        ops += 1;
        const int d = std::abs(p0 - q0);
        if (d > 0 && d < kDeblockBeta) {
          const int p1 = row[x - 2];
          const int q1 = x + 1 < w ? row[x + 1] : row[x];
          int delta = ((q0 - p0) * 4 + (p1 - q1) + 4) >> 3;
          delta = std::clamp(delta, -kDeblockTc, kDeblockTc);
          row[x - 1] = clip_pixel(p0 + delta);
          row[x] = clip_pixel(q0 - delta);
          ops += 4;
        }
      }
      if (cost) cost->ctus[owner].df_ops += ops;
    }
  } else {
    for (int y = std::max(8, y0); y < y1; y += 8) {
      uint8_t* row0 = frame.row(y - 1);
      uint8_t* row1 = frame.row(y);
      const uint8_t* rowp = frame.row(y - 2);
      const uint8_t* rowq = y + 1 < h ? frame.row(y + 1) : frame.row(y);
      const int owner_row = (y / layout.ctu_size) * layout.ctu_cols;
      for (int cx = 0; cx < layout.ctu_cols; ++cx) {
        const int owner = owner_row + cx;
        if (flags[owner]) continue;
        const int xa = cx * layout.ctu_size;
        const int xb = std::min(xa + layout.ctu_size, w);
        int64_t ops = 0;
        for (int x = xa; x < xb; ++x) {
          const int p0 = row0[x];
          const int q0 = row1[x];
          ops += 1;
          const int d = std::abs(p0 - q0);
          if (d > 0 && d < kDeblockBeta) {
            int delta = ((q0 - p0) * 4 + (rowp[x] - rowq[x]) + 4) >> 3;
            delta = std::clamp(delta, -kDeblockTc, kDeblockTc);
            row0[x] = clip_pixel(p0 + delta);
            row1[x] = clip_pixel(q0 - delta);
            ops += 4;
          }
        }
        if (cost) cost->ctus[owner].df_ops += ops;
      }
    }
  }
}

}  // namespace

void deblock_frame(Plane& frame, std::span<const uint8_t> f_flags,
                   const FrameLayout& layout, FrameCost* cost,
                   ExecMode mode) {
  if (static_cast<int>(f_flags.size()) != layout.n_ctus) {
    throw validation_error("deblock flags length does not match CTU count");
  }
  if (cost && cost->ctus.empty()) cost->ctus.resize(layout.n_ctus);
  // Vertical edges over the whole frame, then horizontal edges. CTU rows
  // touch disjoint samples within a pass (edges are 8 apart, the filter
  // writes only the two samples astride each edge).
  for_each_index(layout.ctu_rows, mode, [&](int r) {
    deblock_pass_rows(frame, f_flags, layout, cost, r, true);
  });
  for_each_index(layout.ctu_rows, mode, [&](int r) {
    deblock_pass_rows(frame, f_flags, layout, cost, r, false);
  });
}

namespace {

int64_t block_sad(const Plane& src, const Plane& ref, const BlockRect& b,
                  int dx, int dy, int64_t stop_at) {
  int64_t acc = 0;
  for (int y = b.y0; y < b.y1; ++y) {
    const uint8_t* srow = src.row(y);
    for (int x = b.x0; x < b.x1; ++x) {
      acc += std::abs(static_cast<int>(srow[x]) -
                      static_cast<int>(ref.at_clamped(x + dx, y + dy)));
    }
    if (acc >= stop_at) return acc;
  }
  return acc;
}

int64_t block_sad_quarter(const Plane& src, const Plane& ref,
                          const BlockRect& b, int qmx, int qmy) {
  int64_t acc = 0;
  int64_t unused = 0;
  for (int y = b.y0; y < b.y1; ++y) {
    const uint8_t* srow = src.row(y);
    for (int x = b.x0; x < b.x1; ++x) {
      const uint8_t p = predict_sample(ref, 4 * x + qmx, 4 * y + qmy,
                                       &unused);
      acc += std::abs(static_cast<int>(srow[x]) - static_cast<int>(p));
    }
  }
  return acc;
}

// Full-search integer motion estimation followed by half- then
// quarter-sample refinement. Ties keep the first candidate in scan order.
MotionVector search_block(const Plane& src, const Plane& ref,
                          const BlockRect& b, int range) {
  int best_dx = 0, best_dy = 0;
  int64_t best = std::numeric_limits<int64_t>::max();
  for (int dy = -range; dy <= range; ++dy) {
    for (int dx = -range; dx <= range; ++dx) {
      const int64_t sad = block_sad(src, ref, b, dx, dy, best);
      if (sad < best) {
        best = sad;
        best_dx = dx;
        best_dy = dy;
      }
    }
  }
  int qmx = 4 * best_dx;
  int qmy = 4 * best_dy;
  best = block_sad_quarter(src, ref, b, qmx, qmy);
  for (int step = 2; step >= 1; --step) {
    int cx = qmx, cy = qmy;
    for (int oy = -step; oy <= step; oy += step) {
      for (int ox = -step; ox <= step; ox += step) {
        if (ox == 0 && oy == 0) continue;
        const int64_t sad = block_sad_quarter(src, ref, b, cx + ox, cy + oy);
        if (sad < best) {
          best = sad;
          qmx = cx + ox;
          qmy = cy + oy;
        }
      }
    }
  }
  return MotionVector{static_cast<int16_t>(qmx), static_cast<int16_t>(qmy)};
}

BlockRect block_rect(const FrameLayout& layout, int mc_block, int bx,
                     int by) {
  BlockRect r;
  r.x0 = bx * mc_block;
  r.y0 = by * mc_block;
  r.x1 = std::min(r.x0 + mc_block, layout.width);
  r.y1 = std::min(r.y0 + mc_block, layout.height);
  return r;
}

uint8_t predict_pixel(const BlockMotion& bm,
                      const std::vector<const Plane*>& refs, int x, int y,
                      int64_t* ops) {
  if (refs.size() == 1) {
    return predict_sample(*refs[0], 4 * x + bm.mv[0].x, 4 * y + bm.mv[0].y,
                          ops);
  }
  const uint8_t p0 =
      predict_sample(*refs[0], 4 * x + bm.mv[0].x, 4 * y + bm.mv[0].y, ops);
  const uint8_t p1 =
      predict_sample(*refs[1], 4 * x + bm.mv[1].x, 4 * y + bm.mv[1].y, ops);
  *ops += 1;  // bi-prediction average
  return static_cast<uint8_t>((static_cast<int>(p0) + p1 + 1) >> 1);
}

// Shared reconstruction core: motion compensation with the plan's skip
// pattern, residual add, then in-loop deblocking gated by the plan's f
// flags. The encoder uses the same path (without a plan) to build its
// references, so a plan-less decode is bit-identical to them.
Plane reconstruct_frame(const FrameLayout& layout, int mc_block,
                        const FrameData& fd,
                        const std::vector<Plane>& recon_by_poc,
                        const ControlPlan* plan, FrameCost* cost,
                        ExecMode mode) {
  const int w = layout.width;
  const int h = layout.height;
  if (layout.ctu_size > 64) {
    throw validation_error("proxy codec supports ctu_size up to 64");
  }
  Plane out(w, h);
  FrameCost fc;
  fc.ctus.resize(layout.n_ctus);
  const double step = quant_step(fd.qp);

  if (fd.is_intra) {
    for_each_index(layout.n_ctus, mode, [&](int n) {
      const FrameLayout::Rect r = layout.ctu_rect(n);
      CtuCost& cc = fc.ctus[n];
      for (int y = r.y0; y < r.y1; ++y) {
        uint8_t* orow = out.row(y);
        const int16_t* qrow = fd.resid.data() + static_cast<size_t>(y) * w;
        for (int x = r.x0; x < r.x1; ++x) {
          const int16_t q = qrow[x];
          orow[x] = clip_pixel(128 + dequant(q, step));
          cc.base_ops += 1 + coeff_ops(q);
        }
      }
    });
  } else {
    std::vector<const Plane*> refs;
    refs.reserve(fd.refs.size());
    for (int rpoc : fd.refs) refs.push_back(&recon_by_poc[rpoc]);
    const int bcols = (w + mc_block - 1) / mc_block;

    for_each_index(layout.n_ctus, mode, [&](int n) {
      const FrameLayout::Rect r = layout.ctu_rect(n);
      CtuCost& cc = fc.ctus[n];
      const int g = plan ? plan->g[n] : 0;
      const SkipPattern pat = skip_pattern(g);
      std::array<uint8_t, 64 * 64> pred{};

      const int bx0 = r.x0 / mc_block;
      const int bx1 = (r.x1 - 1) / mc_block;
      const int by0 = r.y0 / mc_block;
      const int by1 = (r.y1 - 1) / mc_block;
      for (int by = by0; by <= by1; ++by) {
        for (int bx = bx0; bx <= bx1; ++bx) {
          const BlockRect b = block_rect(layout, mc_block, bx, by);
          const BlockMotion& bm = fd.motion[by * bcols + bx];
          // MC at computed positions.
          for (int y = b.y0; y < b.y1; ++y) {
            for (int x = b.x0; x < b.x1; ++x) {
              const int pos = ((y & 1) << 1) | (x & 1);
              if (pat.copied[pos]) continue;
              pred[(y - r.y0) * 64 + (x - r.x0)] =
                  predict_pixel(bm, refs, x, y, &cc.mc_ops);
            }
          }
          // NN copies from computed neighbours of the same 2x2 group.
          if (g > 0) {
            for (int y = b.y0; y < b.y1; ++y) {
              for (int x = b.x0; x < b.x1; ++x) {
                const int pos = ((y & 1) << 1) | (x & 1);
                if (!pat.copied[pos]) continue;
                const int src = pat.source[pos];
                const int sx = (x & ~1) | (src & 1);
                const int sy = (y & ~1) | (src >> 1);
                pred[(y - r.y0) * 64 + (x - r.x0)] =
                    pred[(sy - r.y0) * 64 + (sx - r.x0)];
                cc.mc_ops += 1;
              }
            }
          }
        }
      }
      // Residual add over the whole CTU.
      for (int y = r.y0; y < r.y1; ++y) {
        uint8_t* orow = out.row(y);
        const int16_t* qrow = fd.resid.data() + static_cast<size_t>(y) * w;
        for (int x = r.x0; x < r.x1; ++x) {
          const int16_t q = qrow[x];
          orow[x] = clip_pixel(pred[(y - r.y0) * 64 + (x - r.x0)] +
                               dequant(q, step));
          cc.base_ops += 1 + coeff_ops(q);
        }
      }
    });
  }

  if (plan) {
    deblock_frame(out, plan->f, layout, &fc, mode);
  } else {
    std::vector<uint8_t> zeros(layout.n_ctus, 0);
    deblock_frame(out, zeros, layout, &fc, mode);
  }
  if (cost) *cost = std::move(fc);
  return out;
}

}  // namespace

ProxySequence encode_sequence(const Clip& clip, const GopStructure& gop,
                              std::span<const int> base_qps,
                              const FrameLayout& layout,
                              const EncodeConfig& config) {
  const int num_frames = static_cast<int>(clip.size());
  if (num_frames < 1) throw validation_error("encode needs at least 1 frame");
  if (static_cast<int>(gop.frames.size()) != num_frames) {
    throw validation_error("GOP frame count does not match clip");
  }
  if (static_cast<int>(base_qps.size()) != num_frames) {
    throw validation_error("QP list length does not match clip");
  }
  for (const Plane& p : clip) {
    if (p.width != layout.width || p.height != layout.height) {
      throw validation_error("frame dimensions do not match layout");
    }
  }
  if (layout.ctu_size % config.mc_block != 0) {
    throw validation_error("mc_block must divide ctu_size");
  }

  ProxySequence seq;
  seq.layout = layout;
  seq.gop = gop;
  seq.mc_block = config.mc_block;
  seq.search_range = config.search_range;
  seq.frames.resize(num_frames);

  const int w = layout.width;
  const int h = layout.height;
  const int bcols = seq.block_cols();
  const int brows = seq.block_rows();
  std::vector<Plane> recon(num_frames);

  for (int poc : gop.coding_order) {
    const GopStructure::FrameInfo& info = gop.frames[poc];
    FrameData fd;
    fd.poc = poc;
    fd.qp = std::clamp(base_qps[poc] + info.qp_offset, 0, 51);
    fd.layer = info.layer;
    fd.is_intra = info.is_intra;
    fd.refs = info.refs;
    const double step = quant_step(fd.qp);
    const Plane& src = clip[poc];
    fd.resid.resize(static_cast<size_t>(w) * h);

    if (fd.is_intra) {
      for_each_index(h, config.mode, [&](int y) {
        const uint8_t* srow = src.row(y);
        int16_t* qrow = fd.resid.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
          qrow[x] = quantize(static_cast<int>(srow[x]) - 128, step);
        }
      });
    } else {
      fd.motion.resize(static_cast<size_t>(bcols) * brows);
      std::vector<const Plane*> refs;
      for (int rpoc : fd.refs) refs.push_back(&recon[rpoc]);

      for_each_index(bcols * brows, config.mode, [&](int bi) {
        const BlockRect b =
            block_rect(layout, seq.mc_block, bi % bcols, bi / bcols);
        for (size_t ri = 0; ri < refs.size(); ++ri) {
          fd.motion[bi].mv[ri] =
              search_block(src, *refs[ri], b, config.search_range);
        }
      });
      for_each_index(bcols * brows, config.mode, [&](int bi) {
        const BlockRect b =
            block_rect(layout, seq.mc_block, bi % bcols, bi / bcols);
        const BlockMotion& bm = fd.motion[bi];
        int64_t unused = 0;
        for (int y = b.y0; y < b.y1; ++y) {
          const uint8_t* srow = src.row(y);
          int16_t* qrow = fd.resid.data() + static_cast<size_t>(y) * w;
          for (int x = b.x0; x < b.x1; ++x) {
            const uint8_t p = predict_pixel(bm, refs, x, y, &unused);
            qrow[x] = quantize(static_cast<int>(srow[x]) - p, step);
          }
        }
      });
    }

    seq.frames[poc] = std::move(fd);
    recon[poc] = reconstruct_frame(layout, seq.mc_block, seq.frames[poc],
                                   recon, nullptr, nullptr, config.mode);
  }
  return seq;
}

DecodeResult decode_sequence(const ProxySequence& seq,
                             std::span<const ControlPlan> plans,
                             ExecMode mode) {
  const int num_frames = static_cast<int>(seq.frames.size());
  if (!plans.empty()) {
    if (static_cast<int>(plans.size()) != num_frames) {
      throw validation_error("plan count does not match frame count");
    }
    for (const ControlPlan& p : plans) {
      if (static_cast<int>(p.f.size()) != seq.layout.n_ctus ||
          static_cast<int>(p.g.size()) != seq.layout.n_ctus) {
        throw validation_error("plan size does not match layout CTU count");
      }
      for (int n = 0; n < seq.layout.n_ctus; ++n) {
        if (p.f[n] > 1 || p.g[n] > 3) {
          throw validation_error("plan has out-of-range f or g value");
        }
      }
    }
  }
  DecodeResult out;
  out.frames.resize(num_frames);
  out.costs.resize(num_frames);
  for (int poc : seq.gop.coding_order) {
    const ControlPlan* plan = plans.empty() ? nullptr : &plans[poc];
    out.frames[poc] = reconstruct_frame(seq.layout, seq.mc_block,
                                        seq.frames[poc], out.frames, plan,
                                        &out.costs[poc], mode);
  }
  return out;
}

namespace {

ControlPlan uniform_plan(int n_ctus, uint8_t f, uint8_t g) {
  ControlPlan p;
  p.branch = g > 0 ? PlanBranch::df_mc : PlanBranch::df_only;
  p.f.assign(n_ctus, f);
  p.g.assign(n_ctus, g);
  return p;
}

std::vector<ControlPlan> uniform_plans(int frames, int n_ctus, uint8_t f,
                                       uint8_t g) {
  return std::vector<ControlPlan>(frames, uniform_plan(n_ctus, f, g));
}

}  // namespace

TrainingSamples collect_training_samples(const ProxySequence& seq,
                                         std::span<const SaliencyMap> saliency,
                                         const CostProfile& profile,
                                         ExecMode mode) {
  const int num_frames = static_cast<int>(seq.frames.size());
  const int n = seq.layout.n_ctus;
  if (static_cast<int>(saliency.size()) != num_frames) {
    throw validation_error("saliency map count does not match frame count");
  }

  const DecodeResult ref = decode_sequence(seq, {}, mode);
  const DecodeResult df_off =
      decode_sequence(seq, uniform_plans(num_frames, n, 1, 0), mode);
  DecodeResult g_dec[4];
  for (int g = 1; g <= 3; ++g) {
    g_dec[g] = decode_sequence(
        seq, uniform_plans(num_frames, n, 0, static_cast<uint8_t>(g)), mode);
  }

  TrainingSamples out;
  std::vector<double> ref_frame_cost(num_frames);
  for (int k = 0; k < num_frames; ++k) {
    ref_frame_cost[k] = ref.costs[k].weighted(profile);
  }

  // Deblock complexity: disabling one CTU's filter saves exactly its DF
  // share of the frame ledger.
  const double nd = static_cast<double>(n);
  for (int k = 0; k < num_frames; ++k) {
    for (int l = 0; l < n; ++l) {
      DfComplexitySample s;
      s.w = saliency[k].w[l];
      s.y = nd * profile.df *
            static_cast<double>(ref.costs[k].ctus[l].df_ops) /
            ref_frame_cost[k];
      out.df_complexity.push_back(s);
    }
  }

  // MC complexity: per level, the scaled mean per-CTU frame-cost reduction.
  out.mc_complexity.push_back({0, 0.0});
  for (int g = 1; g <= 3; ++g) {
    double acc = 0.0;
    int64_t count = 0;
    for (int k = 0; k < num_frames; ++k) {
      for (int l = 0; l < n; ++l) {
        const double saved =
            FrameCost::weighted_ctu(ref.costs[k].ctus[l], profile) -
            FrameCost::weighted_ctu(g_dec[g].costs[k].ctus[l], profile);
        acc += saved / ref_frame_cost[k];
        ++count;
      }
    }
    out.mc_complexity.push_back({g, nd * acc / static_cast<double>(count)});
  }

  // MC distortion ratios relative to level 3.
  double mse_level[4] = {0.0, 0.0, 0.0, 0.0};
  for (int g = 1; g <= 3; ++g) {
    double acc = 0.0;
    int64_t count = 0;
    for (int k = 0; k < num_frames; ++k) {
      const std::vector<double> mse =
          per_ctu_mse(g_dec[g].frames[k], ref.frames[k], seq.layout);
      for (double v : mse) {
        acc += v;
        ++count;
      }
    }
    mse_level[g] = acc / static_cast<double>(count);
  }
  if (mse_level[3] <= 0.0) {
    out.mse_degenerate = true;
  } else {
    out.mc_mse.push_back({0, 0.0});
    for (int g = 1; g <= 3; ++g) {
      out.mc_mse.push_back({g, mse_level[g] / mse_level[3]});
    }
  }

  // Rank fidelity of the normalized DF quality model, per frame.
  for (int k = 0; k < num_frames; ++k) {
    const std::vector<double> mse =
        per_ctu_mse(df_off.frames[k], ref.frames[k], seq.layout);
    std::vector<double> x(n), y(n);
    for (int l = 0; l < n; ++l) {
      x[l] = saliency[k].w[l] * mse[l];
      y[l] = saliency[k].w[l];
    }
    const auto rcc = spearman_rcc(x, y);
    if (rcc.has_value()) out.srcc_df.push_back(*rcc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'G', 'C', 'C', 'P', 'S', 'E', 'Q'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& s, uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

void put_i32(std::string& s, int32_t v) { put_u32(s, static_cast<uint32_t>(v)); }

void put_i16(std::string& s, int16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

struct Reader {
  const std::string& data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) {
      throw validation_error("sequence container truncated");
    }
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<uint8_t>(data[pos + i]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<uint8_t>(data[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  int16_t i16() {
    need(2);
    uint16_t v = static_cast<uint8_t>(data[pos]) |
                 (static_cast<uint16_t>(static_cast<uint8_t>(data[pos + 1]))
                  << 8);
    pos += 2;
    return static_cast<int16_t>(v);
  }
};

}  // namespace

void save_sequence(const ProxySequence& seq, const std::string& path) {
  std::string head;
  put_i32(head, seq.layout.width);
  put_i32(head, seq.layout.height);
  put_i32(head, seq.layout.ctu_size);
  put_i32(head, seq.mc_block);
  put_i32(head, seq.search_range);
  put_u32(head, static_cast<uint32_t>(seq.frames.size()));

  std::string gops;
  put_i32(gops, seq.gop.gop_size);
  put_i32(gops, seq.gop.intra_period);

  std::string frms;
  for (const FrameData& fd : seq.frames) {
    put_i32(frms, fd.poc);
    put_i32(frms, fd.qp);
    put_i32(frms, fd.layer);
    frms.push_back(fd.is_intra ? 1 : 0);
    put_u32(frms, static_cast<uint32_t>(fd.refs.size()));
    for (int r : fd.refs) put_i32(frms, r);
    put_u32(frms, static_cast<uint32_t>(fd.motion.size()));
    for (const BlockMotion& m : fd.motion) {
      put_i16(frms, m.mv[0].x);
      put_i16(frms, m.mv[0].y);
      put_i16(frms, m.mv[1].x);
      put_i16(frms, m.mv[1].y);
    }
    put_u32(frms, static_cast<uint32_t>(fd.resid.size()));
    for (int16_t q : fd.resid) put_i16(frms, q);
  }

  const std::string* bodies[3] = {&head, &gops, &frms};
  const char* tags[3] = {"HEAD", "GOPS", "FRMS"};

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, 3);
  uint64_t offset = out.size() + 3 * (4 + 8 + 8);
  for (int i = 0; i < 3; ++i) {
    out.append(tags[i], 4);
    put_u64(out, offset);
    put_u64(out, bodies[i]->size());
    offset += bodies[i]->size();
  }
  for (int i = 0; i < 3; ++i) out += *bodies[i];
  write_file_atomic(path, out);
}

ProxySequence load_sequence(const std::string& path) {
  const std::string data = read_file(path);
  if (data.size() < 16 || std::memcmp(data.data(), kMagic, 8) != 0) {
    throw validation_error(path + " is not a proxy sequence container");
  }
  Reader r{data, 8};
  const uint32_t version = r.u32();
  if (version != kVersion) {
    throw validation_error("unsupported container version " +
                           std::to_string(version));
  }
  const uint32_t sections = r.u32();
  uint64_t sec_off[3] = {0, 0, 0};
  uint64_t sec_size[3] = {0, 0, 0};
  const char* tags[3] = {"HEAD", "GOPS", "FRMS"};
  for (uint32_t i = 0; i < sections; ++i) {
    r.need(4);
    const std::string tag = data.substr(r.pos, 4);
    r.pos += 4;
    const uint64_t off = r.u64();
    const uint64_t size = r.u64();
    for (int t = 0; t < 3; ++t) {
      if (tag == tags[t]) {
        sec_off[t] = off;
        sec_size[t] = size;
      }
    }
  }
  for (int t = 0; t < 3; ++t) {
    if (sec_size[t] == 0) {
      throw validation_error("container missing section " +
                             std::string(tags[t]));
    }
    if (sec_off[t] + sec_size[t] > data.size()) {
      throw validation_error("container section out of bounds");
    }
  }

  Reader hr{data, static_cast<size_t>(sec_off[0])};
  const int width = hr.i32();
  const int height = hr.i32();
  const int ctu = hr.i32();
  const int mc_block = hr.i32();
  const int search_range = hr.i32();
  const uint32_t num_frames = hr.u32();

  Reader gr{data, static_cast<size_t>(sec_off[1])};
  const int gop_size = gr.i32();
  const int intra_period = gr.i32();

  ProxySequence seq;
  seq.layout = FrameLayout::make(width, height, ctu);
  seq.gop = GopStructure::make(static_cast<int>(num_frames), gop_size,
                               intra_period);
  seq.mc_block = mc_block;
  seq.search_range = search_range;

  Reader fr{data, static_cast<size_t>(sec_off[2])};
  seq.frames.resize(num_frames);
  const size_t plane = static_cast<size_t>(width) * height;
  for (uint32_t k = 0; k < num_frames; ++k) {
    FrameData fd;
    fd.poc = fr.i32();
    fd.qp = fr.i32();
    fd.layer = fr.i32();
    fr.need(1);
    fd.is_intra = data[fr.pos++] != 0;
    const uint32_t nrefs = fr.u32();
    if (nrefs > 2) throw validation_error("container frame has > 2 refs");
    for (uint32_t i = 0; i < nrefs; ++i) fd.refs.push_back(fr.i32());
    const uint32_t nmv = fr.u32();
    fd.motion.resize(nmv);
    for (uint32_t i = 0; i < nmv; ++i) {
      fd.motion[i].mv[0].x = fr.i16();
      fd.motion[i].mv[0].y = fr.i16();
      fd.motion[i].mv[1].x = fr.i16();
      fd.motion[i].mv[1].y = fr.i16();
    }
    const uint32_t nres = fr.u32();
    if (nres != plane) {
      throw validation_error("container residual plane size mismatch");
    }
    fd.resid.resize(nres);
    for (uint32_t i = 0; i < nres; ++i) fd.resid[i] = fr.i16();
    if (fd.poc < 0 || fd.poc >= static_cast<int>(num_frames)) {
      throw validation_error("container frame poc out of range");
    }
    seq.frames[fd.poc] = std::move(fd);
  }
  return seq;
}

}  // namespace sgcc
