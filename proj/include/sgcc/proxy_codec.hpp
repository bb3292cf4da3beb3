#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgcc/core_types.hpp"
#include "sgcc/fitting.hpp"
#include "sgcc/frame.hpp"

namespace sgcc {

// Execution mode of the data-parallel kernels. Serial is the reference
// implementation; parallel runs the same per-unit code under OpenMP and
// must produce bit-identical output.
enum class ExecMode { serial, parallel };

// Hierarchical-B group-of-pictures description. Frame 0 and every
// intra_period-th frame is intra; anchors reference the previous anchor and
// the frames between two anchors form a binary reference hierarchy
// (layers 1..4 for GOP size 8).
struct GopStructure {
  int gop_size = 8;
  int intra_period = 32;

  struct FrameInfo {
    int poc = 0;
    int layer = 0;  // 0 = intra, 1 = anchor, deeper layers reference closer
    bool is_intra = false;
    std::vector<int> refs;  // reference POCs, decoded before this frame
    int qp_offset = 0;      // added to the base QP, equals the layer
  };

  std::vector<FrameInfo> frames;   // indexed by POC
  std::vector<int> coding_order;   // POCs in decode order

  static GopStructure make(int num_frames, int gop_size = 8,
                           int intra_period = 32);
};

// Motion vector in quarter-sample units.
struct MotionVector {
  int16_t x = 0;
  int16_t y = 0;
  bool operator==(const MotionVector&) const = default;
};

struct BlockMotion {
  MotionVector mv[2];  // one per reference in FrameData::refs order
  bool operator==(const BlockMotion&) const = default;
};

struct FrameData {
  int poc = 0;
  int qp = 32;
  int layer = 0;
  bool is_intra = false;
  std::vector<int> refs;
  std::vector<BlockMotion> motion;  // block raster order; empty for intra
  std::vector<int16_t> resid;       // quantized residual levels, full plane
};

// Encoded proxy stream: everything a decode needs, bit-exactly reproducible
// from (source, GOP, QPs).
struct ProxySequence {
  FrameLayout layout;
  GopStructure gop;
  int mc_block = 16;
  int search_range = 16;
  std::vector<FrameData> frames;  // POC order

  int block_cols() const { return (layout.width + mc_block - 1) / mc_block; }
  int block_rows() const { return (layout.height + mc_block - 1) / mc_block; }
};

// Deterministic operation counts per CTU. mc_ops counts interpolation MACs
// plus prediction copies, df_ops counts boundary decisions and filter taps,
// base_ops counts residual/coefficient work.
struct CtuCost {
  int64_t mc_ops = 0;
  int64_t df_ops = 0;
  int64_t base_ops = 0;
  bool operator==(const CtuCost&) const = default;
};

// Relative weights of the three op classes, so the count structure can be
// matched to a measured platform profile. Defaults approximate published
// decoder stage shares (MC largest, then coefficient work, then DF).
struct CostProfile {
  double mc = 0.25;
  double df = 16.0;
  double base = 12.0;

  static CostProfile parse(const std::string& text);  // "mc,df,base"
  std::string format() const;
};

struct FrameCost {
  std::vector<CtuCost> ctus;

  CtuCost totals() const;
  double weighted(const CostProfile& profile) const;
  static double weighted_ctu(const CtuCost& c, const CostProfile& profile);
  bool operator==(const FrameCost&) const = default;
};

// Which of the four positions of an aligned 2x2 sample group skip MC, and
// where each skipped position copies its prediction from. Position order is
// TL, TR, BL, BR.
struct SkipPattern {
  int g = 0;
  bool copied[4] = {false, false, false, false};
  int source[4] = {-1, -1, -1, -1};
};

SkipPattern skip_pattern(int g);

struct EncodeConfig {
  int mc_block = 16;
  int search_range = 16;
  ExecMode mode = ExecMode::parallel;
};

// Encodes luma frames: intra frames as quantized planes, inter frames with
// full-search integer motion refined to quarter-sample precision and
// uniform scalar residual quantization with step 2^((qp-4)/6).
ProxySequence encode_sequence(const Clip& clip, const GopStructure& gop,
                              std::span<const int> base_qps,
                              const FrameLayout& layout,
                              const EncodeConfig& config = {});

struct DecodeResult {
  Clip frames;                   // POC order
  std::vector<FrameCost> costs;  // POC order
};

// Decodes the sequence, optionally applying one ControlPlan per frame
// (plans[poc]). Without plans this equals decoding with all f=0, g=0.
DecodeResult decode_sequence(const ProxySequence& seq,
                             std::span<const ControlPlan> plans = {},
                             ExecMode mode = ExecMode::parallel);

// Whole-frame deblocking pass: a fixed-strength 4-tap filter across every
// 8-aligned block boundary segment owned by a CTU with f=0. Vertical edges
// first, then horizontal, matching the in-loop order used by the encoder.
void deblock_frame(Plane& frame, std::span<const uint8_t> f_flags,
                   const FrameLayout& layout, FrameCost* cost = nullptr,
                   ExecMode mode = ExecMode::parallel);

struct TrainingSamples {
  std::vector<DfComplexitySample> df_complexity;
  std::vector<McComplexitySample> mc_complexity;
  std::vector<McMseSample> mc_mse;
  // Per-frame rank correlation between w*mse_df and its normalized model
  // value; empty entries (constant input) are skipped.
  std::vector<double> srcc_df;
  // True when the content produces no MC distortion at g=3, so MSE ratios
  // are 0/0 and excluded.
  bool mse_degenerate = false;
};

// Decodes the sequence with uniform instrument settings (g in {0..3}, DF
// on/off) and emits regression samples in the forms the fitting module
// expects.
TrainingSamples collect_training_samples(const ProxySequence& seq,
                                         std::span<const SaliencyMap> saliency,
                                         const CostProfile& profile,
                                         ExecMode mode = ExecMode::parallel);

// Versioned binary container with magic "SGCCPSEQ" and a section table.
void save_sequence(const ProxySequence& seq, const std::string& path);
ProxySequence load_sequence(const std::string& path);

}  // namespace sgcc
