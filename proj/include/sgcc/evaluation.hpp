#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgcc/core_types.hpp"
#include "sgcc/frame.hpp"
#include "sgcc/models.hpp"
#include "sgcc/proxy_codec.hpp"

namespace sgcc {

// Identical frames report this sentinel instead of an infinite PSNR.
inline constexpr double kPsnrCap = 99.0;

double psnr_from_mse(double mse);

struct PsnrResult {
  std::vector<double> per_frame;
  double mean = 0.0;
};

PsnrResult psnr(const Clip& reference, const Clip& test);

// Attention-weighted PSNR. Frames whose weights are all zero are not
// applicable and excluded from the mean.
struct EwPsnrResult {
  std::vector<std::optional<double>> per_frame;
  std::optional<double> mean;
};

// Per-CTU weights, broadcast to pixels.
EwPsnrResult ew_psnr(const Clip& reference, const Clip& test,
                     std::span<const SaliencyMap> weights);
// Per-pixel weights, one plane-sized vector per frame.
EwPsnrResult ew_psnr_pixels(const Clip& reference, const Clip& test,
                            std::span<const std::vector<double>> weights);

// Control accuracy over a set of runs: signed errors in percentage points,
// their mean absolute value, and the mean relative error against the
// targets (in percent).
struct ControlErrorReport {
  std::vector<double> signed_errors;  // (achieved - target) * 100
  double mae = 0.0;                   // percentage points
  double mre = 0.0;                   // percent of target
};

ControlErrorReport control_error_report(std::span<const double> targets,
                                        std::span<const double> achieved);

// Achieved cost reduction with everything enabled (all f=1, g=3).
double measure_mar(const ProxySequence& seq, const CostProfile& profile,
                   ExecMode mode = ExecMode::parallel);

// Per-POC error propagation: PSNR of each frame when only that frame is
// planned, minus its PSNR when every frame is planned, both against the
// plan-less decode.
std::vector<double> propagation_profile(const ProxySequence& seq,
                                        std::span<const ControlPlan> plans,
                                        ExecMode mode = ExecMode::parallel);

// Measured additivity of DF and MC effects: decodes joint (f=1, g) against
// the two single-tool decodes for g in {1,2,3} and averages the relative
// errors over frames.
struct AdditivityMeasurement {
  double mean_delta_c_e = 0.0;
  double mean_delta_s_e = 0.0;
  int samples = 0;
};

AdditivityMeasurement measure_additivity(const ProxySequence& seq,
                                         std::span<const SaliencyMap> saliency,
                                         const CostProfile& profile,
                                         ExecMode mode = ExecMode::parallel);

struct CurvePoint {
  std::string sequence;
  int qp = 0;
  double target = 0.0;
  double achieved = 0.0;
  double delta_psnr = 0.0;
  double delta_ew_psnr = 0.0;
};

// CSV with one row per point, sorted by sequence then target.
std::string emit_curves(std::vector<CurvePoint> points);

}  // namespace sgcc
