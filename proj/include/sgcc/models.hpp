#pragma once

#include <optional>
#include <span>

#include "sgcc/core_types.hpp"

namespace sgcc {

// Quality and complexity models shared by the planner and the evaluation
// code. All complexity values are dimensionless fractions of one frame's
// decode cost. All functions here are pure.

struct SwMseResult {
  double value = 0.0;
  // Set when all weights are zero but distortion is nonzero; the value then
  // falls back to the unweighted mean.
  bool degenerate = false;
};

// Saliency-weighted frame MSE: sum of w_n / sum(w) * mse_n.
SwMseResult sw_mse_frame(std::span<const double> per_ctu_mse,
                         const SaliencyMap& saliency);

// Normalized quality loss of disabling deblocking for one CTU: w * f.
double norm_quality_df(int f, double w);

// Fitted MSE ratio of MC simplification level g relative to level 3:
// h1*g^3 + h2*g^2 + h3*g.
double mc_mse_ratio(int g, const ModelParams& params);

// Normalized quality loss of MC simplification: w * mc_mse_ratio(g).
double norm_quality_mc(int g, double w, const ModelParams& params);

// Frame complexity reduction from disabling one CTU's deblocking:
// (a*w + b) * f / N.
double dc_df(int f, double w, QpBucket bucket, int n_ctus,
             const ModelParams& params);

// Frame complexity reduction from simplifying one CTU's MC: c * g / N.
// Independent of saliency.
double dc_mc(int g, int n_ctus, QpBucket bucket, const ModelParams& params);

// Maximum reduction achievable by deblock disabling alone:
// sum over CTUs of (a*w_n + b) / N.
double df_capacity(const SaliencyMap& saliency, QpBucket bucket,
                   const ModelParams& params);

// Relative error between a jointly measured total and the sum of its
// independently measured parts. Empty when the joint total is zero.
struct AdditivityReport {
  std::optional<double> delta_c_e;
  std::optional<double> delta_s_e;
};

AdditivityReport additivity_errors(double joint_complexity,
                                   double df_complexity, double mc_complexity,
                                   double joint_sw_mse, double df_sw_mse,
                                   double mc_sw_mse);

}  // namespace sgcc
