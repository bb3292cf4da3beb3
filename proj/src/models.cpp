#include "sgcc/models.hpp"

#include <cmath>

namespace sgcc {

SwMseResult sw_mse_frame(std::span<const double> per_ctu_mse,
                         const SaliencyMap& saliency) {
  if (per_ctu_mse.size() != saliency.w.size()) {
    throw validation_error("per-CTU MSE and saliency lengths differ");
  }
  double w_sum = 0.0;
  double mse_sum = 0.0;
  for (size_t n = 0; n < per_ctu_mse.size(); ++n) {
    w_sum += saliency.w[n];
    mse_sum += per_ctu_mse[n];
  }
  SwMseResult r;
  if (mse_sum == 0.0) {
    return r;  // zero distortion, weighting irrelevant
  }
  if (w_sum <= 0.0) {
    r.value = mse_sum / static_cast<double>(per_ctu_mse.size());
    r.degenerate = true;
    return r;
  }
  double acc = 0.0;
  for (size_t n = 0; n < per_ctu_mse.size(); ++n) {
    acc += saliency.w[n] / w_sum * per_ctu_mse[n];
  }
  r.value = acc;
  return r;
}

double norm_quality_df(int f, double w) { return w * static_cast<double>(f); }

double mc_mse_ratio(int g, const ModelParams& params) {
  const double gd = static_cast<double>(g);
  return params.h1 * gd * gd * gd + params.h2 * gd * gd + params.h3 * gd;
}

double norm_quality_mc(int g, double w, const ModelParams& params) {
  return w * mc_mse_ratio(g, params);
}

double dc_df(int f, double w, QpBucket bucket, int n_ctus,
             const ModelParams& params) {
  const BucketParams& bp = params.at(bucket);
  return (bp.a * w + bp.b) * static_cast<double>(f) /
         static_cast<double>(n_ctus);
}

double dc_mc(int g, int n_ctus, QpBucket bucket, const ModelParams& params) {
  return params.at(bucket).c * static_cast<double>(g) /
         static_cast<double>(n_ctus);
}

double df_capacity(const SaliencyMap& saliency, QpBucket bucket,
                   const ModelParams& params) {
  const BucketParams& bp = params.at(bucket);
  const double n = static_cast<double>(saliency.layout.n_ctus);
  double acc = 0.0;
  for (double w : saliency.w) acc += (bp.a * w + bp.b) / n;
  return acc;
}

AdditivityReport additivity_errors(double joint_complexity,
                                   double df_complexity, double mc_complexity,
                                   double joint_sw_mse, double df_sw_mse,
                                   double mc_sw_mse) {
  AdditivityReport r;
  if (joint_complexity != 0.0) {
    r.delta_c_e = std::abs(joint_complexity -
                           (df_complexity + mc_complexity)) /
                  std::abs(joint_complexity);
  }
  if (joint_sw_mse != 0.0) {
    r.delta_s_e =
        std::abs(joint_sw_mse - (df_sw_mse + mc_sw_mse)) /
        std::abs(joint_sw_mse);
  }
  return r;
}

}  // namespace sgcc
