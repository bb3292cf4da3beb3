#include "sgcc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sgcc {

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace {

double frame_mse(const Plane& a, const Plane& b) {
  if (a.width != b.width || a.height != b.height) {
    throw validation_error("frame dimensions differ");
  }
  int64_t sse = 0;
  const size_t count = a.pix.size();
  for (size_t i = 0; i < count; ++i) {
    const int d = static_cast<int>(a.pix[i]) - static_cast<int>(b.pix[i]);
    sse += static_cast<int64_t>(d) * d;
  }
  return static_cast<double>(sse) / static_cast<double>(count);
}

}  // namespace

PsnrResult psnr(const Clip& reference, const Clip& test) {
  if (reference.size() != test.size() || reference.empty()) {
    throw validation_error("psnr needs equal nonzero frame counts");
  }
  PsnrResult r;
  r.per_frame.reserve(reference.size());
  double acc = 0.0;
  for (size_t k = 0; k < reference.size(); ++k) {
    const double v = psnr_from_mse(frame_mse(reference[k], test[k]));
    r.per_frame.push_back(v);
    acc += v;
  }
  r.mean = acc / static_cast<double>(reference.size());
  return r;
}

namespace {

EwPsnrResult finish_ew(std::vector<std::optional<double>> per_frame) {
  EwPsnrResult r;
  r.per_frame = std::move(per_frame);
  double acc = 0.0;
  int count = 0;
  for (const auto& v : r.per_frame) {
    if (v.has_value()) {
      acc += *v;
      ++count;
    }
  }
  if (count > 0) r.mean = acc / count;
  return r;
}

}  // namespace

EwPsnrResult ew_psnr(const Clip& reference, const Clip& test,
                     std::span<const SaliencyMap> weights) {
  if (reference.size() != test.size() ||
      reference.size() != weights.size() || reference.empty()) {
    throw validation_error("ew_psnr needs equal nonzero frame counts");
  }
  std::vector<std::optional<double>> per_frame;
  per_frame.reserve(reference.size());
  for (size_t k = 0; k < reference.size(); ++k) {
    const FrameLayout& layout = weights[k].layout;
    if (layout.width != reference[k].width ||
        layout.height != reference[k].height) {
      throw validation_error("weight layout does not match frames");
    }
    double num = 0.0;
    double den = 0.0;
    for (int n = 0; n < layout.n_ctus; ++n) {
      const double w = weights[k].w[n];
      if (w < 0.0) throw validation_error("negative weight");
      if (w == 0.0) continue;
      const FrameLayout::Rect rect = layout.ctu_rect(n);
      num += w * static_cast<double>(ctu_sse(reference[k], test[k], rect));
      den += w * static_cast<double>(rect.pixels());
    }
    if (den == 0.0) {
      per_frame.push_back(std::nullopt);
    } else {
      per_frame.push_back(psnr_from_mse(num / den));
    }
  }
  return finish_ew(std::move(per_frame));
}

EwPsnrResult ew_psnr_pixels(const Clip& reference, const Clip& test,
                            std::span<const std::vector<double>> weights) {
  if (reference.size() != test.size() ||
      reference.size() != weights.size() || reference.empty()) {
    throw validation_error("ew_psnr needs equal nonzero frame counts");
  }
  std::vector<std::optional<double>> per_frame;
  per_frame.reserve(reference.size());
  for (size_t k = 0; k < reference.size(); ++k) {
    const Plane& a = reference[k];
    const Plane& b = test[k];
    if (a.pix.size() != b.pix.size() || weights[k].size() != a.pix.size()) {
      throw validation_error("pixel weight plane size mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < a.pix.size(); ++i) {
      const double w = weights[k][i];
      if (w < 0.0) throw validation_error("negative weight");
      const int d = static_cast<int>(a.pix[i]) - static_cast<int>(b.pix[i]);
      num += w * static_cast<double>(d) * d;
      den += w;
    }
    if (den == 0.0) {
      per_frame.push_back(std::nullopt);
    } else {
      per_frame.push_back(psnr_from_mse(num / den));
    }
  }
  return finish_ew(std::move(per_frame));
}

ControlErrorReport control_error_report(std::span<const double> targets,
                                        std::span<const double> achieved) {
  if (targets.size() != achieved.size() || targets.empty()) {
    throw validation_error("control error needs equal nonzero counts");
  }
  ControlErrorReport r;
  double mae = 0.0;
  double mre = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] <= 0.0) {
      throw validation_error("control error targets must be positive");
    }
    const double e = (achieved[i] - targets[i]) * 100.0;
    r.signed_errors.push_back(e);
    mae += std::abs(e);
    mre += std::abs(e) / (targets[i] * 100.0);
  }
  r.mae = mae / static_cast<double>(targets.size());
  r.mre = 100.0 * mre / static_cast<double>(targets.size());
  return r;
}

namespace {

double sequence_cost(const DecodeResult& dec, const CostProfile& profile) {
  double acc = 0.0;
  for (const FrameCost& fc : dec.costs) acc += fc.weighted(profile);
  return acc;
}

}  // namespace

double measure_mar(const ProxySequence& seq, const CostProfile& profile,
                   ExecMode mode) {
  const int n = seq.layout.n_ctus;
  const int frames = static_cast<int>(seq.frames.size());
  ControlPlan full;
  full.branch = PlanBranch::df_mc;
  full.f.assign(n, 1);
  full.g.assign(n, 3);
  full.predicted_reduction = 1.0;
  const std::vector<ControlPlan> plans(frames, full);
  const DecodeResult ref = decode_sequence(seq, {}, mode);
  const DecodeResult reduced = decode_sequence(seq, plans, mode);
  const double c_ref = sequence_cost(ref, profile);
  return (c_ref - sequence_cost(reduced, profile)) / c_ref;
}

std::vector<double> propagation_profile(const ProxySequence& seq,
                                        std::span<const ControlPlan> plans,
                                        ExecMode mode) {
  const int frames = static_cast<int>(seq.frames.size());
  if (static_cast<int>(plans.size()) != frames) {
    throw validation_error("propagation profile needs one plan per frame");
  }
  const DecodeResult ref = decode_sequence(seq, {}, mode);
  const DecodeResult all = decode_sequence(seq, plans, mode);

  ControlPlan idle;
  idle.branch = PlanBranch::df_only;
  idle.f.assign(seq.layout.n_ctus, 0);
  idle.g.assign(seq.layout.n_ctus, 0);

  std::vector<double> drops(frames, 0.0);
  for (int i = 0; i < frames; ++i) {
    std::vector<ControlPlan> only(frames, idle);
    only[i] = plans[i];
    const DecodeResult one = decode_sequence(seq, only, mode);
    const double psnr_one =
        psnr_from_mse(frame_mse(ref.frames[i], one.frames[i]));
    const double psnr_all =
        psnr_from_mse(frame_mse(ref.frames[i], all.frames[i]));
    drops[i] = psnr_one - psnr_all;
  }
  return drops;
}

AdditivityMeasurement measure_additivity(const ProxySequence& seq,
                                         std::span<const SaliencyMap> saliency,
                                         const CostProfile& profile,
                                         ExecMode mode) {
  const int frames = static_cast<int>(seq.frames.size());
  const int n = seq.layout.n_ctus;
  if (static_cast<int>(saliency.size()) != frames) {
    throw validation_error("saliency map count does not match frames");
  }

  auto uniform = [&](uint8_t f, uint8_t g) {
    ControlPlan p;
    p.branch = g > 0 ? PlanBranch::df_mc : PlanBranch::df_only;
    p.f.assign(n, f);
    p.g.assign(n, g);
    return std::vector<ControlPlan>(frames, p);
  };

  const DecodeResult ref = decode_sequence(seq, {}, mode);
  const DecodeResult df_only = decode_sequence(seq, uniform(1, 0), mode);

  AdditivityMeasurement m;
  double acc_c = 0.0, acc_s = 0.0;
  int count_c = 0, count_s = 0;
  for (uint8_t g = 1; g <= 3; ++g) {
    const DecodeResult mc_only = decode_sequence(seq, uniform(0, g), mode);
    const DecodeResult joint = decode_sequence(seq, uniform(1, g), mode);
    for (int k = 0; k < frames; ++k) {
      const double c_ref = ref.costs[k].weighted(profile);
      const double red_joint =
          (c_ref - joint.costs[k].weighted(profile)) / c_ref;
      const double red_df =
          (c_ref - df_only.costs[k].weighted(profile)) / c_ref;
      const double red_mc =
          (c_ref - mc_only.costs[k].weighted(profile)) / c_ref;

      const auto sw = [&](const DecodeResult& dec) {
        return sw_mse_frame(
                   per_ctu_mse(dec.frames[k], ref.frames[k], seq.layout),
                   saliency[k])
            .value;
      };
      const AdditivityReport rep = additivity_errors(
          red_joint, red_df, red_mc, sw(joint), sw(df_only), sw(mc_only));
      if (rep.delta_c_e.has_value()) {
        acc_c += *rep.delta_c_e;
        ++count_c;
      }
      if (rep.delta_s_e.has_value()) {
        acc_s += *rep.delta_s_e;
        ++count_s;
      }
    }
  }
  m.mean_delta_c_e = count_c ? acc_c / count_c : 0.0;
  m.mean_delta_s_e = count_s ? acc_s / count_s : 0.0;
  m.samples = count_c + count_s;
  return m;
}

std::string emit_curves(std::vector<CurvePoint> points) {
  if (points.empty()) {
    throw validation_error("curve emission needs at least one point");
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) {
                     if (a.sequence != b.sequence) {
                       return a.sequence < b.sequence;
                     }
                     return a.target < b.target;
                   });
  std::string out = "sequence,qp,target,achieved,delta_psnr,delta_ew_psnr\n";
  char buf[256];
  for (const CurvePoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f\n",
                  p.sequence.c_str(), p.qp, p.target, p.achieved,
                  p.delta_psnr, p.delta_ew_psnr);
    out += buf;
  }
  return out;
}

}  // namespace sgcc
