#include "sgcc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"

namespace sgcc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw validation_error("output directory not set");
  fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string stem_of(const std::string& path) {
  return fs::path(path).stem().string();
}

std::string target_tag(double target) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", target);
  return buf;
}

Clip load_or_generate_clip(const RunConfig& config) {
  if (!config.input.empty()) {
    if (config.width < 1 || config.height < 1 || config.frames < 1) {
      throw validation_error(
          "raw input needs --width, --height and --frames");
    }
    return read_luma_raw(config.input, config.width, config.height,
                         config.frames);
  }
  if (config.clip.empty()) {
    throw validation_error("either --input or a synthetic clip name needed");
  }
  return generate_clip(config.clip, config.width, config.height,
                       config.frames, config.seed);
}

std::vector<SaliencyMap> saliency_for(const RunConfig& config,
                                      const Clip& content,
                                      const FrameLayout& layout) {
  if (!config.saliency_path.empty()) {
    std::vector<SaliencyMap> maps =
        load_saliency_file(config.saliency_path, layout);
    if (maps.size() == 1 && content.size() > 1) {
      maps.assign(content.size(), maps[0]);  // broadcast a single line
    }
    if (maps.size() != content.size()) {
      throw validation_error("saliency file has " +
                             std::to_string(maps.size()) + " lines, clip has " +
                             std::to_string(content.size()) + " frames");
    }
    return maps;
  }
  return derive_saliency(content, layout);
}

std::vector<int> base_qps_for(const RunConfig& config, int frames) {
  if (!config.qp_file.empty()) {
    std::vector<int> qps;
    const std::string text = read_file(config.qp_file);
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (line.empty()) continue;
      qps.push_back(std::stoi(line));
    }
    if (static_cast<int>(qps.size()) != frames) {
      throw validation_error("QP file has " + std::to_string(qps.size()) +
                             " entries, clip has " + std::to_string(frames) +
                             " frames");
    }
    return qps;
  }
  return std::vector<int>(frames, config.qp);
}

ModelParams params_for(const RunConfig& config) {
  if (!config.params_path.empty()) {
    ModelParams p = load_model_params(config.params_path);
    p.validate();
    return p;
  }
  if (config.params_init == "table3") return ModelParams::preset_table3();
  throw validation_error("need --params <file> or --params-init table3");
}

}  // namespace

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

FitResult cmd_fit(const RunConfig& config) {
  ensure_out_dir(config.out_dir);

  if (config.params_init == "table3") {
    FitResult r;
    r.params = ModelParams::preset_table3();
    save_model_params(r.params, join(config.out_dir, "params.json"));
    json report;
    report["source"] = "table3";
    write_file_atomic(join(config.out_dir, "fit_report.json"),
                      report.dump(2) + "\n");
    return r;
  }

  const Clip clip = load_or_generate_clip(config);
  const FrameLayout layout =
      FrameLayout::make(clip[0].width, clip[0].height, config.ctu_size);
  const std::vector<SaliencyMap> saliency =
      saliency_for(config, clip, layout);
  const GopStructure gop = GopStructure::make(
      static_cast<int>(clip.size()), config.gop_size, config.intra_period);

  std::vector<int> qps = config.qps;
  if (qps.empty()) qps = {22, 27, 32, 37};

  EncodeConfig enc;
  enc.mc_block = config.mc_block;
  enc.search_range = config.search_range;
  enc.mode = config.mode;

  FitResult result;
  std::map<int, std::vector<DfComplexitySample>> df_by_bucket;
  std::map<int, std::vector<McComplexitySample>> mc_by_bucket;
  std::map<int, std::vector<McMseSample>> mse_by_bucket;
  std::vector<McMseSample> mse_all;
  double srcc_acc = 0.0;
  int srcc_count = 0;
  bool any_mse = false;

  for (int qp : qps) {
    const std::vector<int> base(clip.size(), qp);
    const ProxySequence seq =
        encode_sequence(clip, gop, base, layout, enc);
    const TrainingSamples samples =
        collect_training_samples(seq, saliency, config.profile, config.mode);
    const int bucket = qp_bucket(qp).value;
    auto& df = df_by_bucket[bucket];
    df.insert(df.end(), samples.df_complexity.begin(),
              samples.df_complexity.end());
    auto& mc = mc_by_bucket[bucket];
    mc.insert(mc.end(), samples.mc_complexity.begin(),
              samples.mc_complexity.end());
    if (!samples.mse_degenerate) {
      any_mse = true;
      auto& ms = mse_by_bucket[bucket];
      ms.insert(ms.end(), samples.mc_mse.begin(), samples.mc_mse.end());
      mse_all.insert(mse_all.end(), samples.mc_mse.begin(),
                     samples.mc_mse.end());
    }
    for (double v : samples.srcc_df) {
      srcc_acc += v;
      ++srcc_count;
    }

    save_df_samples(samples.df_complexity,
                    join(config.out_dir,
                         "df_samples_qp" + std::to_string(qp) + ".csv"));
    save_mc_samples(samples.mc_complexity,
                    join(config.out_dir,
                         "mc_samples_qp" + std::to_string(qp) + ".csv"));
    if (!samples.mse_degenerate) {
      save_mse_samples(samples.mc_mse,
                       join(config.out_dir,
                            "mse_samples_qp" + std::to_string(qp) + ".csv"));
    }
  }

  if (!any_mse) {
    throw degenerate_error(
        "training content produces no MC distortion: every McMseSample is "
        "0/0 (static clip?)");
  }

  result.cubic = fit_cubic_no_constant(mse_all);
  result.params.h1 = result.cubic.h1;
  result.params.h2 = result.cubic.h2;
  result.params.h3 = result.cubic.h3;
  result.srcc_mean = srcc_count ? srcc_acc / srcc_count : 0.0;
  result.srcc_count = srcc_count;

  // Buckets without their own training QP inherit the nearest fitted one.
  result.params = [&] {
    ModelParams p = result.params;
    const int bucket_values[4] = {22, 27, 32, 37};
    for (int bv : bucket_values) {
      const auto it = df_by_bucket.find(bv);
      if (it == df_by_bucket.end()) continue;
      const AffineFit af = fit_affine(it->second);
      const OriginFit of = fit_line_through_origin(mc_by_bucket.at(bv));
      result.df_fits[bv] = af;
      result.mc_fits[bv] = of;
      p.at(QpBucket{bv}) = BucketParams{af.a, af.b, of.c};
    }
    for (int i = 0; i < 4; ++i) {
      if (result.df_fits.count(bucket_values[i])) continue;
      int nearest = -1;
      int best_dist = 1 << 20;
      for (const auto& [bv, fit] : result.df_fits) {
        const int d = std::abs(bv - bucket_values[i]);
        if (d < best_dist) {
          best_dist = d;
          nearest = bv;
        }
      }
      if (nearest < 0) throw degenerate_error("no bucket could be fitted");
      p.buckets[i] = p.at(QpBucket{nearest});
    }
    return p;
  }();
  result.params.validate();

  if (config.h_per_bucket) {
    for (const auto& [bv, samples] : mse_by_bucket) {
      result.cubic_per_bucket[bv] = fit_cubic_no_constant(samples);
    }
  }

  save_model_params(result.params, join(config.out_dir, "params.json"));

  json report;
  report["cubic"] = {{"h1", result.cubic.h1},
                     {"h2", result.cubic.h2},
                     {"h3", result.cubic.h3},
                     {"r2", result.cubic.r2},
                     {"count", result.cubic.count}};
  for (const auto& [bv, fit] : result.df_fits) {
    report["buckets"][std::to_string(bv)]["df"] = {
        {"a", fit.a}, {"b", fit.b}, {"r2", fit.r2}, {"count", fit.count}};
  }
  for (const auto& [bv, fit] : result.mc_fits) {
    report["buckets"][std::to_string(bv)]["mc"] = {
        {"c", fit.c}, {"r2", fit.r2}, {"count", fit.count}};
  }
  for (const auto& [bv, fit] : result.cubic_per_bucket) {
    report["buckets"][std::to_string(bv)]["cubic"] = {{"h1", fit.h1},
                                                      {"h2", fit.h2},
                                                      {"h3", fit.h3},
                                                      {"r2", fit.r2}};
  }
  report["srcc"] = {{"mean", result.srcc_mean}, {"frames", result.srcc_count}};
  write_file_atomic(join(config.out_dir, "fit_report.json"),
                    report.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

void cmd_gen(const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  if (config.clip.empty()) throw validation_error("gen needs a clip name");
  const Clip clip = generate_clip(config.clip, config.width, config.height,
                                  config.frames, config.seed);
  const FrameLayout layout =
      FrameLayout::make(config.width, config.height, config.ctu_size);
  const std::vector<SaliencyMap> maps = derive_saliency(clip, layout);

  const std::string base =
      config.label.empty()
          ? config.clip + "_s" + std::to_string(config.seed)
          : config.label;
  write_luma_raw(clip, join(config.out_dir, base + ".y"));
  save_saliency_file(maps, join(config.out_dir, base + ".sal"));
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

std::vector<PlanFileResult> cmd_plan(const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  if (config.width < 1 || config.height < 1) {
    throw validation_error("plan needs --width and --height");
  }
  if (config.targets.empty()) throw validation_error("plan needs --targets");
  const FrameLayout layout =
      FrameLayout::make(config.width, config.height, config.ctu_size);
  const std::vector<SaliencyMap> maps =
      load_saliency_file(config.saliency_path, layout);
  const ModelParams params = params_for(config);
  const QpBucket bucket = qp_bucket(config.qp);
  const MixTable table = build_mix_table(layout.n_ctus, params);

  std::vector<PlanFileResult> results;
  for (double target : config.targets) {
    PlanFileResult r;
    r.target = target;
    PlanOptions options;
    options.table = &table;
    for (const SaliencyMap& map : maps) {
      SolveDiagnostics diag;
      r.plans.push_back(
          plan_frame(map, target, bucket, params, options, &diag));
      r.diagnostics.push_back(diag);
    }
    const std::string tag = target_tag(target);
    save_plans(r.plans, join(config.out_dir, "plans_" + tag + ".json"));

    std::string csv = "frame,branch,threshold_index,budget,predicted\n";
    char buf[128];
    for (size_t k = 0; k < r.plans.size(); ++k) {
      const SolveDiagnostics& d = r.diagnostics[k];
      std::snprintf(buf, sizeof(buf), "%zu,%s,%d,%d,%.8f\n", k,
                    d.branch == PlanBranch::df_only ? "df" : "df+mc",
                    d.threshold_index, d.budget, d.predicted_reduction);
      csv += buf;
    }
    write_file_atomic(join(config.out_dir, "plan_diag_" + tag + ".csv"), csv);
    results.push_back(std::move(r));
  }
  return results;
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

void cmd_table(const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  if (config.table_n < 1) throw validation_error("table needs --n >= 1");
  const ModelParams params = params_for(config);
  const MixTable table = build_mix_table(config.table_n, params);
  save_mix_table(table, join(config.out_dir, "mix_table.json"));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

namespace {

struct LoadedSequence {
  ProxySequence seq;
  Clip source;  // empty when only a container was given
};

LoadedSequence load_sequence_for_simulate(const RunConfig& config) {
  LoadedSequence out;
  if (config.input.empty()) {
    throw validation_error("simulate needs --input");
  }
  if (config.input.size() > 4 &&
      config.input.substr(config.input.size() - 4) == ".psq") {
    out.seq = load_sequence(config.input);
    return out;
  }
  out.source = read_luma_raw(config.input, config.width, config.height,
                             config.frames);
  const FrameLayout layout =
      FrameLayout::make(config.width, config.height, config.ctu_size);
  const GopStructure gop =
      GopStructure::make(config.frames, config.gop_size, config.intra_period);
  const std::vector<int> qps = base_qps_for(config, config.frames);
  EncodeConfig enc;
  enc.mc_block = config.mc_block;
  enc.search_range = config.search_range;
  enc.mode = config.mode;
  out.seq = encode_sequence(out.source, gop, qps, layout, enc);
  return out;
}

double sequence_cost(const DecodeResult& dec, const CostProfile& profile) {
  double acc = 0.0;
  for (const FrameCost& fc : dec.costs) acc += fc.weighted(profile);
  return acc;
}

}  // namespace

SimulateResult cmd_simulate(const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  LoadedSequence loaded = load_sequence_for_simulate(config);
  const ProxySequence& seq = loaded.seq;
  const FrameLayout& layout = seq.layout;
  const int frames = static_cast<int>(seq.frames.size());

  const DecodeResult ref = decode_sequence(seq, {}, config.mode);
  // Quality baseline: the source when it exists, else the plan-less decode.
  const Clip& baseline = loaded.source.empty() ? ref.frames : loaded.source;
  const std::vector<SaliencyMap> saliency =
      saliency_for(config, baseline, layout);
  std::vector<SaliencyMap> ew_weights = saliency;
  if (!config.weights_path.empty()) {
    ew_weights = load_saliency_file(config.weights_path, layout);
    if (ew_weights.size() == 1 && frames > 1) {
      ew_weights.assign(frames, ew_weights[0]);
    }
    if (static_cast<int>(ew_weights.size()) != frames) {
      throw validation_error("weights file frame count mismatch");
    }
  }

  SimulateResult result;
  result.label = config.label.empty() ? stem_of(config.input) : config.label;
  result.base_qp = config.qp;
  result.mar = measure_mar(seq, config.profile, config.mode);

  const double c_ref = sequence_cost(ref, config.profile);
  const PsnrResult psnr_ref = psnr(baseline, ref.frames);
  const EwPsnrResult ew_ref = ew_psnr(baseline, ref.frames, ew_weights);

  std::vector<std::vector<ControlPlan>> plan_sets;
  std::vector<double> plan_targets;
  std::vector<double> plan_ms;

  if (!config.plans_path.empty()) {
    std::vector<ControlPlan> plans = load_plans(config.plans_path);
    if (static_cast<int>(plans.size()) != frames) {
      throw validation_error("plans file frame count mismatch");
    }
    plan_sets.push_back(std::move(plans));
    plan_targets.push_back(0.0);
    plan_ms.push_back(0.0);
  } else {
    const ModelParams params = params_for(config);
    const MixTable table = build_mix_table(layout.n_ctus, params);
    std::vector<double> targets = config.targets;
    if (targets.empty()) targets = {0.0};
    for (double target : targets) {
      std::vector<ControlPlan> plans;
      plans.reserve(frames);
      double ms_acc = 0.0;
      for (int poc = 0; poc < frames; ++poc) {
        PlanOptions options;
        options.table = &table;
        options.df_only = seq.frames[poc].is_intra;
        const QpBucket bucket = qp_bucket(seq.frames[poc].qp);
        if (config.wallclock) {
          const auto t0 = std::chrono::steady_clock::now();
          plans.push_back(
              plan_frame(saliency[poc], target, bucket, params, options));
          const auto t1 = std::chrono::steady_clock::now();
          ms_acc += std::chrono::duration<double, std::milli>(t1 - t0).count();
        } else {
          plans.push_back(
              plan_frame(saliency[poc], target, bucket, params, options));
        }
      }
      plan_sets.push_back(std::move(plans));
      plan_targets.push_back(target);
      plan_ms.push_back(ms_acc / frames);
    }
  }

  json summary;
  summary["sequence"] = result.label;
  summary["qp"] = result.base_qp;
  summary["mar"] = result.mar;
  summary["frames"] = frames;
  summary["n_ctus"] = layout.n_ctus;
  summary["cost_profile"] = config.profile.format();
  json jtargets = json::array();
  std::vector<CurvePoint> curve_points;

  for (size_t ti = 0; ti < plan_sets.size(); ++ti) {
    const std::vector<ControlPlan>& plans = plan_sets[ti];
    const double target = plan_targets[ti];
    const std::string tag = target_tag(target);

    const DecodeResult planned = decode_sequence(seq, plans, config.mode);
    TargetRun run;
    run.target = target;
    run.achieved = (c_ref - sequence_cost(planned, config.profile)) / c_ref;
    double pred_acc = 0.0;
    for (const ControlPlan& p : plans) pred_acc += p.predicted_reduction;
    run.predicted_mean = pred_acc / frames;
    run.plan_ms_mean = plan_ms[ti];

    const PsnrResult psnr_planned = psnr(baseline, planned.frames);
    const EwPsnrResult ew_planned =
        ew_psnr(baseline, planned.frames, ew_weights);
    run.delta_psnr = psnr_ref.mean - psnr_planned.mean;
    if (ew_ref.mean.has_value() && ew_planned.mean.has_value()) {
      run.delta_ew_psnr = *ew_ref.mean - *ew_planned.mean;
    }
    run.propagation = propagation_profile(seq, plans, config.mode);

    // Per-frame report.
    std::string csv =
        "poc,type,layer,qp,branch,predicted,ref_cost,plan_cost,reduction,"
        "psnr,ew_psnr\n";
    char buf[256];
    for (int poc = 0; poc < frames; ++poc) {
      const FrameData& fd = seq.frames[poc];
      const double fr_ref = ref.costs[poc].weighted(config.profile);
      const double fr_plan = planned.costs[poc].weighted(config.profile);
      const auto& ew = ew_planned.per_frame[poc];
      char ewbuf[32] = "na";
      if (ew.has_value()) std::snprintf(ewbuf, sizeof(ewbuf), "%.4f", *ew);
      std::snprintf(
          buf, sizeof(buf), "%d,%s,%d,%d,%s,%.8f,%.1f,%.1f,%.8f,%.4f,%s\n",
          poc, fd.is_intra ? "I" : "B", fd.layer, fd.qp,
          plans[poc].branch == PlanBranch::df_only ? "df" : "df+mc",
          plans[poc].predicted_reduction, fr_ref, fr_plan,
          (fr_ref - fr_plan) / fr_ref, psnr_planned.per_frame[poc], ewbuf);
      csv += buf;
    }
    write_file_atomic(join(config.out_dir, result.label + "_" +
                                               std::to_string(config.qp) +
                                               "_" + tag + ".csv"),
                      csv);

    save_plans(plans, join(config.out_dir, "plans_" + tag + ".json"));

    std::string prop = "poc,layer,is_intra,drop_db\n";
    for (int poc = 0; poc < frames; ++poc) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.6f\n", poc,
                    seq.frames[poc].layer, seq.frames[poc].is_intra ? 1 : 0,
                    run.propagation[poc]);
      prop += buf;
    }
    write_file_atomic(join(config.out_dir, "propagation_" + tag + ".csv"),
                      prop);

    json jt;
    jt["target"] = run.target;
    jt["achieved"] = run.achieved;
    jt["predicted_mean"] = run.predicted_mean;
    jt["delta_psnr"] = run.delta_psnr;
    jt["delta_ew_psnr"] = run.delta_ew_psnr;
    if (config.wallclock) jt["plan_ms_mean"] = run.plan_ms_mean;
    jtargets.push_back(jt);

    curve_points.push_back(CurvePoint{result.label, config.qp, run.target,
                                      run.achieved, run.delta_psnr,
                                      run.delta_ew_psnr});
    result.targets.push_back(std::move(run));
  }

  summary["targets"] = jtargets;

  bool all_positive = !plan_targets.empty();
  for (double t : plan_targets) all_positive = all_positive && t > 0.0;
  if (all_positive) {
    std::vector<double> achieved;
    for (const TargetRun& r : result.targets) achieved.push_back(r.achieved);
    const ControlErrorReport rep =
        control_error_report(plan_targets, achieved);
    result.control = rep;
    json jc;
    jc["signed_errors"] = rep.signed_errors;
    jc["mae"] = rep.mae;
    jc["mre"] = rep.mre;
    summary["control_error"] = jc;
  }

  write_file_atomic(join(config.out_dir, "curves.csv"),
                    emit_curves(curve_points));
  write_file_atomic(join(config.out_dir, "summary.json"),
                    summary.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

void cmd_evaluate(const std::string& ref_path, const std::string& test_path,
                  const RunConfig& config) {
  ensure_out_dir(config.out_dir);
  const Clip ref = read_luma_raw(ref_path, config.width, config.height,
                                 config.frames);
  const Clip test = read_luma_raw(test_path, config.width, config.height,
                                  config.frames);
  const PsnrResult p = psnr(ref, test);

  json report;
  report["psnr_mean"] = p.mean;
  report["psnr"] = p.per_frame;
  std::string csv = "frame,psnr";
  if (!config.weights_path.empty()) {
    const FrameLayout layout =
        FrameLayout::make(config.width, config.height, config.ctu_size);
    std::vector<SaliencyMap> weights =
        load_saliency_file(config.weights_path, layout);
    if (weights.size() == 1 && ref.size() > 1) {
      weights.assign(ref.size(), weights[0]);
    }
    const EwPsnrResult ew = ew_psnr(ref, test, weights);
    if (ew.mean.has_value()) report["ew_psnr_mean"] = *ew.mean;
    json arr = json::array();
    for (const auto& v : ew.per_frame) {
      if (v.has_value()) {
        arr.push_back(*v);
      } else {
        arr.push_back(nullptr);
      }
    }
    report["ew_psnr"] = arr;
    csv += ",ew_psnr\n";
    char buf[96];
    for (size_t k = 0; k < p.per_frame.size(); ++k) {
      if (ew.per_frame[k].has_value()) {
        std::snprintf(buf, sizeof(buf), "%zu,%.4f,%.4f\n", k, p.per_frame[k],
                      *ew.per_frame[k]);
      } else {
        std::snprintf(buf, sizeof(buf), "%zu,%.4f,na\n", k, p.per_frame[k]);
      }
      csv += buf;
    }
  } else {
    csv += "\n";
    char buf[64];
    for (size_t k = 0; k < p.per_frame.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%zu,%.4f\n", k, p.per_frame[k]);
      csv += buf;
    }
  }
  write_file_atomic(join(config.out_dir, "evaluate.json"),
                    report.dump(2) + "\n");
  write_file_atomic(join(config.out_dir, "evaluate.csv"), csv);
}

// ---------------------------------------------------------------------------
// curves
// ---------------------------------------------------------------------------

void cmd_curves(const std::vector<std::string>& summary_paths,
                const std::string& out_path) {
  if (summary_paths.empty()) {
    throw validation_error("curves needs at least one summary file");
  }
  std::vector<CurvePoint> points;
  for (const std::string& path : summary_paths) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw validation_error("bad summary JSON " + path + ": " + e.what());
    }
    for (const json& t : j.at("targets")) {
      CurvePoint p;
      p.sequence = j.at("sequence").get<std::string>();
      p.qp = j.at("qp").get<int>();
      p.target = t.at("target").get<double>();
      p.achieved = t.at("achieved").get<double>();
      p.delta_psnr = t.at("delta_psnr").get<double>();
      p.delta_ew_psnr = t.at("delta_ew_psnr").get<double>();
      points.push_back(std::move(p));
    }
  }
  write_file_atomic(out_path, emit_curves(points));
}

}  // namespace sgcc
