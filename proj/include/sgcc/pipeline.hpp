#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgcc/core_types.hpp"
#include "sgcc/evaluation.hpp"
#include "sgcc/fitting.hpp"
#include "sgcc/proxy_codec.hpp"
#include "sgcc/solver.hpp"
#include "sgcc/synthetic.hpp"

namespace sgcc {

// Resolved configuration of one CLI command. Flags take precedence over
// defaults; referenced files are validated when the command runs.
struct RunConfig {
  std::string input;          // raw luma file or .psq container
  std::string saliency_path;  // optional; derived from content when empty
  std::string weights_path;   // optional independent EW-PSNR weighting
  std::string params_path;
  std::string params_init;    // "table3" writes the built-in constants
  std::string plans_path;
  std::string qp_file;        // one base QP per frame
  std::string out_dir;
  std::string label;          // sequence name in reports
  std::string clip;           // synthetic clip name for gen/fit
  int width = 0;
  int height = 0;
  int frames = 0;
  int ctu_size = 64;
  int gop_size = 8;
  int intra_period = 32;
  int qp = 32;
  std::vector<int> qps;  // fit: one encode per QP
  std::vector<double> targets;
  uint64_t seed = 1;
  bool wallclock = false;
  bool h_per_bucket = false;
  int table_n = 0;
  int mc_block = 16;
  int search_range = 16;
  CostProfile profile;
  ExecMode mode = ExecMode::parallel;
};

struct FitResult {
  ModelParams params;
  std::map<int, AffineFit> df_fits;      // by bucket value
  std::map<int, OriginFit> mc_fits;      // by bucket value
  CubicFit cubic;                        // global h fit
  std::map<int, CubicFit> cubic_per_bucket;  // only with h_per_bucket
  double srcc_mean = 0.0;
  int srcc_count = 0;
};

// Encodes the training input at every requested QP, collects samples and
// fits the per-bucket and global coefficients. Writes params JSON, a fit
// report and the sample CSVs into out_dir.
FitResult cmd_fit(const RunConfig& config);

// Writes the synthetic clip and its derived saliency file.
void cmd_gen(const RunConfig& config);

struct PlanFileResult {
  double target = 0.0;
  std::vector<ControlPlan> plans;
  std::vector<SolveDiagnostics> diagnostics;
};

// Plans each saliency-file frame for every target; one plans file and one
// diagnostics file per target.
std::vector<PlanFileResult> cmd_plan(const RunConfig& config);

void cmd_table(const RunConfig& config);

struct TargetRun {
  double target = 0.0;
  double achieved = 0.0;
  double predicted_mean = 0.0;
  double delta_psnr = 0.0;
  double delta_ew_psnr = 0.0;
  std::vector<double> propagation;  // per POC
  double plan_ms_mean = 0.0;        // only measured with wallclock
};

struct SimulateResult {
  std::string label;
  int base_qp = 32;
  double mar = 0.0;
  std::vector<TargetRun> targets;
  std::optional<ControlErrorReport> control;
};

// Full pipeline: encode (or load), plan per frame per target, decode with
// and without plans, measure reductions and quality, write all reports.
SimulateResult cmd_simulate(const RunConfig& config);

// PSNR / EW-PSNR between two raw files.
void cmd_evaluate(const std::string& ref_path, const std::string& test_path,
                  const RunConfig& config);

// Merges curve rows from simulate summary files into one CSV.
void cmd_curves(const std::vector<std::string>& summary_paths,
                const std::string& out_path);

}  // namespace sgcc
