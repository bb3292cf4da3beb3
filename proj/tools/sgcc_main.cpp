#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgcc/pipeline.hpp"

namespace {

void add_layout_flags(CLI::App* cmd, sgcc::RunConfig& config) {
  cmd->add_option("--width", config.width, "frame width in pixels");
  cmd->add_option("--height", config.height, "frame height in pixels");
  cmd->add_option("--frames", config.frames, "frame count");
  cmd->add_option("--ctu-size", config.ctu_size, "CTU size (power of two)")
      ->default_val(64);
}

void add_codec_flags(CLI::App* cmd, sgcc::RunConfig& config) {
  cmd->add_option("--gop", config.gop_size, "GOP size")->default_val(8);
  cmd->add_option("--intra-period", config.intra_period,
                  "frames between intra refreshes")
      ->default_val(32);
  cmd->add_option("--mc-block", config.mc_block, "motion block size")
      ->default_val(16);
  cmd->add_option("--search-range", config.search_range,
                  "integer motion search range")
      ->default_val(16);
}

std::string cost_profile_text;

void add_common_flags(CLI::App* cmd, sgcc::RunConfig& config) {
  cmd->add_option("--out", config.out_dir, "output directory");
  cmd->add_option("--seed", config.seed, "seed for synthetic content")
      ->default_val(1);
  cmd->add_option("--cost-profile", cost_profile_text,
                  "op-count weights 'mc,df,base'");
  cmd->add_flag("--serial", [&config](int64_t) {
    config.mode = sgcc::ExecMode::serial;
  }, "run kernels on the serial reference path");
}

void finish_config(sgcc::RunConfig& config) {
  if (!cost_profile_text.empty()) {
    config.profile = sgcc::CostProfile::parse(cost_profile_text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-CTU decode complexity control toolkit"};
  app.require_subcommand(1);

  sgcc::RunConfig config;
  std::vector<std::string> curve_inputs;
  std::string curves_out = "curves.csv";
  std::string eval_ref, eval_test;

  CLI::App* fit = app.add_subcommand("fit", "train model coefficients");
  fit->add_option("--input", config.input, "raw luma training clip");
  fit->add_option("--clip", config.clip, "synthetic training clip name");
  fit->add_option("--saliency", config.saliency_path, "saliency file");
  fit->add_option("--qps", config.qps, "training QPs")->delimiter(',');
  fit->add_option("--params-init", config.params_init,
                  "write a built-in coefficient set instead of training");
  fit->add_flag("--h-per-bucket", config.h_per_bucket,
                "also fit the cubic per QP bucket (report only)");
  add_layout_flags(fit, config);
  add_codec_flags(fit, config);
  add_common_flags(fit, config);

  CLI::App* gen = app.add_subcommand("gen", "write a synthetic clip");
  gen->add_option("--clip", config.clip, "clip name")->required();
  gen->add_option("--label", config.label, "output base name");
  add_layout_flags(gen, config);
  add_common_flags(gen, config);

  CLI::App* plan = app.add_subcommand("plan", "plan frames from a saliency file");
  plan->add_option("--saliency", config.saliency_path, "saliency file")
      ->required();
  plan->add_option("--params", config.params_path, "model params JSON");
  plan->add_option("--params-init", config.params_init, "built-in params");
  plan->add_option("--targets", config.targets, "reduction targets")
      ->delimiter(',')
      ->required();
  plan->add_option("--qp", config.qp, "frame QP")->default_val(32);
  add_layout_flags(plan, config);
  add_common_flags(plan, config);

  CLI::App* table = app.add_subcommand("table", "precompute mix solutions");
  table->add_option("--n", config.table_n, "CTUs per frame")->required();
  table->add_option("--params", config.params_path, "model params JSON");
  table->add_option("--params-init", config.params_init, "built-in params");
  add_common_flags(table, config);

  CLI::App* io_sim = app.add_subcommand("simulate", "encode, plan and decode");
  io_sim->add_option("--input", config.input,
                     "raw luma clip or .psq container")
      ->required();
  io_sim->add_option("--saliency", config.saliency_path, "saliency file");
  io_sim->add_option("--weights", config.weights_path,
                     "independent EW-PSNR weight file");
  io_sim->add_option("--params", config.params_path, "model params JSON");
  io_sim->add_option("--params-init", config.params_init, "built-in params");
  io_sim->add_option("--plans", config.plans_path, "precomputed plans JSON");
  io_sim->add_option("--targets", config.targets, "reduction targets")
      ->delimiter(',');
  io_sim->add_option("--qp", config.qp, "base QP")->default_val(32);
  io_sim->add_option("--qp-file", config.qp_file, "per-frame base QPs");
  io_sim->add_option("--label", config.label, "sequence label in reports");
  io_sim->add_flag("--wallclock", config.wallclock,
                   "record planning wall-clock overhead");
  add_layout_flags(io_sim, config);
  add_codec_flags(io_sim, config);
  add_common_flags(io_sim, config);

  CLI::App* evaluate = app.add_subcommand("evaluate", "PSNR between raw clips");
  evaluate->add_option("--ref", eval_ref, "reference raw luma")->required();
  evaluate->add_option("--test", eval_test, "test raw luma")->required();
  evaluate->add_option("--weights", config.weights_path,
                       "per-CTU weight file for EW-PSNR");
  add_layout_flags(evaluate, config);
  add_common_flags(evaluate, config);

  CLI::App* curves = app.add_subcommand("curves", "merge simulate summaries");
  curves->add_option("--inputs", curve_inputs, "summary.json files")
      ->required();
  curves->add_option("--out-file", curves_out, "merged CSV path")
      ->default_val("curves.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    finish_config(config);
    if (fit->parsed()) {
      sgcc::cmd_fit(config);
    } else if (gen->parsed()) {
      sgcc::cmd_gen(config);
    } else if (plan->parsed()) {
      sgcc::cmd_plan(config);
    } else if (table->parsed()) {
      sgcc::cmd_table(config);
    } else if (io_sim->parsed()) {
      sgcc::cmd_simulate(config);
    } else if (evaluate->parsed()) {
      sgcc::cmd_evaluate(eval_ref, eval_test, config);
    } else if (curves->parsed()) {
      sgcc::cmd_curves(curve_inputs, curves_out);
    }
  } catch (const sgcc::validation_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const sgcc::infeasible_error& e) {
    std::fprintf(stderr, "infeasible target: %s\n", e.what());
    return 3;
  } catch (const sgcc::degenerate_error& e) {
    std::fprintf(stderr, "degenerate data: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
