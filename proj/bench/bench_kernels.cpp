#include <benchmark/benchmark.h>

#include "sgcc/proxy_codec.hpp"
#include "sgcc/solver.hpp"
#include "sgcc/synthetic.hpp"

namespace {

using namespace sgcc;

struct Fixture {
  Clip clip;
  FrameLayout layout;
  GopStructure gop;
  std::vector<int> qps;
  ProxySequence seq;

  Fixture() {
    clip = generate_clip("translating_texture", 320, 192, 9, 7);
    layout = FrameLayout::make(320, 192, 64);
    gop = GopStructure::make(9, 8, 32);
    qps.assign(9, 32);
    EncodeConfig cfg;
    cfg.mode = ExecMode::serial;
    seq = encode_sequence(clip, gop, qps, layout, cfg);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bench_encode(benchmark::State& state, ExecMode mode) {
  Fixture& f = fixture();
  EncodeConfig cfg;
  cfg.mode = mode;
  for (auto _ : state) {
    ProxySequence seq = encode_sequence(f.clip, f.gop, f.qps, f.layout, cfg);
    benchmark::DoNotOptimize(seq.frames.data());
  }
}

void bench_decode(benchmark::State& state, ExecMode mode) {
  Fixture& f = fixture();
  for (auto _ : state) {
    DecodeResult dec = decode_sequence(f.seq, {}, mode);
    benchmark::DoNotOptimize(dec.frames.data());
  }
}

void bench_deblock(benchmark::State& state, ExecMode mode) {
  Fixture& f = fixture();
  DecodeResult dec = decode_sequence(f.seq, {}, ExecMode::serial);
  std::vector<uint8_t> flags(f.layout.n_ctus, 0);
  for (auto _ : state) {
    Plane frame = dec.frames[4];
    deblock_frame(frame, flags, f.layout, nullptr, mode);
    benchmark::DoNotOptimize(frame.pix.data());
  }
}

void bench_plan(benchmark::State& state, bool with_table) {
  const ModelParams params = ModelParams::preset_table3();
  const FrameLayout layout = FrameLayout::make(1920, 1080, 64);
  std::vector<double> raw(layout.n_ctus);
  for (int i = 0; i < layout.n_ctus; ++i) {
    raw[i] = static_cast<double>((i * 2654435761u) % 1000) / 1000.0;
  }
  const SaliencyMap map = normalize_saliency(layout, raw);
  const MixTable table = build_mix_table(layout.n_ctus, params);
  PlanOptions options;
  if (with_table) options.table = &table;
  for (auto _ : state) {
    ControlPlan plan =
        plan_frame(map, 0.20, QpBucket{32}, params, options);
    benchmark::DoNotOptimize(plan.g.data());
  }
}

BENCHMARK_CAPTURE(bench_encode, serial, ExecMode::serial);
BENCHMARK_CAPTURE(bench_encode, openmp, ExecMode::parallel);
BENCHMARK_CAPTURE(bench_decode, serial, ExecMode::serial);
BENCHMARK_CAPTURE(bench_decode, openmp, ExecMode::parallel);
BENCHMARK_CAPTURE(bench_deblock, serial, ExecMode::serial);
BENCHMARK_CAPTURE(bench_deblock, openmp, ExecMode::parallel);
BENCHMARK_CAPTURE(bench_plan, live_solve, false);
BENCHMARK_CAPTURE(bench_plan, table_lookup, true);

}  // namespace

BENCHMARK_MAIN();
