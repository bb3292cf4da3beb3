#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgcc {

// Error taxonomy, mapped to process exit codes by the CLI:
// validation_error -> 2, infeasible_error -> 3, degenerate_error -> 4.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Partition of a luma frame into CTUs. Edge CTUs are clipped to the frame
// bounds, so the last column/row may cover fewer than ctu_size pixels.
struct FrameLayout {
  int width = 0;
  int height = 0;
  int ctu_size = 64;
  int ctu_cols = 0;
  int ctu_rows = 0;
  int n_ctus = 0;

  static FrameLayout make(int width, int height, int ctu_size = 64);

  struct Rect {
    int x0, y0, x1, y1;  // half-open
    int pixels() const { return (x1 - x0) * (y1 - y0); }
  };
  Rect ctu_rect(int ctu_index) const;
  int ctu_index_at(int x, int y) const;

  bool operator==(const FrameLayout&) const = default;
};

// Per-CTU attention weights for one frame, each in [0,1].
struct SaliencyMap {
  FrameLayout layout;
  std::vector<double> w;
};

// Rescales raw nonnegative saliency by the per-frame maximum. An all-zero
// input passes through unchanged. Negative values are rejected.
SaliencyMap normalize_saliency(const FrameLayout& layout,
                               std::span<const double> raw);

// Model coefficients are trained per QP range; the bucket value names the
// low end of its range (22, 27, 32 or 37).
struct QpBucket {
  int value = 32;
  bool operator==(const QpBucket&) const = default;
};

// Maps a frame QP in [0,51] to its coefficient bucket. QPs below 22 use
// bucket 22 and QPs above 41 use bucket 37.
QpBucket qp_bucket(int qp);

// Index 0..3 for buckets 22/27/32/37.
int bucket_index(QpBucket bucket);

struct BucketParams {
  double a = 0.0;  // slope of the DF complexity model
  double b = 0.0;  // intercept of the DF complexity model
  double c = 0.0;  // slope of the MC complexity model
};

// Fitted model coefficients: one global cubic (h1,h2,h3) for the MC
// distortion ratio and per-bucket (a,b,c) complexity coefficients.
struct ModelParams {
  double h1 = 0.0, h2 = 0.0, h3 = 0.0;
  BucketParams buckets[4];

  const BucketParams& at(QpBucket bucket) const {
    return buckets[bucket_index(bucket)];
  }
  BucketParams& at(QpBucket bucket) { return buckets[bucket_index(bucket)]; }

  // Built-in coefficient set, selectable via `fit --params-init table3`.
  static ModelParams preset_table3();

  // Checks a,b,c > 0 for every bucket and that the cubic passes near (3,1).
  void validate() const;
};

ModelParams load_model_params(const std::string& path);
void save_model_params(const ModelParams& params, const std::string& path);
std::string model_params_to_json(const ModelParams& params);
ModelParams model_params_from_json(const std::string& text);

enum class PlanBranch : uint8_t { df_only, df_mc };

// Per-CTU decode decisions for one frame: f=1 disables deblocking for the
// CTU, g in {0..3} is the count of samples per 2x2 group reconstructed by
// nearest-neighbour copy instead of motion compensation.
struct ControlPlan {
  PlanBranch branch = PlanBranch::df_only;
  std::vector<uint8_t> f;
  std::vector<uint8_t> g;
  double predicted_reduction = 0.0;
};

// Shared validator: sizes match n_ctus, f binary, g in range,
// predicted_reduction in [0,1], and the branch shape holds (df_only has all
// g=0, df_mc has all f=1). Throws validation_error.
void validate_plan(const ControlPlan& plan, int n_ctus);

std::string plans_to_json(std::span<const ControlPlan> plans);
std::vector<ControlPlan> plans_from_json(const std::string& text);
void save_plans(std::span<const ControlPlan> plans, const std::string& path);
std::vector<ControlPlan> load_plans(const std::string& path);

// Saliency text file: one line per frame, "frame_index,w_0,...,w_{N-1}".
std::vector<SaliencyMap> load_saliency_file(const std::string& path,
                                            const FrameLayout& layout);
void save_saliency_file(std::span<const SaliencyMap> maps,
                        const std::string& path);

// Writes a file atomically (write to a temp sibling, then rename).
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace sgcc
