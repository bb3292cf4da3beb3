#pragma once

#include <optional>
#include <vector>

#include "sgcc/core_types.hpp"

namespace sgcc {

// Counts of CTUs assigned MC simplification levels 1, 2 and 3 in one frame.
struct MixTriple {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;
  bool operator==(const MixTriple&) const = default;
};

struct SolveDiagnostics {
  PlanBranch branch = PlanBranch::df_only;
  int threshold_index = 0;    // I: number of CTUs selected by the DF solve
  int budget = 0;             // B: integer MC budget, 0..3N
  long nodes_explored = 0;    // branch-and-bound nodes
  double residual_target = 0.0;  // target left for MC after DF capacity
  double predicted_reduction = 0.0;
  bool intra_capped = false;  // target was capped to DF capacity (I frame)
};

struct DfSolve {
  std::vector<uint8_t> f;
  SolveDiagnostics diag;
};

// Selects the CTUs whose deblocking is disabled so the modelled reduction
// meets `target` with the least total selected saliency. Selection is the
// minimal prefix of the ascending-saliency order (ties by lower CTU index).
// Throws infeasible_error when target exceeds the DF capacity.
DfSolve solve_df_threshold(const SaliencyMap& saliency, double target,
                           QpBucket bucket, const ModelParams& params);

struct MixSolve {
  MixTriple mix;
  double objective = 0.0;
  long nodes = 0;
};

// Quadratic objective both mix solvers minimize. Shared so the oracle and
// the search produce bit-identical values.
double mix_objective(const MixTriple& m, double alpha, double beta);

double mix_alpha(const ModelParams& params);  // 8*h1 + 4*h2 + 2*h3
double mix_beta(const ModelParams& params);   // h1 + h2 + h3

// Brute-force minimizer over all feasible triples (n1 + 2*n2 + 3*n3 >= B,
// n1 + n2 + n3 <= N). Ties broken by smaller n3, then smaller n2. Guarded
// to N <= 64.
MixSolve solve_mix_exhaustive(int n_ctus, int budget,
                              const ModelParams& params);

// Branch-and-bound minimizer; agrees with solve_mix_exhaustive in objective
// and triple under the shared tie-break.
MixSolve solve_mix_bnb(int n_ctus, int budget, const ModelParams& params);

// Precomputed mix solutions for every integer budget in [0, 3N].
struct MixTable {
  int n_ctus = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<MixTriple> entries;
  std::vector<double> objectives;

  const MixTriple& lookup(int budget) const;
};

MixTable build_mix_table(int n_ctus, const ModelParams& params);

std::string mix_table_to_json(const MixTable& table);
MixTable mix_table_from_json(const std::string& text);
void save_mix_table(const MixTable& table, const std::string& path);
MixTable load_mix_table(const std::string& path);

enum class MixStrategy {
  // Quadratic surrogate objective solved once per budget; table-friendly.
  approx_quadratic,
  // Exact sorted-weight objective solved per frame from prefix sums.
  exact_weights,
};

struct PlanOptions {
  const MixTable* table = nullptr;
  MixStrategy strategy = MixStrategy::approx_quadratic;
  // Intra frames have no MC to simplify: cap the target at the DF capacity
  // instead of rejecting it.
  bool df_only = false;
};

// Maximum reduction plannable for this frame (all f=1, all g=3).
double max_planned_reduction(const SaliencyMap& saliency, QpBucket bucket,
                             const ModelParams& params);

// Decides per-CTU deblock flags and MC levels for one frame so the modelled
// reduction meets `target` with minimal saliency-weighted quality loss.
ControlPlan plan_frame(const SaliencyMap& saliency, double target,
                       QpBucket bucket, const ModelParams& params,
                       const PlanOptions& options = {},
                       SolveDiagnostics* diagnostics = nullptr);

}  // namespace sgcc
