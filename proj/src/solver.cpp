#include "sgcc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "sgcc/models.hpp"

namespace sgcc {

using nlohmann::json;

namespace {
constexpr double kFeasEps = 1e-12;
}

DfSolve solve_df_threshold(const SaliencyMap& saliency, double target,
                           QpBucket bucket, const ModelParams& params) {
  const int n = saliency.layout.n_ctus;
  const BucketParams& bp = params.at(bucket);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return saliency.w[i] < saliency.w[j];
  });

  DfSolve out;
  out.f.assign(n, 0);
  out.diag.branch = PlanBranch::df_only;

  double acc = 0.0;  // sum of (a*w + b) over selected CTUs
  int i = 0;
  const double nd = static_cast<double>(n);
  while (acc / nd + kFeasEps < target) {
    if (i == n) {
      throw infeasible_error(
          "DF target " + std::to_string(target) +
          " exceeds capacity " + std::to_string(acc / nd));
    }
    const int idx = order[i++];
    out.f[idx] = 1;
    acc += bp.a * saliency.w[idx] + bp.b;
  }
  out.diag.threshold_index = i;
  out.diag.predicted_reduction = acc / nd;
  return out;
}

double mix_alpha(const ModelParams& params) {
  return 8.0 * params.h1 + 4.0 * params.h2 + 2.0 * params.h3;
}

double mix_beta(const ModelParams& params) {
  return params.h1 + params.h2 + params.h3;
}

double mix_objective(const MixTriple& m, double alpha, double beta) {
  const double u = static_cast<double>(m.n3);
  const double t = static_cast<double>(m.n2 + m.n3);
  const double s = static_cast<double>(m.n1 + m.n2 + m.n3);
  return u * u + alpha * (t * t - u * u) + beta * (s * s - t * t);
}

MixSolve solve_mix_exhaustive(int n_ctus, int budget,
                              const ModelParams& params) {
  if (n_ctus < 1 || n_ctus > 64) {
    throw validation_error("exhaustive mix solve is guarded to N in [1,64]");
  }
  if (budget < 0 || budget > 3 * n_ctus) {
    throw infeasible_error("mix budget " + std::to_string(budget) +
                           " outside [0, 3N] for N=" + std::to_string(n_ctus));
  }
  const double alpha = mix_alpha(params);
  const double beta = mix_beta(params);

  MixSolve best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int n3 = 0; n3 <= n_ctus; ++n3) {
    for (int n2 = 0; n2 + n3 <= n_ctus; ++n2) {
      for (int n1 = 0; n1 + n2 + n3 <= n_ctus; ++n1) {
        ++best.nodes;
        if (n1 + 2 * n2 + 3 * n3 < budget) continue;
        const MixTriple m{n1, n2, n3};
        const double j = mix_objective(m, alpha, beta);
        if (j < best.objective) {
          best.objective = j;
          best.mix = m;
        }
      }
    }
  }
  return best;
}

namespace {

// Continuous lower bound on the mix objective for a fixed n3, minimizing
// over real-valued t = n2+n3 and s = n1+n2+n3 with t >= u, s >= max(t, m-t),
// s <= N, t+s >= m where m = budget - n3. Infinity when no completion fits.
double mix_bound_for_n3(int n3, int n_ctus, int budget, double alpha,
                        double beta) {
  const double u = static_cast<double>(n3);
  const double nd = static_cast<double>(n_ctus);
  const double m = static_cast<double>(budget - n3);
  const double head = (1.0 - alpha) * u * u;
  if (m <= 2.0 * u) return u * u;  // t = s = u already meets the budget
  const double t_lo = std::max(u, m - nd);
  if (t_lo > nd) return std::numeric_limits<double>::infinity();

  auto f_low = [&](double t) {  // t <= m/2 piece: s = m - t
    return (alpha - beta) * t * t + beta * (m - t) * (m - t);
  };
  auto f_high = [&](double t) {  // t >= m/2 piece: s = t
    return alpha * t * t;
  };

  double lo = std::numeric_limits<double>::infinity();
  const double half = m / 2.0;
  if (t_lo <= half) {
    const double hi1 = std::min(half, nd);
    double t_star = hi1;
    if (alpha > 0.0) t_star = std::clamp(beta * m / alpha, t_lo, hi1);
    lo = std::min({f_low(t_lo), f_low(hi1), f_low(t_star)});
  }
  const double t2 = std::max(t_lo, half);
  if (t2 <= nd) lo = std::min(lo, f_high(t2));
  return head + lo;
}

}  // namespace

MixSolve solve_mix_bnb(int n_ctus, int budget, const ModelParams& params) {
  if (n_ctus < 1) throw validation_error("mix solve needs N >= 1");
  if (budget < 0 || budget > 3 * n_ctus) {
    throw infeasible_error("mix budget " + std::to_string(budget) +
                           " outside [0, 3N] for N=" + std::to_string(n_ctus));
  }
  const double alpha = mix_alpha(params);
  const double beta = mix_beta(params);

  MixSolve best;
  best.objective = std::numeric_limits<double>::infinity();

  // Depth-first on n3 then n2; the cheapest feasible n1 is implied. Any
  // completion of a node with level n3 costs at least n3^2, and at least
  // the continuous relaxation bound.
  for (int n3 = 0; n3 <= n_ctus; ++n3) {
    ++best.nodes;
    const double u2 = static_cast<double>(n3) * static_cast<double>(n3);
    if (u2 >= best.objective) break;
    if (mix_bound_for_n3(n3, n_ctus, budget, alpha, beta) >= best.objective) {
      continue;
    }
    for (int n2 = 0; n2 + n3 <= n_ctus; ++n2) {
      ++best.nodes;
      const int n1_min = std::max(0, budget - 2 * n2 - 3 * n3);
      if (n1_min + n2 + n3 > n_ctus) continue;  // infeasible at this n2
      const MixTriple m{n1_min, n2, n3};
      const double j = mix_objective(m, alpha, beta);
      if (j < best.objective) {
        best.objective = j;
        best.mix = m;
      } else if (n1_min == 0) {
        // With the budget already met, the objective is nondecreasing in
        // n2; no strictly better node remains at this n3.
        break;
      }
    }
  }
  return best;
}

const MixTriple& MixTable::lookup(int budget) const {
  if (budget < 0 || budget >= static_cast<int>(entries.size())) {
    throw validation_error("mix table lookup budget " +
                           std::to_string(budget) + " outside [0, 3N]");
  }
  return entries[budget];
}

MixTable build_mix_table(int n_ctus, const ModelParams& params) {
  if (n_ctus < 1) throw validation_error("mix table needs N >= 1");
  MixTable t;
  t.n_ctus = n_ctus;
  t.alpha = mix_alpha(params);
  t.beta = mix_beta(params);
  t.entries.reserve(3 * n_ctus + 1);
  t.objectives.reserve(3 * n_ctus + 1);
  for (int b = 0; b <= 3 * n_ctus; ++b) {
    MixSolve s = solve_mix_bnb(n_ctus, b, params);
    t.entries.push_back(s.mix);
    t.objectives.push_back(s.objective);
  }
  return t;
}

std::string mix_table_to_json(const MixTable& table) {
  json j;
  j["N"] = table.n_ctus;
  j["alpha"] = table.alpha;
  j["beta"] = table.beta;
  json entries = json::array();
  for (const MixTriple& m : table.entries) {
    entries.push_back({m.n1, m.n2, m.n3});
  }
  j["entries"] = entries;
  return j.dump() + "\n";
}

MixTable mix_table_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad mix table JSON: ") + e.what());
  }
  MixTable t;
  t.n_ctus = j.at("N").get<int>();
  t.alpha = j.at("alpha").get<double>();
  t.beta = j.at("beta").get<double>();
  for (const json& e : j.at("entries")) {
    if (!e.is_array() || e.size() != 3) {
      throw validation_error("mix table entry must be [n1,n2,n3]");
    }
    MixTriple m{e[0].get<int>(), e[1].get<int>(), e[2].get<int>()};
    t.entries.push_back(m);
    t.objectives.push_back(mix_objective(m, t.alpha, t.beta));
  }
  if (static_cast<int>(t.entries.size()) != 3 * t.n_ctus + 1) {
    throw validation_error("mix table entry count does not match N");
  }
  return t;
}

void save_mix_table(const MixTable& table, const std::string& path) {
  write_file_atomic(path, mix_table_to_json(table));
}

MixTable load_mix_table(const std::string& path) {
  return mix_table_from_json(read_file(path));
}

namespace {

// Exact counterpart of the quadratic surrogate: minimizes the true sorted-
// weight objective prefix[u] + alpha*(prefix[t]-prefix[u]) +
// beta*(prefix[s]-prefix[t]) over the same feasible set.
MixSolve solve_mix_exact_weights(const std::vector<double>& prefix,
                                 int n_ctus, int budget, double alpha,
                                 double beta) {
  MixSolve best;
  best.objective = std::numeric_limits<double>::infinity();
  auto obj = [&](int u, int t, int s) {
    return (1.0 - alpha) * prefix[u] + (alpha - beta) * prefix[t] +
           beta * prefix[s];
  };
  for (int n3 = 0; n3 <= n_ctus; ++n3) {
    ++best.nodes;
    if ((1.0 - alpha) * prefix[n3] + (alpha - beta) * prefix[n3] +
            beta * prefix[n3] >=
        best.objective) {
      break;  // objective of any completion is at least prefix[n3]
    }
    for (int n2 = 0; n2 + n3 <= n_ctus; ++n2) {
      ++best.nodes;
      const int n1_min = std::max(0, budget - 2 * n2 - 3 * n3);
      if (n1_min + n2 + n3 > n_ctus) continue;
      const int t = n2 + n3;
      const int s = n1_min + t;
      const double j = obj(n3, t, s);
      if (j < best.objective) {
        best.objective = j;
        best.mix = MixTriple{n1_min, n2, n3};
      } else if (n1_min == 0) {
        break;
      }
    }
  }
  return best;
}

}  // namespace

double max_planned_reduction(const SaliencyMap& saliency, QpBucket bucket,
                             const ModelParams& params) {
  return df_capacity(saliency, bucket, params) + 3.0 * params.at(bucket).c;
}

ControlPlan plan_frame(const SaliencyMap& saliency, double target,
                       QpBucket bucket, const ModelParams& params,
                       const PlanOptions& options,
                       SolveDiagnostics* diagnostics) {
  const int n = saliency.layout.n_ctus;
  if (target < 0.0) {
    throw validation_error("reduction target must be nonnegative");
  }
  const double capacity = df_capacity(saliency, bucket, params);
  const double mar = capacity + 3.0 * params.at(bucket).c;

  SolveDiagnostics diag;
  double effective = target;
  if (options.df_only && effective > capacity) {
    effective = capacity;
    diag.intra_capped = true;
  }
  if (effective > mar + kFeasEps) {
    throw infeasible_error("target " + std::to_string(target) +
                           " exceeds achievable maximum " +
                           std::to_string(mar));
  }

  ControlPlan plan;
  if (effective <= capacity + kFeasEps) {
    DfSolve df = solve_df_threshold(saliency, effective, bucket, params);
    plan.branch = PlanBranch::df_only;
    plan.f = std::move(df.f);
    plan.g.assign(n, 0);
    diag.branch = PlanBranch::df_only;
    diag.threshold_index = df.diag.threshold_index;
  } else {
    plan.branch = PlanBranch::df_mc;
    plan.f.assign(n, 1);
    plan.g.assign(n, 0);

    const double c = params.at(bucket).c;
    const double residual = effective - capacity;
    int budget = static_cast<int>(
        std::ceil(static_cast<double>(n) * residual / c - kFeasEps));
    budget = std::clamp(budget, 0, 3 * n);

    MixTriple mix;
    if (options.table != nullptr &&
        options.strategy == MixStrategy::approx_quadratic) {
      if (options.table->n_ctus != n) {
        throw validation_error("mix table built for N=" +
                               std::to_string(options.table->n_ctus) +
                               ", frame has N=" + std::to_string(n));
      }
      mix = options.table->lookup(budget);
    } else if (options.strategy == MixStrategy::exact_weights) {
      std::vector<double> sorted_w = saliency.w;
      std::sort(sorted_w.begin(), sorted_w.end());
      std::vector<double> prefix(n + 1, 0.0);
      for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted_w[i];
      MixSolve s = solve_mix_exact_weights(prefix, n, budget,
                                           mix_alpha(params),
                                           mix_beta(params));
      mix = s.mix;
      diag.nodes_explored = s.nodes;
    } else {
      MixSolve s = solve_mix_bnb(n, budget, params);
      mix = s.mix;
      diag.nodes_explored = s.nodes;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
      return saliency.w[i] < saliency.w[j];
    });
    int pos = 0;
    for (int k = 0; k < mix.n3; ++k) plan.g[order[pos++]] = 3;
    for (int k = 0; k < mix.n2; ++k) plan.g[order[pos++]] = 2;
    for (int k = 0; k < mix.n1; ++k) plan.g[order[pos++]] = 1;

    diag.branch = PlanBranch::df_mc;
    diag.budget = budget;
    diag.residual_target = residual;
  }

  double predicted = 0.0;
  for (int i = 0; i < n; ++i) {
    predicted += dc_df(plan.f[i], saliency.w[i], bucket, n, params);
    predicted += dc_mc(plan.g[i], n, bucket, params);
  }
  plan.predicted_reduction = predicted;
  diag.predicted_reduction = predicted;
  if (diagnostics != nullptr) *diagnostics = diag;
  validate_plan(plan, n);
  return plan;
}

}  // namespace sgcc
