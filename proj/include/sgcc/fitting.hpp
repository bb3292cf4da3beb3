#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgcc/core_types.hpp"

namespace sgcc {

// One deblock training point: saliency of a CTU and the frame-complexity
// reduction from disabling its filter, scaled by the frame CTU count so
// different resolutions pool into one regression.
struct DfComplexitySample {
  double w = 0.0;  // in [0,1]
  double y = 0.0;  // N * reduction fraction
};

// One MC complexity point: simplification level and the scaled per-sequence
// mean reduction at that level.
struct McComplexitySample {
  int g = 0;
  double y = 0.0;  // N * mean reduction fraction
};

// One MC distortion point: level and the sequence MSE ratio relative to
// level 3.
struct McMseSample {
  int g = 0;
  double ratio = 0.0;
};

struct AffineFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  int count = 0;
};

// Ordinary least squares of y on w. Rejects rank-deficient input (all w
// identical).
AffineFit fit_affine(std::span<const DfComplexitySample> samples);

struct OriginFit {
  double c = 0.0;
  double r2 = 0.0;
  int count = 0;
};

// Least squares of y = c*g with no intercept. Rejects input with only g=0
// samples.
OriginFit fit_line_through_origin(std::span<const McComplexitySample> samples);

struct CubicFit {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
  double r2 = 0.0;
  int count = 0;
};

// Least squares on the basis {g^3, g^2, g} (no constant term). Requires
// samples covering g = 1, 2 and 3. The fit is rejected when its value at
// g=3 strays more than 0.01 from 1, or when it is not nondecreasing on
// {0,1,2,3}; a non-monotone ratio would invalidate the solver's ordering.
CubicFit fit_cubic_no_constant(std::span<const McMseSample> samples);

// Spearman rank correlation with average-rank tie handling. Empty when
// either sequence is constant.
std::optional<double> spearman_rcc(std::span<const double> x,
                                   std::span<const double> y);

// CSV I/O: two columns with a header row ("w,y" or "g,y" or "g,ratio").
std::vector<DfComplexitySample> load_df_samples(const std::string& path);
void save_df_samples(std::span<const DfComplexitySample> s,
                     const std::string& path);
std::vector<McComplexitySample> load_mc_samples(const std::string& path);
void save_mc_samples(std::span<const McComplexitySample> s,
                     const std::string& path);
std::vector<McMseSample> load_mse_samples(const std::string& path);
void save_mse_samples(std::span<const McMseSample> s, const std::string& path);

}  // namespace sgcc
