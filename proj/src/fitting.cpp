#include "sgcc/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sgcc {

namespace {

double r_square(std::span<const double> y, std::span<const double> fitted) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - fitted[i]) * (y[i] - fitted[i]);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

AffineFit fit_affine(std::span<const DfComplexitySample> samples) {
  if (samples.size() < 2) {
    throw degenerate_error("affine fit needs at least 2 samples");
  }
  const double n = static_cast<double>(samples.size());
  double sw = 0.0, sy = 0.0, sww = 0.0, swy = 0.0;
  for (const auto& s : samples) {
    sw += s.w;
    sy += s.y;
    sww += s.w * s.w;
    swy += s.w * s.y;
  }
  const double det = n * sww - sw * sw;
  if (std::abs(det) < 1e-12 * std::max(1.0, n * sww)) {
    throw degenerate_error("affine fit is rank deficient: all w identical");
  }
  AffineFit fit;
  fit.a = (n * swy - sw * sy) / det;
  fit.b = (sy * sww - sw * swy) / det;
  fit.count = static_cast<int>(samples.size());

  std::vector<double> y(samples.size()), f(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    y[i] = samples[i].y;
    f[i] = fit.a * samples[i].w + fit.b;
  }
  fit.r2 = r_square(y, f);
  return fit;
}

OriginFit fit_line_through_origin(
    std::span<const McComplexitySample> samples) {
  double sxx = 0.0, sxy = 0.0;
  bool any_nonzero_g = false;
  for (const auto& s : samples) {
    if (s.g > 0) any_nonzero_g = true;
    const double g = static_cast<double>(s.g);
    sxx += g * g;
    sxy += g * s.y;
  }
  if (!any_nonzero_g) {
    throw degenerate_error("origin fit needs at least one sample with g > 0");
  }
  OriginFit fit;
  fit.c = sxy / sxx;
  fit.count = static_cast<int>(samples.size());

  std::vector<double> y(samples.size()), f(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    y[i] = samples[i].y;
    f[i] = fit.c * static_cast<double>(samples[i].g);
  }
  fit.r2 = r_square(y, f);
  return fit;
}

CubicFit fit_cubic_no_constant(std::span<const McMseSample> samples) {
  bool has[4] = {false, false, false, false};
  for (const auto& s : samples) {
    if (s.g >= 0 && s.g <= 3) has[s.g] = true;
  }
  if (!(has[1] && has[2] && has[3])) {
    throw degenerate_error("cubic fit needs samples covering g = 1, 2 and 3");
  }

  // Normal equations for basis {g^3, g^2, g}.
  double m[3][3] = {};
  double rhs[3] = {};
  for (const auto& s : samples) {
    const double g = static_cast<double>(s.g);
    const double basis[3] = {g * g * g, g * g, g};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
      rhs[r] += basis[r] * s.ratio;
    }
  }
  // Gaussian elimination with partial pivoting.
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[perm[r]][col]) > std::abs(m[perm[pivot]][col])) pivot = r;
    }
    std::swap(perm[col], perm[pivot]);
    const double p = m[perm[col]][col];
    if (std::abs(p) < 1e-12) {
      throw degenerate_error("cubic fit normal equations are singular");
    }
    for (int r = col + 1; r < 3; ++r) {
      const double factor = m[perm[r]][col] / p;
      for (int c = col; c < 3; ++c) m[perm[r]][c] -= factor * m[perm[col]][c];
      rhs[perm[r]] -= factor * rhs[perm[col]];
    }
  }
  double h[3];
  for (int col = 2; col >= 0; --col) {
    double v = rhs[perm[col]];
    for (int c = col + 1; c < 3; ++c) v -= m[perm[col]][c] * h[c];
    h[col] = v / m[perm[col]][col];
  }

  CubicFit fit;
  fit.h1 = h[0];
  fit.h2 = h[1];
  fit.h3 = h[2];
  fit.count = static_cast<int>(samples.size());

  auto ratio = [&](double g) {
    return fit.h1 * g * g * g + fit.h2 * g * g + fit.h3 * g;
  };
  if (std::abs(ratio(3.0) - 1.0) > 0.01) {
    throw degenerate_error("cubic fit value at g=3 is " +
                           std::to_string(ratio(3.0)) +
                           ", expected within 0.01 of 1");
  }
  double prev = 0.0;
  for (int g = 1; g <= 3; ++g) {
    const double v = ratio(static_cast<double>(g));
    if (v < prev - 1e-9) {
      throw degenerate_error(
          "cubic fit is not nondecreasing on {0,1,2,3}: ratio(" +
          std::to_string(g) + ") < ratio(" + std::to_string(g - 1) + ")");
    }
    prev = v;
  }

  std::vector<double> y(samples.size()), f(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    y[i] = samples[i].ratio;
    f[i] = ratio(static_cast<double>(samples[i].g));
  }
  fit.r2 = r_square(y, f);
  return fit;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const size_t n = v.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) /
                            2.0 +
                        1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman_rcc(std::span<const double> x,
                                   std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw validation_error("spearman needs two equal-length sequences >= 2");
  }
  const auto minmax_x = std::minmax_element(x.begin(), x.end());
  const auto minmax_y = std::minmax_element(y.begin(), y.end());
  if (*minmax_x.first == *minmax_x.second ||
      *minmax_y.first == *minmax_y.second) {
    return std::nullopt;  // constant sequence: correlation undefined
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<std::pair<double, double>> load_two_column_csv(
    const std::string& path, const std::string& expect_header) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open sample file " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw validation_error("sample file " + path + " is empty");
  }
  if (line != expect_header) {
    throw validation_error("sample file " + path + " header is '" + line +
                           "', expected '" + expect_header + "'");
  }
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw validation_error("bad row in " + path + ": " + line);
    }
    rows.emplace_back(std::stod(line.substr(0, comma)),
                      std::stod(line.substr(comma + 1)));
  }
  return rows;
}

void save_two_column_csv(const std::string& path, const std::string& header,
                         std::span<const std::pair<double, double>> rows) {
  std::string out = header + "\n";
  char buf[64];
  for (const auto& [x, y] : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", x, y);
    out += buf;
  }
  write_file_atomic(path, out);
}

}  // namespace

std::vector<DfComplexitySample> load_df_samples(const std::string& path) {
  std::vector<DfComplexitySample> s;
  for (const auto& [w, y] : load_two_column_csv(path, "w,y")) {
    s.push_back({w, y});
  }
  return s;
}

void save_df_samples(std::span<const DfComplexitySample> s,
                     const std::string& path) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& v : s) rows.emplace_back(v.w, v.y);
  save_two_column_csv(path, "w,y", rows);
}

std::vector<McComplexitySample> load_mc_samples(const std::string& path) {
  std::vector<McComplexitySample> s;
  for (const auto& [g, y] : load_two_column_csv(path, "g,y")) {
    s.push_back({static_cast<int>(g), y});
  }
  return s;
}

void save_mc_samples(std::span<const McComplexitySample> s,
                     const std::string& path) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& v : s) rows.emplace_back(static_cast<double>(v.g), v.y);
  save_two_column_csv(path, "g,y", rows);
}

std::vector<McMseSample> load_mse_samples(const std::string& path) {
  std::vector<McMseSample> s;
  for (const auto& [g, r] : load_two_column_csv(path, "g,ratio")) {
    s.push_back({static_cast<int>(g), r});
  }
  return s;
}

void save_mse_samples(std::span<const McMseSample> s,
                      const std::string& path) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& v : s) rows.emplace_back(static_cast<double>(v.g), v.ratio);
  save_two_column_csv(path, "g,ratio", rows);
}

}  // namespace sgcc
