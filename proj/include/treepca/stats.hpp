#pragma once

#include <cmath>
#include <vector>

#include "treepca/curve.hpp"
#include "treepca/line.hpp"
#include "treepca/tree.hpp"

namespace treepca {

namespace detail {

// Continued-fraction kernel for the regularized incomplete beta function
// (modified Lentz's method).
inline double ibeta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300, eps = 3e-15;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double ibeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("ibeta requires a > 0 and b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::ibeta_cf(a, b, x) / a;
  return 1.0 - front * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value for a Student-t statistic with df degrees of freedom:
/// 2 P(T > |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  const double x = df / (df + t * t);
  const double p = ibeta(0.5 * df, 0.5, x);
  return std::min(1.0, std::max(0.0, p));
}

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Ordinary least squares of `covariate` (response) on `scores` (predictor),
/// with the two-sided slope p-value from a Student-t with n-2 df.
/// Exact fit (zero residual): slope_se = 0 and p = 0 (p = 1 if slope is 0,
/// i.e. a constant response). A constant predictor is a degenerate design.
inline RegressionResult regress_age(const std::vector<double>& scores, const std::vector<double>& covariate) {
  const std::size_t n = scores.size();
  if (n != covariate.size()) throw std::invalid_argument("predictor and response lengths differ");
  if (n < 3) throw std::invalid_argument("regression needs at least 3 observations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) { mx += scores[i]; my += covariate[i]; }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = scores[i] - mx, dy = covariate[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("constant predictor: regression design is degenerate");
  RegressionResult r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  const double sse = std::max(0.0, syy - r.slope * sxy);
  const double df = static_cast<double>(n - 2);
  r.slope_se = std::sqrt(sse / df / sxx);
  if (r.slope_se == 0.0) {
    r.t_stat = 0.0;
    r.p_value = r.slope == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t_stat = r.slope / r.slope_se;
  r.p_value = student_t_two_sided_p(r.t_stat, df);
  return r;
}

struct ScoreReport {
  std::vector<long long> per_tree_scores;  // |P(t_i)| per tree
  long long nodes_explained = 0;           // sum_i |t_i ∩ P(t_i)|
  double coverage_pct = 0.0;               // 100 * nodes_explained / sum_i |t_i|
};

namespace detail {

inline long long intersection_size(const BinaryTree& a, const BinaryTree& b) {
  const auto& x = a.nodes();
  const auto& y = b.nodes();
  std::size_t i = 0, j = 0;
  long long common = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] == y[j]) { ++common; ++i; ++j; }
    else if (x[i] < y[j]) ++i;
    else ++j;
  }
  return common;
}

template <typename ProjectFn>
ScoreReport score_report_impl(const TreeDataset& data, ProjectFn&& project) {
  ScoreReport rep;
  long long total = 0;
  for (const auto& t : data.trees) {
    const BinaryTree p = project(t);
    rep.per_tree_scores.push_back(static_cast<long long>(p.size()));
    rep.nodes_explained += intersection_size(t, p);
    total += static_cast<long long>(t.size());
  }
  rep.coverage_pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(rep.nodes_explained) / static_cast<double>(total);
  return rep;
}

}  // namespace detail

/// Score report for a union of lines: per-tree score is the size of the
/// union projection; nodes_explained counts only nodes of t_i itself that
/// the projection covers (extraneous projection nodes earn no credit).
inline ScoreReport score_report(const TreeDataset& data, const std::vector<KTreeLine>& lines) {
  return detail::score_report_impl(data, [&](const BinaryTree& t) { return project_onto_union(t, lines); });
}

inline ScoreReport score_report(const TreeDataset& data, const KTreeLine& line) {
  return score_report(data, std::vector<KTreeLine>{line});
}

inline ScoreReport score_report(const TreeDataset& data, const TreeCurve& curve) {
  return detail::score_report_impl(data, [&](const BinaryTree& t) {
    return curve_point(curve, project_onto_curve(t, curve).index);
  });
}

}  // namespace treepca
