#include "sdsm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace sdsm {

CholOutcome cholesky_semidef(const SymMatrix& a, double jitter, double zero_tol) {
  CholOutcome out;
  int n = a.n;
  out.factor.n = n;
  out.factor.l.assign(static_cast<size_t>(n) * n, 0.0);
  CholFactor& f = out.factor;
  double min_pivot = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = a.at(j, j) + jitter;
    for (int k = 0; k < j; ++k) d -= f.at(j, k) * f.at(j, k);
    min_pivot = std::min(min_pivot, d);
    if (d < -zero_tol) {
      out.ok = false;
      out.min_pivot = min_pivot;
      return out;
    }
    if (d <= zero_tol) {
      // Semidefinite direction: zero column, dependents get zero weight.
      f.at(j, j) = 0.0;
      continue;
    }
    double ljj = std::sqrt(d);
    f.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= f.at(i, k) * f.at(j, k);
      f.at(i, j) = s / ljj;
    }
  }
  out.ok = true;
  out.min_pivot = min_pivot;
  return out;
}

void chol_apply(const CholFactor& f, const double* z, double* out) {
  for (int i = 0; i < f.n; ++i) {
    double s = 0;
    const double* row = f.l.data() + static_cast<size_t>(i) * f.n;
    for (int k = 0; k <= i; ++k) s += row[k] * z[k];
    out[i] = s;
  }
}

PivotedCholOutcome pivoted_cholesky(int n,
                                    const std::function<double(int, int)>& entry,
                                    double jitter, double stop_tol,
                                    double neg_tol, int max_rank) {
  PivotedCholOutcome out;
  LowRankFactor& f = out.factor;
  f.n = n;
  f.residual_diag.resize(n);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = entry(i, i) + jitter;

  int rank_cap = std::min(n, max_rank);
  std::vector<double> cols;  // column-major growing store: cols[k*n + i]
  cols.reserve(static_cast<size_t>(rank_cap) * n);
  std::vector<int> pivots;

  double min_residual = 0.0;
  int r = 0;
  while (r < rank_cap) {
    int p = -1;
    double best = stop_tol;
    for (int i = 0; i < n; ++i) {
      min_residual = std::min(min_residual, diag[i]);
      if (diag[i] > best) {
        best = diag[i];
        p = i;
      }
    }
    if (min_residual < -neg_tol) {
      out.ok = false;
      out.min_residual = min_residual;
      return out;
    }
    if (p < 0) break;  // all residuals below stop_tol

    double piv = std::sqrt(diag[p]);
    cols.resize(static_cast<size_t>(r + 1) * n);
    double* col = cols.data() + static_cast<size_t>(r) * n;
    for (int i = 0; i < n; ++i) {
      if (i == p) {
        col[i] = piv;
        continue;
      }
      double s = entry(i, p);
      for (int k = 0; k < r; ++k)
        s -= cols[static_cast<size_t>(k) * n + i] * cols[static_cast<size_t>(k) * n + p];
      col[i] = s / piv;
    }
    for (int i = 0; i < n; ++i) diag[i] -= col[i] * col[i];
    diag[p] = 0.0;
    pivots.push_back(p);
    ++r;
  }

  for (int i = 0; i < n; ++i) min_residual = std::min(min_residual, diag[i]);
  if (min_residual < -neg_tol) {
    out.ok = false;
    out.min_residual = min_residual;
    return out;
  }

  f.rank = r;
  f.rows.assign(static_cast<size_t>(n) * std::max(r, 1), 0.0);
  if (r > 0) {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < r; ++k)
        f.rows[static_cast<size_t>(i) * r + k] = cols[static_cast<size_t>(k) * n + i];
  }
  for (int i = 0; i < n; ++i) f.residual_diag[i] = std::max(diag[i], 0.0);
  out.ok = true;
  out.min_residual = min_residual;
  return out;
}

}  // namespace sdsm
