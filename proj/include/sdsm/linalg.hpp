#pragma once
#include <functional>
#include <vector>

namespace sdsm {

// Dense symmetric matrix, full row-major storage.
struct SymMatrix {
  int n = 0;
  std::vector<double> a;

  explicit SymMatrix(int n_ = 0) : n(n_), a(static_cast<size_t>(n_) * n_, 0.0) {}
  double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

// Lower-triangular factor, full row-major storage (upper part zero).
struct CholFactor {
  int n = 0;
  std::vector<double> l;

  double& at(int i, int j) { return l[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return l[static_cast<size_t>(i) * n + j]; }
};

struct CholOutcome {
  bool ok = false;
  CholFactor factor;
  double min_pivot = 0;  // most negative pivot seen when !ok
};

// Cholesky tolerant of positive semidefinite input: a pivot within zero_tol of
// zero produces a zero column; a pivot below -zero_tol aborts with ok=false.
// jitter is added to the diagonal before factoring.
CholOutcome cholesky_semidef(const SymMatrix& a, double jitter, double zero_tol);

// out = L z for the lower-triangular factor.
void chol_apply(const CholFactor& f, const double* z, double* out);

// Partial factor from pivoted Cholesky: rows is n x rank row-major, and
// G ~ rows rows^T + diag(residual_diag) with residual_diag >= 0 entrywise.
struct LowRankFactor {
  int n = 0;
  int rank = 0;
  std::vector<double> rows;
  std::vector<double> residual_diag;

  double row(int i, int k) const { return rows[static_cast<size_t>(i) * rank + k]; }
};

struct PivotedCholOutcome {
  bool ok = false;
  LowRankFactor factor;
  double min_residual = 0;  // most negative residual diagonal when !ok
};

// Pivoted Cholesky on the matrix given entrywise by entry(i,j), stopping once
// the largest residual diagonal falls to stop_tol.  jitter is added to the
// diagonal.  A residual diagonal below -neg_tol aborts with ok=false; small
// negative residuals are clamped to zero.
PivotedCholOutcome pivoted_cholesky(int n,
                                    const std::function<double(int, int)>& entry,
                                    double jitter, double stop_tol,
                                    double neg_tol, int max_rank);

}  // namespace sdsm
