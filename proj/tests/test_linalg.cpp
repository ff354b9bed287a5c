#include "doctest.h"

#include <cmath>
#include <vector>

#include "sdsm/linalg.hpp"
#include "sdsm/rng.hpp"

using namespace sdsm;

namespace {

SymMatrix reconstruct(const CholFactor& f) {
  SymMatrix m(f.n);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) {
      double s = 0;
      for (int k = 0; k < f.n; ++k) s += f.at(i, k) * f.at(j, k);
      m.at(i, j) = s;
    }
  return m;
}

}  // namespace

TEST_CASE("cholesky reproduces a hand factor") {
  SymMatrix a(2);
  a.at(0, 0) = 4.0;
  a.at(0, 1) = a.at(1, 0) = 2.0;
  a.at(1, 1) = 5.0;
  CholOutcome out = cholesky_semidef(a, 0.0, 1e-12);
  REQUIRE(out.ok);
  CHECK(out.factor.at(0, 0) == doctest::Approx(2.0));
  CHECK(out.factor.at(1, 0) == doctest::Approx(1.0));
  CHECK(out.factor.at(1, 1) == doctest::Approx(2.0));
  CHECK(out.factor.at(0, 1) == 0.0);
}

TEST_CASE("cholesky round-trips random SPD matrices") {
  RngStream rng(11, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(rng.below(8));
    // B B^T + I is SPD.
    std::vector<double> b(static_cast<size_t>(n) * n);
    for (double& v : b) v = rng.normal();
    SymMatrix a(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = i == j ? 1.0 : 0.0;
        for (int k = 0; k < n; ++k)
          s += b[static_cast<size_t>(i) * n + k] * b[static_cast<size_t>(j) * n + k];
        a.at(i, j) = s;
      }
    CholOutcome out = cholesky_semidef(a, 0.0, 1e-12);
    REQUIRE(out.ok);
    SymMatrix r = reconstruct(out.factor);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(r.at(i, j) == doctest::Approx(a.at(i, j)).epsilon(1e-10));
  }
}

TEST_CASE("singular matrices factor with zero columns") {
  // Rank-1: all-ones matrix.
  int n = 4;
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.at(i, j) = 1.0;
  CholOutcome out = cholesky_semidef(a, 0.0, 1e-12);
  REQUIRE(out.ok);
  SymMatrix r = reconstruct(out.factor);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(r.at(i, j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("indefinite matrices are rejected") {
  SymMatrix a(2);
  a.at(0, 0) = 1.0;
  a.at(0, 1) = a.at(1, 0) = 2.0;
  a.at(1, 1) = 1.0;  // eigenvalues 3, -1
  CholOutcome out = cholesky_semidef(a, 0.0, 1e-12);
  CHECK_FALSE(out.ok);
  CHECK(out.min_pivot < -0.5);
}

TEST_CASE("chol_apply computes L z") {
  SymMatrix a(3);
  a.at(0, 0) = 4;
  a.at(1, 1) = 9;
  a.at(2, 2) = 16;
  a.at(0, 1) = a.at(1, 0) = 2;
  a.at(0, 2) = a.at(2, 0) = 4;
  a.at(1, 2) = a.at(2, 1) = 5;
  CholOutcome out = cholesky_semidef(a, 0.0, 1e-12);
  REQUIRE(out.ok);
  double z[3] = {1.0, -2.0, 0.5};
  double y[3];
  chol_apply(out.factor, z, y);
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int k = 0; k < 3; ++k) s += out.factor.at(i, k) * z[k];
    CHECK(y[i] == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("pivoted cholesky reconstructs a smooth kernel matrix") {
  // Gaussian kernel on scattered points: numerically low rank.
  RngStream rng(12, 0, 0);
  int n = 30;
  std::vector<double> x(n);
  for (double& v : x) v = 3.0 * rng.normal();
  auto entry = [&](int i, int j) {
    double d = x[i] - x[j];
    return std::exp(-0.25 * d * d);
  };
  PivotedCholOutcome out =
      pivoted_cholesky(n, entry, 0.0, 1e-12, 1e-8, n);
  REQUIRE(out.ok);
  CHECK(out.factor.rank < n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = i == j ? out.factor.residual_diag[i] : 0.0;
      for (int k = 0; k < out.factor.rank; ++k)
        s += out.factor.row(i, k) * out.factor.row(j, k);
      CHECK(s == doctest::Approx(entry(i, j)).epsilon(1e-8));
    }
  for (double r : out.factor.residual_diag) CHECK(r >= 0.0);
}

TEST_CASE("pivoted cholesky handles duplicated points") {
  // Exact duplicates give a singular Gram matrix; factor must stay finite and
  // reproduce it.
  std::vector<double> x{0.0, 0.0, 1.0, 1.0, 2.5};
  int n = static_cast<int>(x.size());
  auto entry = [&](int i, int j) {
    double d = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
    return 2.0 * std::exp(-d * d);
  };
  PivotedCholOutcome out = pivoted_cholesky(n, entry, 0.0, 1e-13, 1e-8, n);
  REQUIRE(out.ok);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = i == j ? out.factor.residual_diag[i] : 0.0;
      for (int k = 0; k < out.factor.rank; ++k)
        s += out.factor.row(i, k) * out.factor.row(j, k);
      CHECK(s == doctest::Approx(entry(i, j)).epsilon(1e-9));
    }
}

TEST_CASE("pivoted cholesky rejects indefinite input") {
  auto entry = [](int i, int j) { return i == j ? 1.0 : 2.0; };
  PivotedCholOutcome out = pivoted_cholesky(2, entry, 0.0, 1e-13, 1e-8, 2);
  CHECK_FALSE(out.ok);
  CHECK(out.min_residual < -1.0);
}

TEST_CASE("pivoted cholesky truncates at max_rank") {
  RngStream rng(13, 0, 0);
  int n = 12;
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  auto entry = [&](int i, int j) {
    double d = x[i] - x[j];
    return std::exp(-8.0 * d * d);  // short length scale: nearly full rank
  };
  PivotedCholOutcome out = pivoted_cholesky(n, entry, 0.0, 0.0, 1e-8, 3);
  REQUIRE(out.ok);
  CHECK(out.factor.rank <= 3);
  // Residual diagonal absorbs the truncated part, so the diagonal matches.
  for (int i = 0; i < n; ++i) {
    double s = out.factor.residual_diag[i];
    for (int k = 0; k < out.factor.rank; ++k)
      s += out.factor.row(i, k) * out.factor.row(i, k);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
}
