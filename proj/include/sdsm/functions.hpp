#pragma once
#include <string>
#include <variant>
#include <vector>

namespace sdsm {

// Scalar fields on the line.  One closed vocabulary serves the h, c and sigma
// roles; which kinds a role admits is enforced at config-parse time.

struct ZeroFn {};
struct ConstantFn { double value; };
// amplitude * exp(-(x-center)^2 / (2 width^2))
struct GaussianFn { double amplitude; double center; double width; };
// height on [left, right], 0 elsewhere
struct BoxFn { double left; double right; double height; };
// inside on [left, right], outside elsewhere
struct StepFn { double left; double right; double inside; double outside; };
// max(floor, slope*x)
struct AffineClampedFn { double slope; double floor_val; };
// linear interpolation on nodes, 0 outside [x.front(), x.back()]
struct TabulatedFn { std::vector<double> x; std::vector<double> v; };
// piecewise-constant density: values[i] on the half-open bin
// ((i_min+i)*bin_width, (i_min+i+1)*bin_width]
struct BinnedDensityFn {
  double bin_width;
  long long i_min;
  std::vector<double> values;
};

using ScalarField =
    std::variant<ZeroFn, ConstantFn, GaussianFn, BoxFn, StepFn,
                 AffineClampedFn, TabulatedFn, BinnedDensityFn>;

double field_eval(const ScalarField& f, double x);
// First and second derivatives; defined for constant and gaussian kinds only.
double field_d1(const ScalarField& f, double x);
double field_d2(const ScalarField& f, double x);
// sup |f| over the line (exact for every kind except affine-clamped, which is
// unbounded when slope != 0 and reported as +inf).
double field_sup_abs(const ScalarField& f);
bool field_is_nonneg(const ScalarField& f);

struct Support {
  double lo;
  double hi;
  bool bounded;  // false means the field can be nonzero arbitrarily far out
};
// Interval outside which the field is identically zero (for bounded kinds).
Support field_support(const ScalarField& f);
// Interval outside which |f| < eps; finite for decaying kinds (gaussian).
Support field_effective_support(const ScalarField& f, double eps);

// Closed-form integral over [a, b] (endpoint inclusion immaterial: these are
// all densities).  Not defined for affine-clamped.
double field_integral(const ScalarField& f, double a, double b);

// Discontinuity locations of the piecewise-constant kinds (box, step, binned),
// ascending; empty for continuous kinds.  Quadratures split at these points.
std::vector<double> field_jump_points(const ScalarField& f);

std::string field_kind_name(const ScalarField& f);

// Functions on R^m for moment functionals.
struct MultiFn {
  enum class Kind { Constant, GaussianProduct, CoordinatePoly };
  Kind kind = Kind::Constant;
  double value = 1.0;            // Constant
  GaussianFn factor{1, 0, 1};    // GaussianProduct: prod_i factor(x_i)
  std::vector<int> powers;       // CoordinatePoly: prod_i x_i^powers[i]
};

double multi_eval(const MultiFn& f, const double* x, int m);
// sup |f| over R^m; +inf for coordinate polynomials.
double multi_sup(const MultiFn& f, int m);

}  // namespace sdsm
