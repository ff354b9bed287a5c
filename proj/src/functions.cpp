#include "sdsm/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sdsm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double overlap_len(double a, double b, double lo, double hi) {
  return std::max(0.0, std::min(b, hi) - std::max(a, lo));
}

// Exact integral of the linear interpolant of (x, v) over [a, b] clipped to
// the node range.
double tabulated_integral(const TabulatedFn& f, double a, double b) {
  if (f.x.size() < 2) return 0.0;
  double lo = std::max(a, f.x.front());
  double hi = std::min(b, f.x.back());
  if (lo >= hi) return 0.0;
  double total = 0.0;
  for (size_t s = 0; s + 1 < f.x.size(); ++s) {
    double xl = f.x[s], xr = f.x[s + 1];
    double cl = std::max(lo, xl), cr = std::min(hi, xr);
    if (cl >= cr) continue;
    double span = xr - xl;
    double vl = f.v[s] + (f.v[s + 1] - f.v[s]) * (cl - xl) / span;
    double vr = f.v[s] + (f.v[s + 1] - f.v[s]) * (cr - xl) / span;
    total += 0.5 * (vl + vr) * (cr - cl);
  }
  return total;
}

double tabulated_eval(const TabulatedFn& f, double x) {
  if (f.x.empty() || x < f.x.front() || x > f.x.back()) return 0.0;
  auto it = std::upper_bound(f.x.begin(), f.x.end(), x);
  if (it == f.x.begin()) return f.v.front();
  if (it == f.x.end()) return f.v.back();
  size_t s = static_cast<size_t>(it - f.x.begin()) - 1;
  double span = f.x[s + 1] - f.x[s];
  if (span <= 0) return f.v[s];
  return f.v[s] + (f.v[s + 1] - f.v[s]) * (x - f.x[s]) / span;
}

// Global bin index of x under the half-open convention (i bw, (i+1) bw].
long long bin_index(double x, double bw) {
  return static_cast<long long>(std::ceil(x / bw)) - 1;
}

double binned_eval(const BinnedDensityFn& f, double x) {
  long long j = bin_index(x, f.bin_width) - f.i_min;
  if (j < 0 || j >= static_cast<long long>(f.values.size())) return 0.0;
  return f.values[static_cast<size_t>(j)];
}

}  // namespace

double field_eval(const ScalarField& f, double x) {
  return std::visit(
      [x](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ZeroFn>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, ConstantFn>) {
          return g.value;
        } else if constexpr (std::is_same_v<T, GaussianFn>) {
          double u = (x - g.center) / g.width;
          return g.amplitude * std::exp(-0.5 * u * u);
        } else if constexpr (std::is_same_v<T, BoxFn>) {
          return (x >= g.left && x <= g.right) ? g.height : 0.0;
        } else if constexpr (std::is_same_v<T, StepFn>) {
          return (x >= g.left && x <= g.right) ? g.inside : g.outside;
        } else if constexpr (std::is_same_v<T, AffineClampedFn>) {
          return std::max(g.floor_val, g.slope * x);
        } else if constexpr (std::is_same_v<T, TabulatedFn>) {
          return tabulated_eval(g, x);
        } else {
          return binned_eval(g, x);
        }
      },
      f);
}

double field_d1(const ScalarField& f, double x) {
  if (std::holds_alternative<ZeroFn>(f) || std::holds_alternative<ConstantFn>(f))
    return 0.0;
  if (const auto* g = std::get_if<GaussianFn>(&f)) {
    double u = (x - g->center) / g->width;
    return -g->amplitude * std::exp(-0.5 * u * u) * u / g->width;
  }
  throw std::invalid_argument("derivative undefined for field kind " +
                              field_kind_name(f));
}

double field_d2(const ScalarField& f, double x) {
  if (std::holds_alternative<ZeroFn>(f) || std::holds_alternative<ConstantFn>(f))
    return 0.0;
  if (const auto* g = std::get_if<GaussianFn>(&f)) {
    double w2 = g->width * g->width;
    double u = (x - g->center) / g->width;
    return g->amplitude * std::exp(-0.5 * u * u) * (u * u - 1.0) / w2;
  }
  throw std::invalid_argument("derivative undefined for field kind " +
                              field_kind_name(f));
}

double field_sup_abs(const ScalarField& f) {
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ZeroFn>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, ConstantFn>) {
          return std::abs(g.value);
        } else if constexpr (std::is_same_v<T, GaussianFn>) {
          return std::abs(g.amplitude);
        } else if constexpr (std::is_same_v<T, BoxFn>) {
          return std::abs(g.height);
        } else if constexpr (std::is_same_v<T, StepFn>) {
          return std::max(std::abs(g.inside), std::abs(g.outside));
        } else if constexpr (std::is_same_v<T, AffineClampedFn>) {
          return g.slope == 0.0 ? std::abs(g.floor_val) : kInf;
        } else if constexpr (std::is_same_v<T, TabulatedFn>) {
          double m = 0.0;
          for (double v : g.v) m = std::max(m, std::abs(v));
          return m;
        } else {
          double m = 0.0;
          for (double v : g.values) m = std::max(m, std::abs(v));
          return m;
        }
      },
      f);
}

bool field_is_nonneg(const ScalarField& f) {
  return std::visit(
      [](const auto& g) -> bool {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ZeroFn>) {
          return true;
        } else if constexpr (std::is_same_v<T, ConstantFn>) {
          return g.value >= 0.0;
        } else if constexpr (std::is_same_v<T, GaussianFn>) {
          return g.amplitude >= 0.0;
        } else if constexpr (std::is_same_v<T, BoxFn>) {
          return g.height >= 0.0;
        } else if constexpr (std::is_same_v<T, StepFn>) {
          return g.inside >= 0.0 && g.outside >= 0.0;
        } else if constexpr (std::is_same_v<T, AffineClampedFn>) {
          return g.floor_val >= 0.0;
        } else if constexpr (std::is_same_v<T, TabulatedFn>) {
          return std::all_of(g.v.begin(), g.v.end(),
                             [](double v) { return v >= 0.0; });
        } else {
          return std::all_of(g.values.begin(), g.values.end(),
                             [](double v) { return v >= 0.0; });
        }
      },
      f);
}

Support field_support(const ScalarField& f) {
  return std::visit(
      [](const auto& g) -> Support {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ZeroFn>) {
          return {0, 0, true};
        } else if constexpr (std::is_same_v<T, ConstantFn>) {
          if (g.value == 0.0) return {0, 0, true};
          return {-kInf, kInf, false};
        } else if constexpr (std::is_same_v<T, GaussianFn>) {
          if (g.amplitude == 0.0) return {0, 0, true};
          return {-kInf, kInf, false};
        } else if constexpr (std::is_same_v<T, BoxFn>) {
          if (g.height == 0.0) return {0, 0, true};
          return {g.left, g.right, true};
        } else if constexpr (std::is_same_v<T, StepFn>) {
          if (g.outside != 0.0) return {-kInf, kInf, false};
          if (g.inside == 0.0) return {0, 0, true};
          return {g.left, g.right, true};
        } else if constexpr (std::is_same_v<T, AffineClampedFn>) {
          if (g.slope == 0.0 && g.floor_val == 0.0) return {0, 0, true};
          return {-kInf, kInf, false};
        } else if constexpr (std::is_same_v<T, TabulatedFn>) {
          if (g.x.empty()) return {0, 0, true};
          return {g.x.front(), g.x.back(), true};
        } else {
          if (g.values.empty()) return {0, 0, true};
          return {g.i_min * g.bin_width,
                  (g.i_min + static_cast<long long>(g.values.size())) * g.bin_width,
                  true};
        }
      },
      f);
}

Support field_effective_support(const ScalarField& f, double eps) {
  if (const auto* g = std::get_if<GaussianFn>(&f)) {
    double amp = std::abs(g->amplitude);
    if (amp <= eps) return {0, 0, true};
    double d = g->width * std::sqrt(2.0 * std::log(amp / eps));
    return {g->center - d, g->center + d, true};
  }
  return field_support(f);
}

double field_integral(const ScalarField& f, double a, double b) {
  if (a > b) return -field_integral(f, b, a);
  return std::visit(
      [a, b](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ZeroFn>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, ConstantFn>) {
          return g.value * (b - a);
        } else if constexpr (std::is_same_v<T, GaussianFn>) {
          const double inv = 1.0 / (g.width * std::numbers::sqrt2_v<double>);
          double s = std::sqrt(std::numbers::pi_v<double> / 2.0);
          return g.amplitude * g.width * s *
                 (std::erf((b - g.center) * inv) - std::erf((a - g.center) * inv));
        } else if constexpr (std::is_same_v<T, BoxFn>) {
          return g.height * overlap_len(a, b, g.left, g.right);
        } else if constexpr (std::is_same_v<T, StepFn>) {
          double in = overlap_len(a, b, g.left, g.right);
          return g.inside * in + g.outside * ((b - a) - in);
        } else if constexpr (std::is_same_v<T, AffineClampedFn>) {
          throw std::invalid_argument(
              "integral not provided for affine-clamped fields");
          return 0.0;
        } else if constexpr (std::is_same_v<T, TabulatedFn>) {
          return tabulated_integral(g, a, b);
        } else {
          double total = 0.0;
          for (size_t j = 0; j < g.values.size(); ++j) {
            double lo = (g.i_min + static_cast<long long>(j)) * g.bin_width;
            total += g.values[j] * overlap_len(a, b, lo, lo + g.bin_width);
          }
          return total;
        }
      },
      f);
}

std::vector<double> field_jump_points(const ScalarField& f) {
  std::vector<double> cuts;
  if (const auto* b = std::get_if<BoxFn>(&f)) {
    if (b->height != 0.0 && b->right > b->left) {
      cuts.push_back(b->left);
      cuts.push_back(b->right);
    }
  } else if (const auto* s = std::get_if<StepFn>(&f)) {
    if (s->inside != s->outside && s->right > s->left) {
      cuts.push_back(s->left);
      cuts.push_back(s->right);
    }
  } else if (const auto* d = std::get_if<BinnedDensityFn>(&f)) {
    double prev = 0.0;
    for (size_t j = 0; j <= d->values.size(); ++j) {
      double cur = j < d->values.size() ? d->values[j] : 0.0;
      if (cur != prev)
        cuts.push_back((d->i_min + static_cast<long long>(j)) * d->bin_width);
      prev = cur;
    }
  }
  return cuts;
}

std::string field_kind_name(const ScalarField& f) {
  struct V {
    std::string operator()(const ZeroFn&) { return "zero"; }
    std::string operator()(const ConstantFn&) { return "constant"; }
    std::string operator()(const GaussianFn&) { return "gaussian"; }
    std::string operator()(const BoxFn&) { return "box"; }
    std::string operator()(const StepFn&) { return "step"; }
    std::string operator()(const AffineClampedFn&) { return "affine-clamped"; }
    std::string operator()(const TabulatedFn&) { return "tabulated"; }
    std::string operator()(const BinnedDensityFn&) { return "binned"; }
  };
  return std::visit(V{}, f);
}

double multi_eval(const MultiFn& f, const double* x, int m) {
  switch (f.kind) {
    case MultiFn::Kind::Constant:
      return f.value;
    case MultiFn::Kind::GaussianProduct: {
      double p = 1.0;
      for (int i = 0; i < m; ++i) {
        double u = (x[i] - f.factor.center) / f.factor.width;
        p *= f.factor.amplitude * std::exp(-0.5 * u * u);
      }
      return p;
    }
    case MultiFn::Kind::CoordinatePoly: {
      double p = 1.0;
      for (int i = 0; i < m && i < static_cast<int>(f.powers.size()); ++i) {
        for (int e = 0; e < f.powers[i]; ++e) p *= x[i];
      }
      return p;
    }
  }
  return 0.0;
}

double multi_sup(const MultiFn& f, int m) {
  switch (f.kind) {
    case MultiFn::Kind::Constant:
      return std::abs(f.value);
    case MultiFn::Kind::GaussianProduct:
      return std::pow(std::abs(f.factor.amplitude), m);
    case MultiFn::Kind::CoordinatePoly: {
      for (int p : f.powers)
        if (p != 0) return kInf;
      return 1.0;
    }
  }
  return kInf;
}

}  // namespace sdsm
