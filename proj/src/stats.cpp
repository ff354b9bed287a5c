#include "sdsm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdsm {

void RunningStats::push(double x) {
  ++n_;
  double d = x - mean_;
  mean_ += d / n_;
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / (n_ - 1) : 0.0;
}

double RunningStats::std_error() const {
  return n_ > 0 ? std::sqrt(variance() / n_) : 0.0;
}

MomentEstimate summarize(const std::vector<double>& values) {
  RunningStats s;
  for (double v : values) s.push(v);
  MomentEstimate e;
  e.value = s.mean();
  e.std_error = s.std_error();
  e.n = s.count();
  return e;
}

double z_difference(const MomentEstimate& a, const MomentEstimate& b) {
  double denom = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  double diff = a.value - b.value;
  if (denom == 0.0) {
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / denom;
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16 * std::abs(sum)) break;
  }
  double q = 2.0 * sum;
  return std::clamp(q, 0.0, 1.0);
}

namespace {

double ks_p_from_d(double d, double n_eff) {
  double rn = std::sqrt(n_eff);
  double lambda = (rn + 0.12 + 0.11 / rn) * d;
  return kolmogorov_q(lambda);
}

}  // namespace

double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double ax = a[i], bx = b[j];
    if (ax <= bx) ++i;
    if (bx <= ax) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  double n_eff = na * nb / (na + nb);
  return ks_p_from_d(d, n_eff);
}

double ks_one_sample_p(std::vector<double> x, double (*cdf)(double)) {
  if (x.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(x.begin(), x.end());
  double n = static_cast<double>(x.size());
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double f = cdf(x[i]);
    d = std::max(d, std::abs(f - i / n));
    d = std::max(d, std::abs(f - (i + 1) / n));
  }
  return ks_p_from_d(d, n);
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi_square_p(double stat, int df) {
  if (stat <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * stat);
}

}  // namespace sdsm
