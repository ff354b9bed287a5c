#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sdsm {

// Universal Monte Carlo result record.
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n = 0;
  std::map<std::string, std::string> meta;
};

// Welford accumulator.
class RunningStats {
public:
  void push(double x);
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance, n-1 denominator
  double std_error() const;
private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

MomentEstimate summarize(const std::vector<double>& values);

// z-statistic of the difference of two independent estimates.
double z_difference(const MomentEstimate& a, const MomentEstimate& b);

// Kolmogorov asymptotic tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);

// One-sample KS p-value against a CDF supplied as a callable.
double ks_one_sample_p(std::vector<double> x, double (*cdf)(double));

// Upper regularized incomplete gamma Q(a, x); chi-square tail via
// chi_square_p(stat, df) = Q(df/2, stat/2).
double gamma_q(double a, double x);
double chi_square_p(double stat, int df);

}  // namespace sdsm
