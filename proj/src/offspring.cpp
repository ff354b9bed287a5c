#include "sdsm/offspring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdsm {

namespace {

long smallest_admissible_k(double sigma_x) {
  for (long k = 3; k <= (1L << 40); k *= 2) {
    if (std::sqrt(static_cast<double>(k)) * sigma_x + 1.0 <= k - 1.0) {
      // first power of two works; walk back to the exact threshold
      long lo = k / 2 + 1, hi = k;
      while (lo < hi) {
        long mid = lo + (hi - lo) / 2;
        if (std::sqrt(static_cast<double>(mid)) * sigma_x + 1.0 <= mid - 1.0)
          hi = mid;
        else
          lo = mid + 1;
      }
      return lo;
    }
  }
  return -1;
}

void build_alias(OffspringLaw& law) {
  size_t n = law.probs.size();
  law.alias_index.assign(n, 0);
  law.alias_cut.assign(n, 0.0);
  std::vector<double> scaled(n);
  std::vector<size_t> small, large;
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = law.probs[i] * n;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    size_t s = small.back();
    small.pop_back();
    size_t l = large.back();
    large.pop_back();
    law.alias_cut[s] = scaled[s];
    law.alias_index[s] = static_cast<int>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (size_t i : large) law.alias_cut[i] = 1.0;
  for (size_t i : small) law.alias_cut[i] = 1.0;
}

}  // namespace

ThreePointProbs three_point_offspring(long k, double sigma_x) {
  if (k <= 2) throw std::invalid_argument("three-point law needs k > 2");
  if (sigma_x < 0)
    throw std::invalid_argument("branching density must be nonnegative");
  double rk = std::sqrt(static_cast<double>(k));
  double sigma_k = rk * sigma_x + 1.0;
  if (sigma_k > k - 1.0) {
    throw std::invalid_argument(
        "three-point law infeasible: sqrt(k)*sigma + 1 = " +
        std::to_string(sigma_k) + " exceeds k - 1; raise k to at least " +
        std::to_string(smallest_admissible_k(sigma_x)));
  }
  ThreePointProbs p;
  p.sigma_k = sigma_k;
  p.gamma_k = 1.0 / rk;
  p.p0 = (sigma_k + k - 1.0) / (2.0 * k);
  p.p2 = (k - 1.0 - sigma_k) / (2.0 * (k - 2.0));
  p.pk = (sigma_k - 1.0) / (k * (k - 2.0));
  return p;
}

OffspringLaw binary_law(double gamma) {
  if (gamma <= 0) throw std::invalid_argument("clock coefficient must be positive");
  OffspringLaw law;
  law.kind = OffspringLaw::Kind::Binary;
  law.gamma = gamma;
  law.sigma_p = 1.0;
  return law;
}

OffspringLaw three_point_law(long k, ScalarField sigma) {
  OffspringLaw law;
  law.kind = OffspringLaw::Kind::ThreePoint;
  law.k = k;
  law.sigma = std::move(sigma);
  law.gamma = 1.0 / std::sqrt(static_cast<double>(k));
  // Feasibility at the sup pins down admissibility everywhere.
  three_point_offspring(k, field_sup_abs(law.sigma));
  return law;
}

OffspringLaw custom_table_law(std::vector<int> support,
                              std::vector<double> probs, double gamma) {
  if (support.size() != probs.size() || support.empty())
    throw std::invalid_argument("offspring table: support/probs size mismatch");
  if (gamma <= 0) throw std::invalid_argument("clock coefficient must be positive");
  double sum = 0, mean = 0, sp = 0;
  for (size_t i = 0; i < support.size(); ++i) {
    int j = support[i];
    double p = probs[i];
    if (j < 0) throw std::invalid_argument("offspring counts must be nonnegative");
    if (p < 0) throw std::invalid_argument("offspring probabilities must be nonnegative");
    if (j == 1 && p != 0.0)
      throw std::invalid_argument("offspring table must put no mass on one child");
    sum += p;
    mean += p * j;
    sp += p * j * (j - 1.0);
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("offspring probabilities must sum to 1");
  if (std::abs(mean - 1.0) > 1e-12)
    throw std::invalid_argument("offspring law must be critical (mean 1)");
  OffspringLaw law;
  law.kind = OffspringLaw::Kind::CustomTable;
  law.gamma = gamma;
  law.support = std::move(support);
  law.probs = std::move(probs);
  law.sigma_p = sp;
  if (law.support.size() > 8) build_alias(law);
  return law;
}

void validate_law(const OffspringLaw& law, double sigma_sup) {
  if (law.kind == OffspringLaw::Kind::ThreePoint) {
    three_point_offspring(law.k, sigma_sup);
  }
}

double law_sigma_p(const OffspringLaw& law, double x) {
  switch (law.kind) {
    case OffspringLaw::Kind::Binary:
      return 1.0;
    case OffspringLaw::Kind::ThreePoint:
      return std::sqrt(static_cast<double>(law.k)) * field_eval(law.sigma, x) +
             1.0;
    case OffspringLaw::Kind::CustomTable:
      return law.sigma_p;
  }
  return 0.0;
}

double law_sigma_eff(const OffspringLaw& law, double x) {
  return law.gamma * law_sigma_p(law, x);
}

long sample_offspring(const OffspringLaw& law, double x, RngStream& rng) {
  switch (law.kind) {
    case OffspringLaw::Kind::Binary:
      return rng.uniform() < 0.5 ? 0 : 2;
    case OffspringLaw::Kind::ThreePoint: {
      ThreePointProbs p = three_point_offspring(law.k, field_eval(law.sigma, x));
      double u = rng.uniform();
      if (u < p.p0) return 0;
      if (u < p.p0 + p.p2) return 2;
      return law.k;
    }
    case OffspringLaw::Kind::CustomTable: {
      if (!law.alias_cut.empty()) {
        size_t n = law.probs.size();
        size_t cell = static_cast<size_t>(rng.below(n));
        double u = rng.uniform();
        size_t pick = u < law.alias_cut[cell]
                          ? cell
                          : static_cast<size_t>(law.alias_index[cell]);
        return law.support[pick];
      }
      double u = rng.uniform();
      for (size_t i = 0; i < law.probs.size(); ++i) {
        if (u < law.probs[i]) return law.support[i];
        u -= law.probs[i];
      }
      return law.support.back();
    }
  }
  return 0;
}

}  // namespace sdsm
