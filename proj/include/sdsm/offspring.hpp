#pragma once
#include <vector>

#include "sdsm/functions.hpp"
#include "sdsm/rng.hpp"

namespace sdsm {

// Offspring probabilities of the three-point law that realizes branching
// density sigma_k(x) = sqrt(k) sigma(x) + 1 at clock rate gamma_k = 1/sqrt(k):
// children 0, 2 or k with p1 = 0.
struct ThreePointProbs {
  double p0 = 0;
  double p2 = 0;
  double pk = 0;
  double sigma_k = 0;
  double gamma_k = 0;
};
// Requires k > 2 and sqrt(k)*sigma_x + 1 <= k - 1; throws otherwise with the
// smallest admissible k in the message.
ThreePointProbs three_point_offspring(long k, double sigma_x);

// Critical offspring law attached to the particle system's branch clock.
struct OffspringLaw {
  enum class Kind { Binary, ThreePoint, CustomTable };
  Kind kind = Kind::Binary;
  double gamma = 1.0;  // clock coefficient; 1/sqrt(k) for the three-point kind

  // ThreePoint
  long k = 0;
  ScalarField sigma{ConstantFn{1.0}};  // branching density it realizes

  // CustomTable
  std::vector<int> support;
  std::vector<double> probs;
  double sigma_p = 0;  // sd of the table

  // alias sampler, built when the table has more than 8 support points
  std::vector<int> alias_index;
  std::vector<double> alias_cut;
};

OffspringLaw binary_law(double gamma);
OffspringLaw three_point_law(long k, ScalarField sigma);
// Table must have p1 = 0 and mean 1 within 1e-12; throws otherwise.
OffspringLaw custom_table_law(std::vector<int> support, std::vector<double> probs,
                              double gamma);

// Largest sigma value the law can realize; validates a three-point law against
// the model's sup sigma (throws with advice to raise k when violated).
void validate_law(const OffspringLaw& law, double sigma_sup);

// Offspring sd at position x (sigma_p for binary/custom, sigma_k(x) otherwise).
double law_sigma_p(const OffspringLaw& law, double x);
// Effective branching density gamma * sigma_p at x.
double law_sigma_eff(const OffspringLaw& law, double x);

// Number of children for one branch event at position x.
long sample_offspring(const OffspringLaw& law, double x, RngStream& rng);

}  // namespace sdsm
