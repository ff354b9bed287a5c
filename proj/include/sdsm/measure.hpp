#pragma once
#include <vector>

#include "sdsm/rng.hpp"

namespace sdsm {

struct Atom {
  double x;
  double mass;
};

// Absolutely continuous component of an initial measure.
struct MeasureDensity {
  enum class Kind { None, Gaussian, Uniform };
  Kind kind = Kind::None;
  double a = 0;  // Gaussian mean / Uniform left endpoint
  double b = 1;  // Gaussian sd / Uniform right endpoint
  double mass = 0;
};

// Finite measure: atoms plus at most one density component.
struct InitialMeasure {
  std::vector<Atom> atoms;
  MeasureDensity density;

  double total_mass() const;
  // One draw from the normalized measure.
  double sample(RngStream& rng) const;
};

}  // namespace sdsm
