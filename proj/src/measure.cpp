#include "sdsm/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace sdsm {

double InitialMeasure::total_mass() const {
  double m = 0;
  for (const auto& a : atoms) m += a.mass;
  if (density.kind != MeasureDensity::Kind::None) m += density.mass;
  return m;
}

double InitialMeasure::sample(RngStream& rng) const {
  double total = total_mass();
  if (total <= 0) throw std::invalid_argument("sampling from a null measure");
  double u = rng.uniform() * total;
  for (const auto& a : atoms) {
    if (u < a.mass) return a.x;
    u -= a.mass;
  }
  switch (density.kind) {
    case MeasureDensity::Kind::Gaussian:
      return density.a + density.b * rng.normal();
    case MeasureDensity::Kind::Uniform:
      return density.a + (density.b - density.a) * rng.uniform();
    case MeasureDensity::Kind::None:
      break;
  }
  // Rounding pushed u past the last atom.
  return atoms.back().x;
}

}  // namespace sdsm
