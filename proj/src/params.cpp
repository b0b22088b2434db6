#include "paraqnd/params.hpp"

#include <cmath>
#include <sstream>

namespace paraqnd {

double squeezing_db(double width) {
  if (!(width > 0.0)) throw DomainError("squeezing_db: width must be positive");
  return -20.0 * std::log10(width / kVacuumWidth);
}

double width_from_db(double db) { return kVacuumWidth * std::pow(10.0, -db / 20.0); }

BogoliubovParams bogoliubov_params(double delta, double r, double g) {
  if (!(r >= 0.0) || !(delta > r)) {
    std::ostringstream msg;
    msg << "Bogoliubov transform undefined: need delta > r >= 0 (delta=" << delta
        << ", r=" << r << ")";
    throw DomainError(msg.str());
  }
  BogoliubovParams out;
  out.Delta = std::sqrt((delta - r) * (delta + r));
  out.u = 0.5 * std::atanh(r / delta);
  out.g_tilde = g * std::sinh(2.0 * out.u);
  return out;
}

MismatchParams params_from_targets(double Delta, double g_tilde, double g) {
  if (!(Delta > 0.0)) throw DomainError("params_from_targets: Delta must be positive");
  if (!(g_tilde >= 0.0)) throw DomainError("params_from_targets: g_tilde must be non-negative");
  if (!(g > 0.0)) throw DomainError("params_from_targets: g must be positive");
  const double sinh2u = g_tilde / g;
  const double cosh2u = std::sqrt(1.0 + sinh2u * sinh2u);
  if (!std::isfinite(cosh2u)) throw DomainError("params_from_targets: g_tilde overflows");
  return {Delta * cosh2u, Delta * sinh2u};
}

SystemParams SystemParams::from_targets(double Delta, double g_tilde, double g) {
  const auto m = params_from_targets(Delta, g_tilde, g);
  SystemParams p;
  p.g = g;
  p.delta = m.delta;
  p.beta = m.r / (2.0 * g);
  return p;
}

}  // namespace paraqnd
