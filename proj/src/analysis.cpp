#include "mlsim/analysis.hpp"

#include <stdexcept>

namespace mlsim {

double dkcr_dnA(const MixState& mix, const FdParams& p) {
  if (!(mix.total() > 0.0)) throw std::domain_error("critical-density derivative of an empty cell");
  const double a = (p.s_f + p.w_H) / p.q_H0;
  const double b = (p.s_f + p.w_A) / p.q_A0;
  const double denom = a * mix.n_hdv + b * mix.n_cav;
  return (a - b) * mix.n_hdv / (denom * denom);
}

double dd_dn(double gpl_density, const FdParams& p) {
  const double k_cr = p.q_H0 / (p.s_f + p.w_H);
  const double q = p.q_H0 - p.w_H * gpl_density;
  if (gpl_density < k_cr) throw std::domain_error("travel-time derivative needs a congested density");
  if (!(q > 0.0)) throw std::domain_error("density at or beyond jam");
  return 1.0 / q + gpl_density * p.w_H / (q * q);
}

ConversionBenefit marginal_benefit(const ConversionScenario& s) {
  if (!(s.ml_density_ratio > 0.0 && s.ml_density_ratio <= 1.0)) {
    throw std::invalid_argument("ml_density_ratio must lie in (0,1]");
  }
  if (!(s.ml_cav_fraction >= 0.0 && s.ml_cav_fraction <= 1.0)) {
    throw std::invalid_argument("ml_cav_fraction must lie in [0,1]");
  }
  if (!(s.cell_length > 0.0) || s.mean_vot < 0.0) {
    throw std::invalid_argument("cell_length must be positive and mean_vot non-negative");
  }
  const FdParams& p = s.params;
  const MixState share{1.0 - s.ml_cav_fraction, s.ml_cav_fraction, 0.0};
  const double ml_critical = critical_density(share, p);

  ConversionBenefit b;
  b.ml_vehicles = s.ml_density_ratio * ml_critical * s.cell_length;
  const MixState ml{(1.0 - s.ml_cav_fraction) * b.ml_vehicles, s.ml_cav_fraction * b.ml_vehicles,
                    s.ml_density_ratio * ml_critical};
  b.dkcr_dnA = dkcr_dnA(ml, p);
  b.shifted_vehicles = 2.0 * b.dkcr_dnA * s.cell_length;

  const MixState gpl{s.gpl_density * s.cell_length, 0.0, s.gpl_density};
  b.dd_dn = dd_dn(s.gpl_density, p);
  b.gpl_flow = flow(gpl, p);
  b.gpl_time = cell_time(gpl, p, s.cell_length);
  b.ml_time = s.cell_length / p.s_f;
  b.shifted_term = (b.gpl_time - b.ml_time) * s.mean_vot;
  b.remaining_term = b.dd_dn * b.gpl_flow * (s.cell_length / p.s_f) * s.mean_vot;
  b.per_vehicle_value = b.shifted_term + b.remaining_term;
  b.benefit = b.shifted_vehicles * b.per_vehicle_value;
  return b;
}

double annualize(double per_trip_savings, double trips_per_day, double days_per_year) {
  return per_trip_savings * trips_per_day * days_per_year;
}

}  // namespace mlsim
