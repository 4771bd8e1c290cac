#pragma once

#include "mlsim/fd.hpp"

namespace mlsim {

/// Closed-form marginal benefit of converting one high-occupancy HDV in the managed lane
/// into a CAV, evaluated for a single cell.
struct ConversionScenario {
  double ml_cav_fraction = 0.4;
  double ml_density_ratio = 0.85;  // managed-lane density as a share of its critical density
  double gpl_density = 63.0;       // veh/km, pure HDV, congested
  double mean_vot = 26.0;          // USD/h
  double cell_length = 10.0 / 75.0;
  FdParams params{};
};

/// Sensitivity of the critical density to one more CAV at fixed HDV count (veh/km per veh).
double dkcr_dnA(const MixState& mix, const FdParams& p);

/// Sensitivity of the cell travel time to one more vehicle on the pure-HDV congested
/// branch (h per veh). Throws std::domain_error at free-flow densities.
double dd_dn(double gpl_density, const FdParams& p);

struct ConversionBenefit {
  double ml_vehicles = 0.0;       // vehicles in the managed-lane cell
  double dkcr_dnA = 0.0;
  double shifted_vehicles = 0.0;  // first bracket: extra vehicles the managed lane absorbs
  double gpl_flow = 0.0;          // veh/h
  double gpl_time = 0.0;          // h per cell
  double ml_time = 0.0;           // h per cell
  double dd_dn = 0.0;
  double shifted_term = 0.0;      // USD saved per shifted vehicle
  double remaining_term = 0.0;    // USD saved by vehicles left in the general lane
  double per_vehicle_value = 0.0; // second bracket
  double benefit = 0.0;           // USD per conversion (product of the brackets)
};

/// Throws std::invalid_argument on an invalid scenario.
ConversionBenefit marginal_benefit(const ConversionScenario& s);

double annualize(double per_trip_savings, double trips_per_day, double days_per_year);

}  // namespace mlsim
