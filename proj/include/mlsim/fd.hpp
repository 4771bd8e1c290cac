#pragma once

#include "mlsim/scenario.hpp"

namespace mlsim {

/// Composition and density of one cell. Counts may be fractional for analytic use.
struct MixState {
  double n_hdv = 0.0;
  double n_cav = 0.0;
  double density = 0.0;  // veh/km

  double total() const { return n_hdv + n_cav; }
  double cav_fraction() const { return total() > 0.0 ? n_cav / total() : 0.0; }
};

/// Mixed CAV/HDV critical density (veh/km). Depends only on the CAV share.
/// Throws std::domain_error for an empty mix.
double critical_density(const MixState& mix, const FdParams& p);

/// Capacity at the critical density (veh/h).
double max_flow(const MixState& mix, const FdParams& p);

/// Density at which the congested branch reaches zero flow (veh/km).
double jam_density(const MixState& mix, const FdParams& p);

/// Triangular flow-density relation (veh/h). Densities beyond the implied jam density yield 0.
/// Throws std::domain_error on negative density or an empty mix with positive density.
double flow(const MixState& mix, const FdParams& p);

/// Space-mean speed q/k, floored at s_min. Empty cells run at free-flow speed.
double speed(const MixState& mix, const FdParams& p);

/// Time to traverse one cell (h).
double cell_time(const MixState& mix, const FdParams& p, double cell_length);

}  // namespace mlsim
