#include "mlsim/tolling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlsim {

MlAccess ml_access(const Vehicle& v, Policy policy) {
  const bool hov = v.is_hov();
  const bool locav = !hov && v.is_cav;
  const bool lohdv = !hov && !v.is_cav;
  switch (policy) {
    case Policy::EU1:
      return hov ? MlAccess::Free : MlAccess::Excluded;
    case Policy::EU2:
      return v.is_cav ? MlAccess::Free : MlAccess::Excluded;
    case Policy::EU3:
      return (hov || v.is_cav) ? MlAccess::Free : MlAccess::Excluded;
    case Policy::EU4:
      if (hov) return MlAccess::Free;
      return locav ? MlAccess::Tolled : MlAccess::Excluded;
    case Policy::AU1:
      return MlAccess::Free;
    case Policy::ST1:
      return lohdv ? MlAccess::Tolled : MlAccess::Free;
    case Policy::ST2:
      return hov ? MlAccess::Free : MlAccess::Tolled;
    case Policy::AT1:
      return MlAccess::Tolled;
  }
  return MlAccess::Excluded;
}

double toll_cap(const Vehicle& v, Policy policy) {
  return ml_access(v, policy) == MlAccess::Tolled ? std::numeric_limits<double>::infinity() : 0.0;
}

double charge_multiplier(const Vehicle& v, double locav_toll_factor) {
  return (v.is_cav && !v.is_hov()) ? locav_toll_factor : 1.0;
}

double group_charge(const Vehicle& v, double per_cell_toll, int cells, Policy policy,
                    double locav_toll_factor) {
  const double cap = toll_cap(v, policy);
  if (cap == 0.0) return 0.0;
  return std::min(per_cell_toll * cells, cap) * charge_multiplier(v, locav_toll_factor);
}

double update_toll(double previous, double sum_density, double sum_critical, const TollParams& p) {
  const bool busy = sum_density > 0.0 && sum_density >= p.theta * sum_critical;
  double next = busy ? previous + p.pi_step : previous - p.pi_step;
  // Stay on the pi_min + k * pi_step lattice so repeated steps land exactly on the clamps.
  const double k = std::round((next - p.pi_min) / p.pi_step);
  if (std::abs(next - (p.pi_min + k * p.pi_step)) < 1e-9) next = p.pi_min + k * p.pi_step;
  return std::clamp(next, p.pi_min, p.pi_max);
}

TollSchedule::TollSchedule(int n_groups, const TollParams& params)
    : n_groups_(n_groups),
      params_(params),
      history_{std::vector<double>(static_cast<std::size_t>(n_groups), params.pi_min)},
      sum_density_(static_cast<std::size_t>(n_groups), 0.0),
      sum_critical_(static_cast<std::size_t>(n_groups), 0.0) {}

void TollSchedule::accumulate(int group, double density, double critical) {
  sum_density_[group] += density;
  sum_critical_[group] += critical;
}

void TollSchedule::close_horizon() {
  std::vector<double> next(static_cast<std::size_t>(n_groups_));
  const auto& prev = history_.back();
  for (int g = 0; g < n_groups_; ++g) {
    next[g] = update_toll(prev[g], sum_density_[g], sum_critical_[g], params_);
  }
  history_.push_back(std::move(next));
  std::fill(sum_density_.begin(), sum_density_.end(), 0.0);
  std::fill(sum_critical_.begin(), sum_critical_.end(), 0.0);
}

double charge(Vehicle& v, int group, double per_cell_toll, int cells, Policy policy,
              double locav_toll_factor, ChargeLedger& ledger) {
  const std::uint64_t bit = std::uint64_t{1} << group;
  if (v.charged_groups & bit) {
    ++ledger.suppressed;
    return 0.0;
  }
  v.charged_groups |= bit;
  const double amount = group_charge(v, per_cell_toll, cells, policy, locav_toll_factor);
  v.toll_paid += amount;
  ledger.total += amount;
  ++ledger.charges;
  return amount;
}

}  // namespace mlsim
