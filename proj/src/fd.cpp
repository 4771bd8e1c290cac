#include "mlsim/fd.hpp"

#include <algorithm>
#include <stdexcept>

namespace mlsim {

namespace {

void require_nonempty(const MixState& mix) {
  if (!(mix.total() > 0.0)) throw std::domain_error("fundamental diagram query on an empty mix");
}

// Weighted inverse intercepts appearing in both branches.
double intercept_weight(const MixState& m, const FdParams& p) {
  return m.n_hdv / p.q_H0 + m.n_cav / p.q_A0;
}

double wave_weight(const MixState& m, const FdParams& p) {
  return p.w_H * m.n_hdv / p.q_H0 + p.w_A * m.n_cav / p.q_A0;
}

}  // namespace

double critical_density(const MixState& mix, const FdParams& p) {
  require_nonempty(mix);
  const double denom =
      (p.s_f + p.w_H) * mix.n_hdv / p.q_H0 + (p.s_f + p.w_A) * mix.n_cav / p.q_A0;
  return mix.total() / denom;
}

double max_flow(const MixState& mix, const FdParams& p) { return critical_density(mix, p) * p.s_f; }

double jam_density(const MixState& mix, const FdParams& p) {
  require_nonempty(mix);
  return mix.total() / wave_weight(mix, p);
}

double flow(const MixState& mix, const FdParams& p) {
  if (mix.density < 0.0) throw std::domain_error("negative density");
  if (mix.density == 0.0) return 0.0;
  require_nonempty(mix);
  if (mix.density <= critical_density(mix, p)) return p.s_f * mix.density;
  const double q = (mix.total() - mix.density * wave_weight(mix, p)) / intercept_weight(mix, p);
  return std::max(0.0, q);
}

double speed(const MixState& mix, const FdParams& p) {
  if (mix.density <= 0.0 || !(mix.total() > 0.0)) return p.s_f;
  return std::max(flow(mix, p) / mix.density, p.s_min);
}

double cell_time(const MixState& mix, const FdParams& p, double cell_length) {
  return cell_length / speed(mix, p);
}

}  // namespace mlsim
