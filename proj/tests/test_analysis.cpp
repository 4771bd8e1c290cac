#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mlsim/analysis.hpp"
#include "mlsim/fd.hpp"

using namespace mlsim;

namespace {
const FdParams P{};
const double L = 10.0 / 75.0;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST_CASE("critical-density sensitivity") {
  ConversionScenario s;
  const ConversionBenefit b = marginal_benefit(s);
  CHECK(b.ml_vehicles == doctest::Approx(2.643).epsilon(1e-3));
  CHECK(std::abs(b.dkcr_dnA - 1.86) <= 0.02);
  CHECK(dkcr_dnA({0, 3, 3 / L}, P) == 0.0);
  CHECK(dkcr_dnA({1, 1, 2 / L}, P) == doctest::Approx(2.189).epsilon(1e-3));
  CHECK_THROWS_AS(dkcr_dnA({0, 0, 0}, P), std::domain_error);
}

TEST_CASE("travel-time sensitivity on the congested branch") {
  CHECK(dd_dn(63.0, P) == doctest::Approx(1 / 502.5 + 63 * 30.5 / (502.5 * 502.5)));
  CHECK(dd_dn(63.0, P) == doctest::Approx(0.0096).epsilon(0.02));
  CHECK(std::abs(dd_dn(63.0, P) - 0.0097) <= 0.0003);
  const double kc = 2424.0 / 118.5;
  CHECK(dd_dn(kc, P) == doctest::Approx(7.48e-4).epsilon(1e-3));
  FdParams slow = P;
  slow.w_H = 1e-9;
  CHECK(dd_dn(40.0, slow) == doctest::Approx(1.0 / 2424.0).epsilon(1e-6));
  CHECK_THROWS_AS(dd_dn(10.0, P), std::domain_error);
  CHECK_THROWS_AS(dd_dn(80.0, P), std::domain_error);
}

TEST_CASE("finite-difference oracle over a 20x20 grid") {
  // Critical density against one more CAV, over CAV shares and cell occupancies.
  for (int i = 0; i < 20; ++i) {
    const double share = i / 20.0;
    for (int j = 0; j < 20; ++j) {
      const double n = 0.5 + j * 0.5;
      const double nH = (1 - share) * n, nA = share * n;
      const double h = 1e-4 * n;
      const double fd = (critical_density({nH, nA + h, 0}, P) - critical_density({nH, nA - h, 0}, P)) /
                        (2 * h);
      const double exact = dkcr_dnA({nH, nA, n / L}, P);
      CAPTURE(share);
      CAPTURE(n);
      if (exact == 0.0) CHECK(std::abs(fd) < 1e-9);
      else CHECK(rel(exact, fd) < 1e-6);
    }
  }
  // Cell travel time against one more vehicle, over congested densities and cell lengths.
  const double kc = 2424.0 / 118.5;
  const double k_floor = 2424.0 / (30.5 + 5.0);  // beyond this the speed floor binds
  for (int i = 0; i < 20; ++i) {
    const double k = kc + 0.5 + i * (k_floor - kc - 1.0) / 19.0;
    for (int j = 0; j < 20; ++j) {
      const double len = 0.05 + 0.025 * j;
      const double dn = 1e-4;
      const double dk = dn / len;
      const double fd =
          (cell_time({k * len + dn, 0, k + dk}, P, len) - cell_time({k * len - dn, 0, k - dk}, P, len)) /
          (2 * dn);
      CAPTURE(k);
      CAPTURE(len);
      CHECK(rel(dd_dn(k, P), fd) < 1e-6);
    }
  }
}

TEST_CASE("marginal benefit decomposition") {
  ConversionScenario s;
  const ConversionBenefit b = marginal_benefit(s);
  CHECK(b.shifted_vehicles == doctest::Approx(2 * b.dkcr_dnA * L));
  CHECK(std::abs(b.shifted_vehicles - 2 * 1.86 * 0.1333) < 0.01);
  CHECK(b.ml_time == doctest::Approx(L / 88.0));
  CHECK(b.gpl_flow == doctest::Approx(2424.0 - 30.5 * 63.0));
  CHECK(b.gpl_time == doctest::Approx(L * 63.0 / (2424.0 - 30.5 * 63.0)));
  CHECK(b.shifted_term == doctest::Approx((b.gpl_time - b.ml_time) * 26.0));
  CHECK(b.remaining_term == doctest::Approx(b.dd_dn * b.gpl_flow * (L / 88.0) * 26.0));
  CHECK(b.benefit == doctest::Approx(b.shifted_vehicles * (b.shifted_term + b.remaining_term)));
  CHECK(b.benefit > 0.0);

  ConversionScenario all_cav = s;
  all_cav.ml_cav_fraction = 1.0;
  CHECK(marginal_benefit(all_cav).benefit == 0.0);

  ConversionScenario bad = s;
  bad.ml_density_ratio = 1.2;
  CHECK_THROWS_AS(marginal_benefit(bad), std::invalid_argument);
  bad = s;
  bad.gpl_density = 10.0;
  CHECK_THROWS_AS(marginal_benefit(bad), std::domain_error);
}

TEST_CASE("property: positive benefit whenever the critical density grows with CAVs") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> share(0.0, 0.99), ratio(0.05, 1.0), k(21.0, 68.0),
      vot(1.0, 80.0);
  for (int t = 0; t < 500; ++t) {
    ConversionScenario s;
    s.ml_cav_fraction = share(rng);
    s.ml_density_ratio = ratio(rng);
    s.gpl_density = k(rng);
    s.mean_vot = vot(rng);
    const ConversionBenefit b = marginal_benefit(s);
    CHECK(b.dkcr_dnA > 0.0);
    CHECK(b.benefit > 0.0);
  }
}

TEST_CASE("annualization") {
  CHECK(annualize(9.3 + 13.8, 2, 250) == 11550.0);
  CHECK(annualize(0, 2, 250) == 0.0);
  CHECK(annualize(1, 1, 1) == 1.0);
}
