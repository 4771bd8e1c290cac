#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mlsim/tolling.hpp"

using namespace mlsim;

namespace {

Vehicle traveler(bool cav, int occupancy) {
  Vehicle v;
  v.is_cav = cav;
  v.occupancy = occupancy;
  return v;
}

const double kInf = std::numeric_limits<double>::infinity();
const TollParams T{};

}  // namespace

TEST_CASE("toll caps follow the policy table") {
  const Vehicle lohdv = traveler(false, 1), hohdv = traveler(false, 2);
  const Vehicle locav = traveler(true, 1), hocav = traveler(true, 2);
  CHECK(toll_cap(hohdv, Policy::ST1) == 0.0);
  CHECK(toll_cap(hocav, Policy::ST1) == 0.0);
  CHECK(toll_cap(locav, Policy::ST1) == 0.0);
  CHECK(toll_cap(lohdv, Policy::ST1) == kInf);
  CHECK(toll_cap(locav, Policy::ST2) == kInf);
  CHECK(toll_cap(hohdv, Policy::ST2) == 0.0);
  CHECK(toll_cap(hohdv, Policy::AT1) == kInf);
  CHECK(toll_cap(hocav, Policy::AT1) == kInf);
  CHECK(toll_cap(locav, Policy::EU4) == kInf);
  CHECK(toll_cap(hohdv, Policy::EU4) == 0.0);
  for (Policy p : {Policy::EU1, Policy::EU2, Policy::EU3, Policy::AU1}) {
    for (const Vehicle& v : {lohdv, hohdv, locav, hocav}) CHECK(toll_cap(v, p) == 0.0);
  }
  CHECK(ml_access(lohdv, Policy::EU1) == MlAccess::Excluded);
  CHECK(ml_access(hohdv, Policy::EU2) == MlAccess::Excluded);
  CHECK(ml_access(lohdv, Policy::EU4) == MlAccess::Excluded);
}

TEST_CASE("controller step") {
  CHECK(update_toll(0.4, 0.85, 1.0, T) == doctest::Approx(0.6));
  CHECK(update_toll(0.4, 0.84, 1.0, T) == doctest::Approx(0.2));
  CHECK(update_toll(0.0, 0.1, 1.0, T) == 0.0);
  CHECK(update_toll(15.0, 5.0, 1.0, T) == 15.0);
  CHECK(update_toll(14.9, 5.0, 1.0, T) == 15.0);
  CHECK(update_toll(0.1, 0.0, 1.0, T) == 0.0);
  CHECK(update_toll(0.2, 0.0, 0.0, T) == 0.0);  // nothing observed counts as empty
}

TEST_CASE("schedule starts at the floor and resets its sums") {
  TollSchedule s(5, T);
  CHECK(s.horizon() == 0);
  for (int g = 0; g < 5; ++g) CHECK(s.current(g) == 0.0);
  s.accumulate(2, 30.0, 20.0);
  s.accumulate(2, 30.0, 20.0);
  s.accumulate(1, 1.0, 20.0);
  CHECK(s.accumulated_density(2) == 60.0);
  s.close_horizon();
  CHECK(s.horizon() == 1);
  CHECK(s.current(2) == doctest::Approx(0.2));
  CHECK(s.current(1) == 0.0);
  CHECK(s.accumulated_density(2) == 0.0);
  CHECK(s.accumulated_critical(2) == 0.0);
  CHECK(s.history().size() == 2);
}

TEST_CASE("charging") {
  ChargeLedger ledger;
  Vehicle v = traveler(false, 1);
  CHECK(charge(v, 2, 0.2, 15, Policy::ST1, 1.0, ledger) == doctest::Approx(3.0));
  CHECK(charge(v, 2, 0.2, 15, Policy::ST1, 1.0, ledger) == 0.0);
  CHECK(charge(v, 2, 0.2, 15, Policy::ST1, 1.0, ledger) == 0.0);
  CHECK(v.toll_paid == doctest::Approx(3.0));
  CHECK(ledger.charges == 1);
  CHECK(ledger.suppressed == 2);
  CHECK(charge(v, 3, 0.4, 15, Policy::ST1, 1.0, ledger) == doctest::Approx(6.0));
  CHECK(v.toll_paid == doctest::Approx(9.0));
  CHECK(ledger.total == doctest::Approx(9.0));

  Vehicle hov = traveler(false, 3);
  CHECK(charge(hov, 1, 5.0, 15, Policy::ST1, 1.0, ledger) == 0.0);
  CHECK(hov.toll_paid == 0.0);

  Vehicle locav = traveler(true, 1);
  CHECK(group_charge(locav, 0.2, 15, Policy::ST2, 0.25) == doctest::Approx(0.75));
  CHECK(group_charge(locav, 0.2, 15, Policy::ST2, 0.0) == 0.0);
  CHECK(group_charge(traveler(false, 1), 0.2, 15, Policy::ST2, 0.25) == doctest::Approx(3.0));
  CHECK(group_charge(traveler(true, 2), 0.2, 15, Policy::AT1, 0.25) == doctest::Approx(3.0));
}

TEST_CASE("property: tolls stay in bounds and move by whole steps") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> ratio(0.0, 1.5);
  TollSchedule s(5, T);
  for (int h = 0; h < 400; ++h) {
    for (int g = 0; g < 5; ++g) {
      const double r = ratio(rng) < 0.5 ? 0.9 : ratio(rng);  // bias upward to reach the cap
      for (int k = 0; k < 50; ++k) s.accumulate(g, r * 20.0, 20.0);
    }
    s.close_horizon();
  }
  const auto& hist = s.history();
  bool hit_max = false;
  for (std::size_t h = 1; h < hist.size(); ++h) {
    for (int g = 0; g < 5; ++g) {
      const double now = hist[h][g], before = hist[h - 1][g];
      CHECK((now >= T.pi_min && now <= T.pi_max));
      const double delta = now - before;
      const bool step = std::abs(std::abs(delta) - T.pi_step) < 1e-9;
      const bool clamped = (now == T.pi_max || now == T.pi_min) && std::abs(delta) <= T.pi_step + 1e-9;
      CHECK((step || clamped));
      if (std::abs(delta) < 1e-12) CHECK((now == T.pi_min || now == T.pi_max));
      hit_max = hit_max || now == T.pi_max;
    }
  }
  CHECK(hit_max);
}

TEST_CASE("controller direction and timing") {
  const double start = 3.0;
  // Drive a fresh schedule up to `start` first.
  TollSchedule s(1, T);
  int up = 0;
  while (s.current(0) < start - 1e-9) {
    s.accumulate(0, 20.0, 20.0);
    s.close_horizon();
    ++up;
  }
  CHECK(up == static_cast<int>(std::ceil(start / T.pi_step - 1e-9)));
  const int expected = static_cast<int>(std::ceil((s.current(0) - T.pi_min) / T.pi_step - 1e-9));
  int down = 0;
  while (s.current(0) > T.pi_min) {
    s.accumulate(0, 0.0, 20.0);
    s.close_horizon();
    ++down;
  }
  CHECK(down == expected);
  int rise = 0;
  while (s.current(0) < T.pi_max) {
    s.accumulate(0, 25.0, 20.0);
    s.close_horizon();
    ++rise;
  }
  CHECK(rise == static_cast<int>(std::ceil((T.pi_max - T.pi_min) / T.pi_step - 1e-9)));
}
