#pragma once

// Reference formulas written out independently of the library, for use as test oracles.

namespace oracle {

struct Params {
  double qH0 = 2424.0, qA0 = 4400.0, wH = 30.5, wA = 61.1, sf = 88.0, s0 = 5.0;
};

inline double k_cr(double nH, double nA, const Params& p = {}) {
  return (nH + nA) / ((p.sf + p.wH) * nH / p.qH0 + (p.sf + p.wA) * nA / p.qA0);
}

inline double k_jam(double nH, double nA, const Params& p = {}) {
  return (nH + nA) / (p.wH * nH / p.qH0 + p.wA * nA / p.qA0);
}

inline double q(double nH, double nA, double k, const Params& p = {}) {
  if (k <= k_cr(nH, nA, p)) return p.sf * k;
  const double n = nH + nA;
  const double v = (n - k * (p.wH * nH / p.qH0 + p.wA * nA / p.qA0)) / (nH / p.qH0 + nA / p.qA0);
  return v > 0.0 ? v : 0.0;
}

inline double d(double nH, double nA, double k, double len, const Params& p = {}) {
  if (k <= 0.0) return len / p.sf;
  double v = q(nH, nA, k, p) / k;
  if (v < p.s0) v = p.s0;
  return len / v;
}

}  // namespace oracle
