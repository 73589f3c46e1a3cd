#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace notemine {

// ---------------------------------------------------------------------------
// Regularized incomplete gamma functions, series + continued fraction
// (the classic cephes split), accurate to ~1e-15 relative.

namespace detail {

constexpr double kIgamEps = 1e-17;
constexpr double kBig = 4.503599627370496e15;
constexpr double kBigInv = 2.22044604925031308085e-16;

}  // namespace detail

inline double igamc(double a, double x);

// Lower regularized incomplete gamma P(a, x).
inline double igam(double a, double x) {
  if (x <= 0.0 || a <= 0.0) return 0.0;
  if (x > 1.0 && x > a) return 1.0 - igamc(a, x);

  double ax = a * std::log(x) - x - std::lgamma(a);
  if (ax < -709.0) return 0.0;
  ax = std::exp(ax);

  double r = a;
  double c = 1.0;
  double ans = 1.0;
  do {
    r += 1.0;
    c *= x / r;
    ans += c;
  } while (c / ans > detail::kIgamEps);
  return ans * ax / a;
}

// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
inline double igamc(double a, double x) {
  if (x <= 0.0 || a <= 0.0) return 1.0;
  if (x < 1.0 || x < a) return 1.0 - igam(a, x);

  double ax = a * std::log(x) - x - std::lgamma(a);
  if (ax < -709.0) return 0.0;
  ax = std::exp(ax);

  double y = 1.0 - a;
  double z = x + y + 1.0;
  double c = 0.0;
  double pkm2 = 1.0, qkm2 = x;
  double pkm1 = x + 1.0, qkm1 = z * x;
  double ans = pkm1 / qkm1;
  double t;
  do {
    c += 1.0;
    y += 1.0;
    z += 2.0;
    double yc = y * c;
    double pk = pkm1 * z - pkm2 * yc;
    double qk = qkm1 * z - qkm2 * yc;
    if (qk != 0.0) {
      double r = pk / qk;
      t = std::fabs((ans - r) / r);
      ans = r;
    } else {
      t = 1.0;
    }
    pkm2 = pkm1;
    pkm1 = pk;
    qkm2 = qkm1;
    qkm1 = qk;
    if (std::fabs(pk) > detail::kBig) {
      pkm2 *= detail::kBigInv;
      pkm1 *= detail::kBigInv;
      qkm2 *= detail::kBigInv;
      qkm1 *= detail::kBigInv;
    }
  } while (t > detail::kIgamEps);
  return ans * ax;
}

// ---------------------------------------------------------------------------
// Chi-square survival function (upper tail), two routes kept separate on
// purpose so they can be cross-checked.

// Closed form for even dof: exp(-x/2) * sum_{j<dof/2} (x/2)^j / j!.
// For dof=4 this is exp(-x/2) * (1 + x/2).
inline double chi2_pvalue_even(double x, unsigned dof) {
  if (dof == 0 || dof % 2 != 0)
    throw std::invalid_argument("chi2_pvalue_even: dof must be even, > 0");
  if (x <= 0.0) return 1.0;
  double half = x / 2.0;
  double term = 1.0;
  double sum = 1.0;
  for (unsigned j = 1; j < dof / 2; ++j) {
    term *= half / static_cast<double>(j);
    sum += term;
  }
  double p = std::exp(-half) * sum;
  if (p > 1.0) p = 1.0;
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  return p;
}

// General dof via Q(dof/2, x/2).
inline double chi2_pvalue_gamma(double x, double dof) {
  if (dof <= 0.0) throw std::invalid_argument("chi2_pvalue_gamma: dof <= 0");
  if (x <= 0.0) return 1.0;
  double p = igamc(dof / 2.0, x / 2.0);
  if (p > 1.0) p = 1.0;
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  return p;
}

inline double chi2_pvalue(double x, unsigned dof) {
  if (dof == 0) throw std::invalid_argument("chi2_pvalue: dof = 0");
  if (dof % 2 == 0 && dof <= 200) return chi2_pvalue_even(x, dof);
  return chi2_pvalue_gamma(x, static_cast<double>(dof));
}

// ---------------------------------------------------------------------------
// Pearson chi-square on a 2xK presence/absence table

struct Chi2Result {
  double chi2 = 0.0;
  unsigned dof = 0;
  double p_value = 1.0;
  unsigned dropped_columns = 0;  // zero-total topics removed before the test
};

inline Chi2Result pearson_chi2(const std::vector<std::uint64_t>& present,
                               const std::vector<std::uint64_t>& absent) {
  if (present.size() != absent.size() || present.empty())
    throw std::invalid_argument("pearson_chi2: mismatched or empty rows");

  std::vector<double> col;
  std::vector<double> pres;
  Chi2Result res;
  for (std::size_t k = 0; k < present.size(); ++k) {
    double total = static_cast<double>(present[k] + absent[k]);
    if (total == 0.0) {
      ++res.dropped_columns;
      continue;
    }
    col.push_back(total);
    pres.push_back(static_cast<double>(present[k]));
  }
  if (col.size() < 2) {
    res.dof = 0;
    res.p_value = 1.0;
    return res;
  }

  double n = 0.0, row1 = 0.0;
  for (std::size_t k = 0; k < col.size(); ++k) {
    n += col[k];
    row1 += pres[k];
  }
  double row0 = n - row1;

  double chi2 = 0.0;
  for (std::size_t k = 0; k < col.size(); ++k) {
    double e1 = row1 * col[k] / n;
    double e0 = row0 * col[k] / n;
    if (e1 > 0.0) {
      double d = pres[k] - e1;
      chi2 += d * d / e1;
    }
    if (e0 > 0.0) {
      double d = (col[k] - pres[k]) - e0;
      chi2 += d * d / e0;
    }
  }
  res.chi2 = chi2;
  res.dof = static_cast<unsigned>(col.size() - 1);
  res.p_value = chi2_pvalue(chi2, res.dof);
  return res;
}

}  // namespace notemine
