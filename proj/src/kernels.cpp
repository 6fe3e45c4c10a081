#include "hotspot/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hotspot/diagnostics.hpp"
#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kSeriesCutoff = 15.0;
constexpr double kHoursToRad = std::numbers::pi / 12.0;

double series_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// sum_k c_k / x^k with c_k = prod_{j<=k} (2j-1)^2 / (8 j); truncated at the
// smallest term since the series is only asymptotic.
double asymptotic_i0_tail(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

struct VonMisesIntegrand {
  double center;
  double tau;
  double log_norm;  // log(24) + log I0e(tau)

  double operator()(double t) const {
    return std::exp(tau * (std::cos((t - center) * kHoursToRad) - 1.0) - log_norm);
  }
};

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

struct AdaptiveSimpson {
  const VonMisesIntegrand& f;
  int evals = 0;
  bool exhausted = false;

  static constexpr int kMaxDepth = 48;
  static constexpr int kMaxEvals = 200000;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double eps,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    evals += 2;
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth >= kMaxDepth || evals > kMaxEvals) {
      exhausted = true;
      return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
  }

  double integrate(double a, double b, double eps) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    evals += 3;
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), eps, 0);
  }
};

double composite_simpson(const VonMisesIntegrand& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

double gaussian_kernel(double u) { return std::exp(log_gaussian_kernel(u)); }

double log_gaussian_kernel(double u) { return -0.5 * u * u - kLogSqrt2Pi; }

double log_bessel_i0_scaled(double x) {
  if (!(x >= 0.0)) throw ArgumentError("log_bessel_i0: argument must be non-negative");
  if (x < kSeriesCutoff) return std::log(series_i0(x)) - x;
  return -0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(asymptotic_i0_tail(x));
}

double log_bessel_i0(double x) { return x + log_bessel_i0_scaled(x); }

double clamp_concentration(double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("von Mises concentration must be non-negative");
  if (tau > kMaxConcentration) {
    warn("von Mises concentration " + std::to_string(tau) + " capped at " +
         std::to_string(kMaxConcentration));
    return kMaxConcentration;
  }
  return tau;
}

double log_von_mises_density(double u_hours, double tau) {
  tau = clamp_concentration(tau);
  return tau * (std::cos(u_hours * kHoursToRad) - 1.0) - log_bessel_i0_scaled(tau) -
         std::log(24.0);
}

double von_mises_density(double u_hours, double tau) {
  return std::exp(log_von_mises_density(u_hours, tau));
}

double von_mises_interval_mass(double center, double t1, double t2, double tau) {
  if (!(t1 >= 0.0 && t2 <= 24.0 && t1 < t2)) {
    throw ArgumentError("von_mises_interval_mass: need 0 <= t1 < t2 <= 24");
  }
  tau = clamp_concentration(tau);
  if (tau == 0.0) return (t2 - t1) / 24.0;
  if (t2 - t1 >= 24.0) return 1.0;

  const VonMisesIntegrand f{center, tau, std::log(24.0) + log_bessel_i0_scaled(tau)};

  // Split at every crest and trough of the kernel inside (t1, t2) so the
  // only sharp feature of each segment sits on an endpoint.
  std::vector<double> cuts{t1, t2};
  const double first = center + 12.0 * std::ceil((t1 - center) / 12.0);
  for (double c = first; c < t2; c += 12.0) {
    if (c > t1) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());

  constexpr int kInitialPanels = 8;
  constexpr double kTolerance = 1e-11;
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    if (b <= a) continue;
    AdaptiveSimpson integrator{f};
    double seg = 0.0;
    const double h = (b - a) / kInitialPanels;
    for (int p = 0; p < kInitialPanels; ++p) {
      seg += integrator.integrate(a + p * h, a + (p + 1) * h, kTolerance / kInitialPanels);
    }
    if (integrator.exhausted) seg = composite_simpson(f, a, b, 256);
    total += seg;
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace hotspot
