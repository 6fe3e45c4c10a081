#pragma once

namespace hotspot {

// Concentrations above this are clamped (with a diagnostic) so that the
// circular kernel never collapses to a numerical spike.
inline constexpr double kMaxConcentration = 1e6;

// Standard normal kernel (2*pi)^(-1/2) exp(-u^2/2).
double gaussian_kernel(double u);
double log_gaussian_kernel(double u);

// log I0(x) for x >= 0: power series below 15, asymptotic expansion above.
// Throws ArgumentError for negative or NaN x.
double log_bessel_i0(double x);
// log(I0(x) * exp(-x)); avoids cancellation in tau*cos(.) - log I0(tau).
double log_bessel_i0_scaled(double x);

// Clamp to [0, kMaxConcentration]; warns once per call when clamping.
double clamp_concentration(double tau);

// Von Mises kernel on a 24 h circle:
//   exp(tau * cos(pi * u / 12)) / (24 * I0(tau))
double von_mises_density(double u_hours, double tau);
double log_von_mises_density(double u_hours, double tau);

// Integral of von_mises_density(t - center, tau) over [t1, t2] with
// 0 <= t1 < t2 <= 24. Absolute error <= 1e-8.
double von_mises_interval_mass(double center, double t1, double t2, double tau);

}  // namespace hotspot
