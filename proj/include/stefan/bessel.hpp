#pragma once

namespace stefan {

inline constexpr double kMaxBesselOrder = 60.0;
inline constexpr double kMaxBesselArgument = 200.0;

/// Below this argument J is summed from its ascending power series; above it
/// the libstdc++ evaluator (continued fraction plus recurrence) takes over.
inline constexpr double kBesselSeriesCutoff = 12.0;

/// Bessel function of the first kind J_order(x) for 0 <= x <= 200 and
/// order <= 60. Orders in (-1, 0) are accepted for x <= kBesselSeriesCutoff
/// (the ascending series is valid there), which the Oddson rate needs when
/// the drift pushes mu slightly below zero. Throws DomainError otherwise.
double bessel_j(double order, double x);

/// Ascending power series alone; valid for any x but only accurate to
/// 1e-12 while the largest term stays moderate (x <= kBesselSeriesCutoff).
double bessel_j_series(double order, double x);

/// k-th positive zero of J_order, bracketed by a sign-change scan and refined
/// by bisection to an absolute tolerance of 1e-13.
double bessel_zero(double order, int k);

} // namespace stefan
