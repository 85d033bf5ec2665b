#include "stefan/bessel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stefan/error.hpp"

namespace stefan {

namespace {

void check_order(double order)
{
    if (!(order > -1.0) || order > kMaxBesselOrder) {
        throw DomainError("bessel order " + std::to_string(order) + " outside (-1, 60]");
    }
}

} // namespace

double bessel_j_series(double order, double x)
{
    check_order(order);
    if (x < 0.0) throw DomainError("bessel argument must be nonnegative");
    if (x == 0.0) {
        if (order == 0.0) return 1.0;
        if (order > 0.0) return 0.0;
        throw DomainError("J_order(0) is unbounded for negative order");
    }
    const double half = 0.5 * x;
    const double q = -half * half;
    double term = std::exp(order * std::log(half) - std::lgamma(order + 1.0));
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= q / (n * (n + order));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && n > half) break;
    }
    return sum;
}

double bessel_j(double order, double x)
{
    check_order(order);
    if (!(x >= 0.0) || x > kMaxBesselArgument) {
        throw DomainError("bessel argument " + std::to_string(x) + " outside [0, 200]");
    }
    if (x <= kBesselSeriesCutoff) return bessel_j_series(order, x);
    if (order < 0.0) {
        throw DomainError("negative bessel order only supported for x <= 12");
    }
    return std::cyl_bessel_j(order, x);
}

double bessel_zero(double order, int k)
{
    check_order(order);
    if (k < 1) throw DomainError("zero index must be positive");

    // Consecutive zeros are never closer than ~3.1, so a quarter-pi scan
    // cannot step over a pair.
    const double step = 0.25 * std::numbers::pi;
    double a = order >= 0.0 ? order + 1.0 : 0.5 * (order + 1.0);
    double fa = bessel_j(order, a);
    int found = 0;
    while (true) {
        double b = a + step;
        if (b > kMaxBesselArgument) {
            throw NumericalError("bessel_zero(" + std::to_string(order) + ", " + std::to_string(k) +
                                 "): no bracket below x = 200 after " + std::to_string(found) + " zeros");
        }
        if (order < 0.0 && b > kBesselSeriesCutoff) {
            throw NumericalError("bessel_zero: negative order zeros limited to x <= 12");
        }
        double fb = bessel_j(order, b);
        if (fa == 0.0) {
            if (++found == k) return a;
        } else if (fa * fb < 0.0) {
            if (++found == k) {
                double lo = a, hi = b, flo = fa;
                while (hi - lo > 1e-13) {
                    double mid = 0.5 * (lo + hi);
                    double fm = bessel_j(order, mid);
                    if (fm == 0.0) return mid;
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if (mid == lo && mid == hi) break;
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

} // namespace stefan
