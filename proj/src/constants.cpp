#include "fcslab/constants.hpp"

#include <cmath>
#include <functional>

#include "fcslab/errors.hpp"

namespace fcslab {
namespace {

constexpr double kPi = 3.14159265358979323846;

void check_order(double s) {
    if (!(s > 0.0) || !(s < 1.0)) {
        throw DomainError("fractional order s must lie in (0,1)");
    }
}

// Recursive adaptive Simpson.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// I1(s) = int_0^inf (1 - cos t) / t^(1+2s) dt, split at t = 1.
//
// Near zero the integrand behaves like t^(1-2s)/2; expanding 1 - cos t gives
// the rapidly convergent series
//   int_0^1 = sum_{k>=1} (-1)^(k+1) / ((2k)! (2k - 2s)),
// which also absorbs the s -> 1 endpoint singularity analytically. The tail is
//   int_1^inf t^(-1-2s) dt - int_1^inf cos t * t^(-1-2s) dt
// with the oscillatory part integrated numerically up to T and finished
// with a six-term integration-by-parts expansion (remainder ~ T^(-6-2s)).
double one_d_cosine_integral(double s) {
    // [0, 1]: alternating series, factorially convergent.
    double head = 0.0;
    double factorial = 2.0;  // (2k)! starting at k=1
    double sign = 1.0;
    for (int k = 1; k <= 24; ++k) {
        const double term = sign / (factorial * (2.0 * k - 2.0 * s));
        head += term;
        if (std::abs(term) < 1e-18 * std::abs(head)) break;
        sign = -sign;
        factorial *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }

    const double tail_power = 1.0 / (2.0 * s);

    const double T = 200.0;
    const double a = 1.0 + 2.0 * s;
    // Period-by-period chunks keep the adaptive error estimate honest on the
    // oscillatory stretch.
    double osc = 0.0;
    double lo = 1.0;
    while (lo < T) {
        const double hi = std::min(lo + 2.0 * kPi, T);
        osc += integrate([a](double t) { return std::cos(t) * std::pow(t, -a); }, lo,
                         hi, 1e-15);
        lo = hi;
    }

    // int_T^inf cos t * g dt with g = t^(-a), by repeated integration by parts:
    //   sum_m trig(m) * g^(m)(T),  trig cycling (-sin, -cos, +sin, +cos),
    // remainder after six terms ~ T^(-6-a).
    double tail_osc = 0.0;
    double gm = std::pow(T, -a);  // |g^(m)(T)|
    double sgn = 1.0;             // (-1)^m from differentiating t^(-a)
    const double sinT = std::sin(T), cosT = std::cos(T);
    const double trig[4] = {-sinT, -cosT, sinT, cosT};
    for (int m = 0; m < 6; ++m) {
        tail_osc += trig[m % 4] * sgn * gm;
        gm *= (a + m) / T;
        sgn = -sgn;
    }

    return head + tail_power - (osc + tail_osc);
}

double log_gamma(double x) { return std::lgamma(x); }

}  // namespace

double critical_exponent(int dimension, double order) {
    check_order(order);
    if (dimension < 1) throw DomainError("dimension must be >= 1");
    if (!(dimension > 2.0 * order)) {
        throw DomainError("critical exponent needs N > 2s");
    }
    return 2.0 * dimension / (dimension - 2.0 * order);
}

double dirichlet_constant(int dimension, double order) {
    check_order(order);
    if (dimension < 1) throw DomainError("dimension must be >= 1");
    const double i1 = one_d_cosine_integral(order);
    if (dimension == 1) {
        return 2.0 * i1;
    }
    // Coordinates orthogonal to eta_1 integrate out exactly:
    //   C(N,s) = |S^(N-2)| * B((N-1)/2, s + 1/2) * I1(s).
    const double n = dimension;
    const double sphere = 2.0 * std::pow(kPi, 0.5 * (n - 1.0)) /
                          std::tgamma(0.5 * (n - 1.0));
    const double beta = std::exp(log_gamma(0.5 * (n - 1.0)) + log_gamma(order + 0.5) -
                                 log_gamma(0.5 * n + order));
    return sphere * beta * i1;
}

double sobolev_constant(int dimension, double order) {
    check_order(order);
    if (dimension < 1) throw DomainError("dimension must be >= 1");
    if (!(dimension > 2.0 * order)) {
        throw DomainError("sobolev_constant needs N > 2s");
    }
    const double n = dimension, s = order;
    const double log_value = -2.0 * s * std::log(2.0) - s * std::log(kPi) +
                             log_gamma(0.5 * (n - 2.0 * s)) -
                             log_gamma(0.5 * (n + 2.0 * s)) +
                             (2.0 * s / n) * (log_gamma(n) - log_gamma(0.5 * n));
    return std::exp(log_value);
}

}  // namespace fcslab
