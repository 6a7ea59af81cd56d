#include "hfrisk/special_functions.hpp"

#include <cmath>
#include <limits>

#include "hfrisk/error.hpp"

namespace hfrisk {
namespace {

constexpr double kRelativeTolerance = 1e-15;
constexpr int kMaxIterations = 10000;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kRelativeTolerance) {
            return h;
        }
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

// I_x(a,b) given both x and y = 1 - x, so callers can pass an accurately
// computed complement.
double incomplete_beta_pair(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw NumericError("incomplete beta arguments out of domain");
    }
    return incomplete_beta_pair(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) {
        throw NumericError("t distribution needs positive degrees of freedom");
    }
    if (std::isnan(t)) {
        throw NumericError("t statistic is NaN");
    }
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    const double y = t * t / (df + t * t);
    const double p = incomplete_beta_pair(0.5 * df, 0.5, x, y);
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace hfrisk
