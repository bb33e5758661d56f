#pragma once

#include <algorithm>
#include <cmath>

namespace phidro::detail {

struct LineSearchResult {
    double arg;
    double value;
    bool converged;
};

/**
 * Golden-section minimization of a convex f on [a, b], which may return
 * +inf on a left sub-interval. Stops when b - a <= tol * max(1, |mid|).
 * The endpoints are always evaluated; ties go to the smaller argument.
 */
template <class F>
LineSearchResult golden_minimize(F&& f, double a, double b, double tol, int max_iter) {
    LineSearchResult best{a, f(a), true};
    auto consider = [&](double x, double v) {
        if (v < best.value || (v == best.value && x < best.arg)) best = {x, v, true};
    };
    if (b <= a) return best;
    consider(b, f(b));

    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while ((b - a) > tol * std::max(1.0, std::abs(0.5 * (a + b)))) {
        if (it++ >= max_iter) {
            best.converged = false;
            break;
        }
        const bool both_inf = std::isinf(fc) && std::isinf(fd);
        if (!both_inf && fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    consider(c, fc);
    consider(d, fd);
    return best;
}

}  // namespace phidro::detail
