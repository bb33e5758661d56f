#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "phidro/error.hpp"

namespace phidro {

/**
 * @brief A value in (-inf, +inf]. Negative infinity and NaN are rejected.
 *
 * Arithmetic is limited to what the dual objective needs: addition,
 * nonnegative scaling and max. 0 * inf raises instead of picking a convention.
 */
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;

    ExtendedReal(double v) : v_(v) {  // NOLINT(google-explicit-constructor)
        if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
            throw Error(ErrorKind::Validation, "ExtendedReal: NaN or -inf");
    }

    static ExtendedReal infinity() {
        return ExtendedReal(std::numeric_limits<double>::infinity());
    }

    bool is_finite() const { return std::isfinite(v_); }
    bool is_infinite() const { return !is_finite(); }

    /// Raw double; +inf when infinite.
    double value() const { return v_; }

    ExtendedReal& operator+=(ExtendedReal o) {
        v_ += o.v_;
        return *this;
    }
    friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) { return a += b; }

    /// Scale by c >= 0.
    friend ExtendedReal operator*(double c, ExtendedReal a) {
        if (!(c >= 0.0)) throw Error(ErrorKind::Validation, "ExtendedReal: negative scale");
        if (c == 0.0 && a.is_infinite())
            throw Error(ErrorKind::Validation, "ExtendedReal: 0 * inf is undefined");
        return ExtendedReal(c * a.v_);
    }

    friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }
    friend auto operator<=>(ExtendedReal a, ExtendedReal b) { return a.v_ <=> b.v_; }

    friend std::ostream& operator<<(std::ostream& os, ExtendedReal a) {
        if (a.is_infinite()) return os << "+inf";
        return os << a.v_;
    }

private:
    double v_ = 0.0;
};

inline ExtendedReal max(ExtendedReal a, ExtendedReal b) { return a < b ? b : a; }

}  // namespace phidro
