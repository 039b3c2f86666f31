// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <limits>
#include <ostream>

#include "errors.hpp"

namespace tailrisk {

/// A real number or +infinity. Infinity is an explicit state, never the
/// result of floating overflow; finite payloads are always finite doubles.
class ExtReal {
public:
    constexpr ExtReal() noexcept = default;
    constexpr ExtReal(double v) : value_(v) {
        if (!(v - v == 0.0)) throw DomainError("ExtReal requires a finite value");
    }

    static constexpr ExtReal infinity() noexcept {
        ExtReal r;
        r.infinite_ = true;
        return r;
    }

    constexpr bool is_finite() const noexcept { return !infinite_; }
    constexpr bool is_infinite() const noexcept { return infinite_; }

    /// Finite payload; throws on +inf.
    constexpr double value() const {
        if (infinite_) throw DomainError("ExtReal::value() on +inf");
        return value_;
    }

    /// Lossy view for serialization and plotting: +inf maps to HUGE_VAL.
    constexpr double to_double() const noexcept {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend constexpr ExtReal operator+(ExtReal a, ExtReal b) noexcept {
        if (a.infinite_ || b.infinite_) return infinity();
        ExtReal r;
        r.value_ = a.value_ + b.value_;
        return r;
    }
    constexpr ExtReal& operator+=(ExtReal o) noexcept { return *this = *this + o; }

    /// Scaling by a nonnegative weight with 0 * inf = 0.
    friend constexpr ExtReal scale(double w, ExtReal x) {
        if (w < 0.0) throw DomainError("ExtReal scale weight must be nonnegative");
        if (w == 0.0) return ExtReal(0.0);
        if (x.infinite_) return infinity();
        return ExtReal(w * x.value_);
    }

    friend constexpr bool operator==(ExtReal a, ExtReal b) noexcept {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }
    friend constexpr std::partial_ordering operator<=>(ExtReal a, ExtReal b) noexcept {
        if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
        if (a.infinite_) return std::partial_ordering::greater;
        if (b.infinite_) return std::partial_ordering::less;
        return a.value_ <=> b.value_;
    }

    friend std::ostream& operator<<(std::ostream& os, ExtReal x) {
        if (x.infinite_) return os << "inf";
        return os << x.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

}  // namespace tailrisk
