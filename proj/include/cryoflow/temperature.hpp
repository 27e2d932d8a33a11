#pragma once

#include <cmath>

#include "cryoflow/types.hpp"

namespace cryoflow {

/// Lipschitz truncation of the exponential temperature map theta = exp(w):
/// exponential up to w = cap, extended linearly (slope exp(cap)) beyond.
/// The map is C^1, increasing, and globally Lipschitz, so the implicit
/// entropy solve stays well posed while theta = value(w) > 0 structurally.
struct ExpTemperature {
    double cap = 30.0;

    explicit ExpTemperature(double cap_) : cap(cap_) {
        if (!(cap > 0.0)) throw ParameterError("ExpTemperature: cap must be positive");
    }

    /// theta(w)
    double value(double w) const {
        if (w <= cap) return std::exp(w);
        return std::exp(cap) * (1.0 + (w - cap));
    }

    /// d theta / d w, positive and bounded by exp(cap).
    double slope(double w) const {
        if (w <= cap) return std::exp(w);
        return std::exp(cap);
    }

    /// Convex potential 1 + integral_0^w value(s) ds; its derivative is
    /// value() and potential(w) >= value(w) for all w.
    double potential(double w) const {
        if (w <= cap) return std::exp(w);
        const double ec = std::exp(cap);
        const double r = w - cap;
        return ec + ec * r + 0.5 * ec * r * r;
    }

    /// Inverse map w(theta); requires theta > 0.
    double inverse(double theta) const {
        if (!(theta > 0.0))
            throw std::domain_error("ExpTemperature::inverse: theta must be positive");
        const double ec = std::exp(cap);
        if (theta <= ec) return std::log(theta);
        return cap + (theta - ec) / ec;
    }
};

}  // namespace cryoflow
