#pragma once
/// \file geometry.hpp
/// Parabolic coordinate chart x = ((xi^2 - eta^2)/2, xi*eta), the parabola eta = eta0,
/// and its interior/exterior split.

#include <cmath>
#include <stdexcept>
#include <string>

namespace parasmt {

/// Cartesian point in the plane
struct Point {
    double x = 0, y = 0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Point given by parabolic coordinates (xi, eta), eta >= 0
struct ParabolicPoint {
    double xi = 0, eta = 0;
    ParabolicPoint() = default;
    ParabolicPoint(double xi_, double eta_) : xi(xi_), eta(eta_) {
        if (!(eta_ >= 0))
            throw std::domain_error("ParabolicPoint: eta must be nonnegative, got " + std::to_string(eta_));
    }
};

/// The parabola y^2 - 2 eta0^2 x - eta0^4 = 0
struct Parabola {
    double eta0 = 1;
    Parabola() = default;
    explicit Parabola(double eta0_) : eta0(eta0_) {
        if (!(eta0_ > 0) || !std::isfinite(eta0_))
            throw std::domain_error("Parabola: eta0 must be positive, got " + std::to_string(eta0_));
    }
    /// residual of the implicit equation at a Cartesian point
    double residual(const Point& p) const {
        double e2 = eta0 * eta0;
        return p.y * p.y - 2 * e2 * p.x - e2 * e2;
    }
};

inline Point to_cartesian(const ParabolicPoint& p) {
    return {0.5 * (p.xi - p.eta) * (p.xi + p.eta), p.xi * p.eta};
}

/// Inverse chart. On the ray y = 0, x > 0 the branch xi >= 0 is returned.
inline ParabolicPoint from_cartesian(const Point& p) {
    double r = std::hypot(p.x, p.y);
    // r - x and r + x, each evaluated without cancellation
    double rmx, rpx;
    if (p.x > 0) {
        rpx = r + p.x;
        rmx = p.y * p.y / rpx;
    } else if (p.x < 0) {
        rmx = r - p.x;
        rpx = p.y * p.y / rmx;
    } else {
        rmx = rpx = r;
    }
    double eta = std::sqrt(rmx);
    double xi = std::sqrt(rpx);
    if (p.y < 0) xi = -xi;
    return {xi, eta};
}

/// Euclidean distance between the Cartesian images
inline double rho(const ParabolicPoint& p, const ParabolicPoint& q) {
    return distance(to_cartesian(p), to_cartesian(q));
}

/// Area element of the chart, xi^2 + eta^2
inline double jacobian(const ParabolicPoint& p) { return p.xi * p.xi + p.eta * p.eta; }

/// True iff the point lies strictly inside the parabola (eta < eta0)
inline bool is_interior(const Point& x, const Parabola& par) { return from_cartesian(x).eta < par.eta0; }

}  // namespace parasmt
