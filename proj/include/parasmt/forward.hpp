#pragma once
/// \file forward.hpp
/// Polynomial bump phantoms supported inside a parabola and their spherical mean transform
/// (Rf)(x, r) = r * integral over theta of f(x + r (cos theta, sin theta)).

#include "core.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace parasmt {

/// amplitude * (1 - |x - c|^2 / R^2)^p inside the disk |x - c| < R
struct Bump {
    Point center;
    double radius = 1;
    double amplitude = 1;
    int smoothness = 2;

    double operator()(const Point& x) const {
        double dx = x.x - center.x, dy = x.y - center.y;
        double q = 1 - (dx * dx + dy * dy) / (radius * radius);
        if (q <= 0) return 0;
        return amplitude * std::pow(q, smoothness);
    }
    /// integral of the bump over the plane
    double mass() const { return amplitude * std::numbers::pi * radius * radius / (smoothness + 1); }
};

/// Maximum of eta over the closed disk of a bump (attained on its boundary circle)
inline double max_eta_on_disk(const Point& c, double R) {
    auto eta_at = [&](double th) { return from_cartesian({c.x + R * std::cos(th), c.y + R * std::sin(th)}).eta; };
    const int n = 2048;
    int best = 0;
    double best_val = -1;
    for (int i = 0; i < n; ++i) {
        double v = eta_at(2 * std::numbers::pi * i / n);
        if (v > best_val) { best_val = v; best = i; }
    }
    // golden-section refinement inside the bracketing cells
    double a = 2 * std::numbers::pi * (best - 1) / n, b = 2 * std::numbers::pi * (best + 1) / n;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = b - g * (b - a), x2 = a + g * (b - a), f1 = eta_at(x1), f2 = eta_at(x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 > f2) { b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = eta_at(x1); }
        else { a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = eta_at(x2); }
    }
    return std::max({best_val, f1, f2});
}

/// Finite sum of bumps, every disk strictly inside the parabola eta = eta0 by a margin
class Phantom {
public:
    Phantom() = default;
    /// margin <= 0 selects the default 0.05 * eta0
    Phantom(std::vector<Bump> bumps, double eta0, double margin = -1)
        : bumps_(std::move(bumps)), eta0_(eta0), margin_(margin > 0 ? margin : 0.05 * eta0) {
        if (!(eta0 > 0) || !std::isfinite(eta0)) throw std::invalid_argument("Phantom: eta0 must be positive");
        if (!(margin_ < eta0_)) throw std::invalid_argument("Phantom: margin must be smaller than eta0");
        for (std::size_t i = 0; i < bumps_.size(); ++i) {
            const auto& b = bumps_[i];
            std::string tag = "Phantom: bump " + std::to_string(i) + ": ";
            if (!(b.radius > 0) || !std::isfinite(b.radius)) throw std::invalid_argument(tag + "radius must be positive");
            if (!std::isfinite(b.amplitude) || !std::isfinite(b.center.x) || !std::isfinite(b.center.y))
                throw std::invalid_argument(tag + "non-finite parameter");
            if (b.smoothness < 2) throw std::invalid_argument(tag + "smoothness must be at least 2");
            double emax = max_eta_on_disk(b.center, b.radius);
            if (!(emax < eta0_ - margin_))
                throw std::invalid_argument(tag + "disk reaches eta = " + std::to_string(emax) +
                                            ", not below eta0 - margin = " + std::to_string(eta0_ - margin_));
        }
    }
    const std::vector<Bump>& bumps() const { return bumps_; }
    double eta0() const { return eta0_; }
    double margin() const { return margin_; }
    /// integral of f over the plane
    double mass() const {
        double m = 0;
        for (const auto& b : bumps_) m += b.mass();
        return m;
    }
private:
    std::vector<Bump> bumps_;
    double eta0_ = 1, margin_ = 0.05;
};

inline double eval_phantom(const Phantom& ph, const Point& x) {
    double v = 0;
    for (const auto& b : ph.bumps()) v += b(x);
    return v;
}

/// Interval outside of which (Rf)(center, .) vanishes
inline std::pair<double, double> support_bounds(const Phantom& ph, const Point& center) {
    if (ph.bumps().empty()) return {0, 0};
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0;
    for (const auto& b : ph.bumps()) {
        double d = distance(center, b.center);
        rmin = std::min(rmin, std::max(0.0, d - b.radius));
        rmax = std::max(rmax, d + b.radius);
    }
    return {rmin, rmax};
}

enum class MeanMethod {
    ArcGauss,           ///< Gauss-Legendre on the exact arc inside each bump
    PeriodicTrapezoid,  ///< trapezoid over the full circle
};

struct MeanOptions {
    MeanMethod method = MeanMethod::ArcGauss;
    double rtol = 1e-10;
    int max_nodes = 1 << 20;
};

/// Spherical mean of a single bump. The circle point at angle beta from the far side
/// satisfies |x - c|^2 = (d - r)^2 + 4 d r sin^2(beta/2), which keeps the integrand free of
/// cancellation near the arc ends.
inline double bump_spherical_mean(const Bump& b, const Point& center, double r, const MeanOptions& opt = {}) {
    if (r <= 0) return 0;
    double d = distance(center, b.center), R = b.radius;
    double gap = R * R - (d - r) * (d - r);
    if (gap <= 0) return 0;
    double beta0 = std::numbers::pi;
    double fourdr = 4 * d * r;
    if (fourdr > 0 && gap < fourdr) beta0 = 2 * std::asin(std::sqrt(gap / fourdr));
    auto integrand = [&](double beta) {
        double s = std::sin(beta / 2);
        double q = (gap - fourdr * s * s) / (R * R);
        return q > 0 ? std::pow(q, b.smoothness) : 0.0;
    };
    double prev = integrate_gauss(integrand, 0, beta0, 8);
    for (int n = 16; n <= std::min(opt.max_nodes, 4096); n *= 2) {
        double cur = integrate_gauss(integrand, 0, beta0, n);
        if (std::abs(cur - prev) <= opt.rtol * std::abs(cur) || cur == prev) return 2 * r * b.amplitude * cur;
        prev = cur;
    }
    throw QuadratureError("bump_spherical_mean: Gauss-Legendre did not converge", std::abs(prev));
}

/// (Rf)(center, r)
inline double spherical_mean(const Phantom& ph, const Point& center, double r, const MeanOptions& opt = {}) {
    if (!(r >= 0)) throw std::domain_error("spherical_mean: negative radius");
    if (r == 0) return 0;
    if (opt.method == MeanMethod::ArcGauss) {
        double sum = 0;
        for (const auto& b : ph.bumps()) sum += bump_spherical_mean(b, center, r, opt);
        return sum;
    }
    auto trap = [&](int n) {
        CompensatedSum<double> s;
        for (int i = 0; i < n; ++i) {
            double th = -std::numbers::pi + 2 * std::numbers::pi * i / n;
            s += eval_phantom(ph, {center.x + r * std::cos(th), center.y + r * std::sin(th)});
        }
        return r * 2 * std::numbers::pi / n * s.value();
    };
    int n = 64;
    double prev = trap(n);
    while (n < opt.max_nodes) {
        n *= 2;
        double cur = trap(n);
        double diff = std::abs(cur - prev);
        if (diff <= opt.rtol * std::abs(cur) || (cur == 0 && prev == 0)) return cur;
        prev = cur;
        if (n >= opt.max_nodes) throw QuadratureError("spherical_mean: trapezoid did not converge", diff);
    }
    throw QuadratureError("spherical_mean: trapezoid did not converge", std::abs(prev));
}

/// Nonzero window of one data row: F[i][first + q] = values[q]
struct BoundaryRow {
    std::size_t first = 0;
    std::vector<double> values;
};

/// Samples F[i][j] = (Rf)(x(xi_i, eta0), r_j). Each row keeps only the window of radii
/// between its support bounds; cells outside it are exactly zero.
struct BoundaryData {
    double eta0 = 1;
    std::vector<double> xi_grid, r_grid;
    std::vector<BoundaryRow> rows;

    double value(std::size_t i, std::size_t j) const {
        const auto& row = rows.at(i);
        if (j < row.first || j >= row.first + row.values.size()) return 0;
        return row.values[j - row.first];
    }
    /// drop leading and trailing zeros of every row window
    void trim() {
        for (auto& row : rows) {
            std::size_t a = 0, b = row.values.size();
            while (a < b && row.values[a] == 0) ++a;
            while (b > a && row.values[b - 1] == 0) --b;
            if (a == b) { row.first = 0; row.values.clear(); continue; }
            row.values = std::vector<double>(row.values.begin() + a, row.values.begin() + b);
            row.first += a;
        }
    }
};

inline BoundaryData sample_boundary(const Phantom& ph, const Parabola& par, const std::vector<double>& xi_grid,
                                    const std::vector<double>& r_grid, const MeanOptions& opt = {}) {
    auto sorted = [](const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); };
    if (!sorted(xi_grid) || !sorted(r_grid)) throw std::invalid_argument("sample_boundary: grids must be sorted");
    for (double r : r_grid)
        if (!(r >= 0) || !std::isfinite(r)) throw std::invalid_argument("sample_boundary: radii must be finite and nonnegative");
    BoundaryData data{par.eta0, xi_grid, r_grid, std::vector<BoundaryRow>(xi_grid.size())};
    parallel_for(xi_grid.size(), [&](std::size_t i) {
        Point c = to_cartesian({xi_grid[i], par.eta0});
        auto [rmin, rmax] = support_bounds(ph, c);
        auto lo = std::lower_bound(r_grid.begin(), r_grid.end(), rmin);
        auto hi = std::upper_bound(r_grid.begin(), r_grid.end(), rmax);
        auto& row = data.rows[i];
        row.first = static_cast<std::size_t>(lo - r_grid.begin());
        row.values.assign(static_cast<std::size_t>(hi - lo), 0.0);
        for (std::size_t q = 0; q < row.values.size(); ++q) row.values[q] = spherical_mean(ph, c, r_grid[row.first + q], opt);
    });
    data.trim();
    return data;
}

}  // namespace parasmt
