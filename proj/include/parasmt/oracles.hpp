#pragma once
/// \file oracles.hpp
/// Reference values computed from the phantom itself by area quadrature. They share no code
/// path with the boundary data and serve as independent checks of the data-driven pipeline.

#include "expansion.hpp"

namespace parasmt {

/// Polar quadrature nodes over the disk of a bump: (point, weight * f(point))
struct DiskNodes {
    std::vector<Point> points;
    std::vector<double> weights;
};

inline DiskNodes bump_disk_nodes(const Bump& b, int n_radial = 48, int n_angular = 96) {
    DiskNodes out;
    const auto& rule = gauss_legendre(n_radial);
    for (int i = 0; i < n_radial; ++i) {
        double rho = 0.5 * b.radius * (1 + rule.nodes[i]);
        double wr = 0.5 * b.radius * rule.weights[i] * rho;
        for (int j = 0; j < n_angular; ++j) {
            double th = 2 * std::numbers::pi * j / n_angular;
            Point y{b.center.x + rho * std::cos(th), b.center.y + rho * std::sin(th)};
            out.points.push_back(y);
            out.weights.push_back(wr * 2 * std::numbers::pi / n_angular * b(y));
        }
    }
    return out;
}

inline DiskNodes phantom_nodes(const Phantom& ph, int n_radial = 48, int n_angular = 96) {
    DiskNodes all;
    for (const auto& b : ph.bumps()) {
        auto d = bump_disk_nodes(b, n_radial, n_angular);
        all.points.insert(all.points.end(), d.points.begin(), d.points.end());
        all.weights.insert(all.weights.end(), d.weights.begin(), d.weights.end());
    }
    return all;
}

/// Psi(p, k) as the area integral of f(y) K0(k |x(p) - y|)
inline double psi_area(const Phantom& ph, const ParabolicPoint& p, double k, int n_radial = 48, int n_angular = 96) {
    Point x = to_cartesian(p);
    auto nodes = phantom_nodes(ph, n_radial, n_angular);
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < nodes.points.size(); ++i) s += nodes.weights[i] * bessel_k0(k * distance(x, nodes.points[i]));
    return s.value();
}

/// Normalized Hermite coefficients b_m(k), m = 0..m_max, from the phantom:
///     b_m = h_m(sqrt(k) eta0) * 2 pi * integral of f(y) e^{-k y1} phi_m(sqrt(k) xi') tau_m(sqrt(k) eta') dy
/// with (xi', eta') the parabolic coordinates of y.
inline std::vector<double> phantom_coefficients(const Phantom& ph, double k, int m_max, int n_radial = 48,
                                                int n_angular = 96) {
    auto nodes = phantom_nodes(ph, n_radial, n_angular);
    double sk = std::sqrt(k);
    std::vector<CompensatedSum<double>> acc(static_cast<std::size_t>(m_max) + 1);
    for (std::size_t i = 0; i < nodes.points.size(); ++i) {
        if (nodes.weights[i] == 0) continue;
        auto q = from_cartesian(nodes.points[i]);
        HermiteFunctionSequence<double> phi(sk * q.xi);
        RotatedHermiteSequence<double> tau(sk * q.eta);
        double base = -k * nodes.points[i].x + k * q.xi * q.xi / 2;  // cancels the scale of phi_0
        for (int m = 0; m <= m_max; ++m) {
            if (m > 0) {
                phi.next();
                tau.next();
            }
            double scale = phi.log_scale() + tau.log_scale() + base;
            acc[m] += nodes.weights[i] * phi.mantissa() * tau.mantissa() * std::exp(scale);
        }
    }
    HermiteNegTable h(m_max, sk * ph.eta0());
    std::vector<double> b(acc.size());
    for (int m = 0; m <= m_max; ++m) b[m] = 2 * std::numbers::pi * h.normalized(m) * acc[m].value();
    return b;
}

}  // namespace parasmt
