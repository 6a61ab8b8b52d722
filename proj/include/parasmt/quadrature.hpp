#pragma once
/// \file quadrature.hpp
/// Gauss rules and natural cubic splines.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace parasmt {

/// nodes and weights of a quadrature rule
struct QuadratureRule {
    std::vector<double> nodes, weights;
};

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on the Legendre recurrence
inline QuadratureRule make_gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1) * z * p1 - j * p2) / (j + 1);
            }
            dp = n * (z * p0 - p1) / (z * z - 1);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // refresh the derivative at the converged node
        double p0 = 1, p1 = 0;
        for (int j = 0; j < n; ++j) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1) * z * p1 - j * p2) / (j + 1);
        }
        dp = n * (z * p0 - p1) / (z * z - 1);
        double w = 2 / ((1 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0;
    return rule;
}

/// cached Gauss-Legendre rule; safe to call from several threads
inline const QuadratureRule& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(make_gauss_legendre(n));
    return *slot;
}

/// Gauss-Hermite rule for the weight e^{-x^2} on the real line
inline QuadratureRule make_gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    double z = 0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0) z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -1.0 / 6);
        else if (i == 1) z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2) z = 1.86 * z - 0.86 * rule.nodes[0];
        else if (i == 3) z = 1.91 * z - 0.91 * rule.nodes[1];
        else z = 2 * z - rule.nodes[i - 2];
        double pp = 0;
        for (int it = 0; it < 200; ++it) {
            double p1 = pim4, p2 = 0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) {
                double q1 = pim4, q2 = 0;
                for (int j = 0; j < n; ++j) {
                    double q3 = q2;
                    q2 = q1;
                    q1 = z * std::sqrt(2.0 / (j + 1)) * q2 - std::sqrt(double(j) / (j + 1)) * q3;
                }
                pp = std::sqrt(2.0 * n) * q2;
                break;
            }
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2 / (pp * pp);
    }
    return rule;
}

/// Integral of f over [a, b] with an n-point Gauss-Legendre rule
template<typename F>
double integrate_gauss(F&& f, double a, double b, int n) {
    const auto& rule = gauss_legendre(n);
    double half = 0.5 * (b - a), mid = 0.5 * (a + b), sum = 0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

/// Natural cubic spline through (x_i, y_i). On [x_i, x_{i+1}] with t = x - x_i the
/// interpolant is c0[i] + c1[i] t + c2[i] t^2 + c3[i] t^3.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, const std::vector<double>& y) : x_(std::move(x)) {
        std::size_t n = x_.size();
        if (n < 2 || y.size() != n) throw std::invalid_argument("CubicSpline: need matching arrays of size >= 2");
        std::vector<double> h(n - 1), m(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            if (!(h[i] > 0)) throw std::invalid_argument("CubicSpline: abscissae must increase");
        }
        if (n > 2) {
            // tridiagonal system for the second derivatives, natural end conditions
            std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                diag[i - 1] = 2 * (h[i - 1] + h[i]);
                upper[i - 1] = h[i];
                rhs[i - 1] = 6 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
            }
            for (std::size_t i = 1; i < n - 2; ++i) {
                double w = h[i] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[n - 2] = rhs[n - 3] / diag[n - 3];
            for (std::size_t i = n - 3; i >= 1; --i) m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
        }
        c0_.resize(n - 1);
        c1_.resize(n - 1);
        c2_.resize(n - 1);
        c3_.resize(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            c0_[i] = y[i];
            c1_[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (2 * m[i] + m[i + 1]) / 6;
            c2_[i] = m[i] / 2;
            c3_[i] = (m[i + 1] - m[i]) / (6 * h[i]);
        }
    }
    std::size_t intervals() const { return c0_.size(); }
    const std::vector<double>& knots() const { return x_; }
    double c0(std::size_t i) const { return c0_[i]; }
    double c1(std::size_t i) const { return c1_[i]; }
    double c2(std::size_t i) const { return c2_[i]; }
    double c3(std::size_t i) const { return c3_[i]; }
    double operator()(double x) const {
        std::size_t i = locate(x);
        double t = x - x_[i];
        return c0_[i] + t * (c1_[i] + t * (c2_[i] + t * c3_[i]));
    }
private:
    std::size_t locate(double x) const {
        if (x <= x_.front()) return 0;
        if (x >= x_.back()) return x_.size() - 2;
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= x ? lo : hi) = mid;
        }
        return lo;
    }
    std::vector<double> x_, c0_, c1_, c2_, c3_;
};

}  // namespace parasmt
