#pragma once
/// \file expansion.hpp
/// Parabolic-coordinate expansion of K0(k rho), the data-side K0 integrals, the Hermite
/// coefficients of the boundary data and the exterior field
///     Psi(xi, eta, k) = integral over r of K0(k r) (Rf)(x(xi, eta), r).
///
/// Everything is written with orthonormal Hermite functions phi_n and the normalized
/// negative-order functions h_n(x) = sqrt(2^n n!) e^{-x^2/2} H_{-n-1}(x):
///     K0(k rho) = 2 pi e^{b'^2/2} sum_n phi_n(a) phi_n(a') h_n(b) tau_n(b'),
/// with a = sqrt(k) xi, b = sqrt(k) eta for the outer point and primes for the inner one.

#include "core.hpp"
#include "forward.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace parasmt {

/// Outcome of a K0 series summation
template<typename Real>
struct K0SeriesResult {
    Real value = 0;
    int terms = 0;          ///< index of the last term included
    double kappa = 0;       ///< sum of |terms| / |sum|
    bool converged = false; ///< stopping rule met
    double last_ratio = 0;  ///< |last term| / |sum|
    int digits = std::numeric_limits<Real>::digits10;
};

namespace detail {

/// number of terms after which e^{-sqrt(2n) (b - b')} drops below e^{-budget}
inline long k0_term_estimate(double b, double bp, double budget) {
    double gap = std::max(b - bp, 1e-3);
    double root = budget / gap;
    return static_cast<long>(root * root / 2) + 64;
}

/// log of the product of mantissa/log-scale pairs, recomputed only when a scale moved
template<typename Real>
class ScaleCache {
public:
    const Real& factor(const Real& log_scale) {
        using std::exp;
        if (!valid_ || log_scale != last_) {
            last_ = log_scale;
            factor_ = exp(log_scale);
            valid_ = true;
        }
        return factor_;
    }
private:
    bool valid_ = false;
    Real last_ = 0, factor_ = 0;
};

}  // namespace detail

/// Sum the K0 series for outer point p and inner point q (q.eta <= p.eta).
/// With tol > 0 the summation stops once 5 consecutive terms are each below tol*|sum|
/// (at most n_max + 1 terms); with tol <= 0 exactly the terms 0..n_max are summed.
template<typename Real>
K0SeriesResult<Real> k0_series_sum(const ParabolicPoint& p, const ParabolicPoint& q, double k, long n_max, double tol) {
    using std::abs;
    using std::sqrt;
    if (!(k > 0)) throw std::domain_error("k0_series: k must be positive");
    if (q.eta > p.eta) throw std::domain_error("k0_series: requires q.eta <= p.eta");
    if (p.xi == q.xi && p.eta == q.eta) throw std::domain_error("k0_series: coincident points");
    if (n_max < 0) throw std::out_of_range("k0_series: negative term count");
    const Real sk = sqrt(Real(k));
    const Real a = sk * Real(p.xi), ap = sk * Real(q.xi), b = sk * Real(p.eta), bp = sk * Real(q.eta);
    const Real two_pi = 2 * boost::math::constants::pi<Real>();

    long table = n_max;
    if (tol > 0) {
        double budget = -std::log(tol) + 25 + 2 * std::log(1 + std::abs(static_cast<double>(a - ap)));
        table = std::min(n_max, detail::k0_term_estimate(static_cast<double>(b), static_cast<double>(bp), budget));
    }
    while (true) {
        auto ratios = hermite_neg_ratios<Real>(static_cast<int>(table), b);
        HermiteFunctionSequence<Real> fa(a), fap(ap);
        RotatedHermiteSequence<Real> tau(bp);
        Real hm = ratios.h0, hscale = ratios.h0_log_scale;
        detail::ScaleCache<Real> cache;
        CompensatedSum<Real> sum;
        Real abs_sum = 0, term = 0;
        int small = 0;
        K0SeriesResult<Real> res;
        for (long n = 0; n <= table; ++n) {
            if (n > 0) {
                fa.next();
                fap.next();
                tau.next();
                hm *= ratios.ratio[static_cast<std::size_t>(n)];
                if (abs(hm) < Real(1e-200)) {
                    hm *= Real(1e200);
                    hscale -= std::log(1e200);
                }
            }
            Real scale = fa.log_scale() + fap.log_scale() + tau.log_scale() + hscale + bp * bp / 2;
            term = two_pi * fa.mantissa() * fap.mantissa() * hm * tau.mantissa() * cache.factor(scale);
            sum += term;
            abs_sum += abs(term);
            res.terms = static_cast<int>(n);
            if (tol > 0) {
                Real s = abs(sum.value());
                if (abs(term) <= Real(tol) * s) {
                    if (++small >= 5) {
                        res.converged = true;
                        break;
                    }
                } else {
                    small = 0;
                }
            }
        }
        res.value = sum.value();
        double sv = static_cast<double>(abs(res.value));
        res.kappa = sv > 0 ? static_cast<double>(abs_sum) / sv : std::numeric_limits<double>::infinity();
        res.last_ratio = sv > 0 ? static_cast<double>(abs(term)) / sv : std::numeric_limits<double>::infinity();
        if (tol <= 0) res.converged = true;
        if (res.converged || table >= n_max) return res;
        table = std::min(n_max, 2 * table);
    }
}

/// Truncated K0 series with terms 0..N, in double precision
inline double k0_series(const ParabolicPoint& p, const ParabolicPoint& q, double k, int N) {
    return k0_series_sum<double>(p, q, k, N, 0.0).value;
}

/// Integrates boundary rows against K0(k r). Each row window is replaced by a natural
/// cubic spline (padded with zeros on both sides); the integral of every spline piece
/// against K0 is assembled from moment weights shared by all rows.
class DataK0Integrator {
public:
    explicit DataK0Integrator(const BoundaryData& data, int pad = 12, int nodes = 6)
        : r_(data.r_grid), nodes_(nodes) {
        if (r_.size() < 4) throw std::invalid_argument("DataK0Integrator: r-grid needs at least 4 points");
        rows_.resize(data.rows.size());
        lo_ = r_.size();
        hi_ = 0;
        for (std::size_t i = 0; i < data.rows.size(); ++i) {
            const auto& row = data.rows[i];
            if (row.values.empty()) continue;
            std::size_t a = row.first >= static_cast<std::size_t>(pad) ? row.first - pad : 0;
            std::size_t b = std::min(r_.size() - 1, row.first + row.values.size() - 1 + pad);
            std::vector<double> x(r_.begin() + a, r_.begin() + b + 1), y(b - a + 1, 0.0);
            for (std::size_t q = 0; q < row.values.size(); ++q) y[row.first + q - a] = row.values[q];
            CubicSpline sp(x, y);
            auto& out = rows_[i];
            out.first = a;
            out.coef.resize(4 * sp.intervals());
            for (std::size_t j = 0; j < sp.intervals(); ++j) {
                out.coef[4 * j] = sp.c0(j);
                out.coef[4 * j + 1] = sp.c1(j);
                out.coef[4 * j + 2] = sp.c2(j);
                out.coef[4 * j + 3] = sp.c3(j);
            }
            lo_ = std::min(lo_, a);
            hi_ = std::max(hi_, b);
        }
        if (lo_ > hi_) lo_ = hi_ = 0;
    }

    std::size_t rows() const { return rows_.size(); }

    /// integrals for all rows at frequency k
    std::vector<double> integrate_all(double k) const { return integrate_all(k, nodes_); }

    std::vector<double> integrate_all(double k, int nodes) const {
        if (!(k > 0)) throw std::domain_error("data_k0_integral: k must be positive");
        std::vector<double> w = weights(k, nodes);
        std::vector<double> out(rows_.size(), 0.0);
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& row = rows_[i];
            CompensatedSum<double> s;
            std::size_t nint = row.coef.size() / 4;
            for (std::size_t j = 0; j < nint; ++j) {
                const double* c = &row.coef[4 * j];
                const double* wj = &w[4 * (row.first + j - lo_)];
                s += c[0] * wj[0] + c[1] * wj[1] + c[2] * wj[2] + c[3] * wj[3];
            }
            out[i] = s.value();
        }
        return out;
    }

private:
    /// moments int_0^h t^a K0(k (r_j + t)) dt, a = 0..3, for intervals j in [lo, hi)
    std::vector<double> weights(double k, int nodes) const {
        const auto& rule = gauss_legendre(nodes);
        std::size_t n = hi_ > lo_ ? hi_ - lo_ : 0;
        std::vector<double> w(4 * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double r0 = r_[lo_ + j], h = r_[lo_ + j + 1] - r0;
            double m0 = 0, m1 = 0, m2 = 0, m3 = 0;
            for (int q = 0; q < nodes; ++q) {
                double t = 0.5 * h * (1 + rule.nodes[q]);
                double f = 0.5 * h * rule.weights[q] * bessel_k0(k * (r0 + t));
                m0 += f;
                m1 += f * t;
                m2 += f * t * t;
                m3 += f * t * t * t;
            }
            w[4 * j] = m0;
            w[4 * j + 1] = m1;
            w[4 * j + 2] = m2;
            w[4 * j + 3] = m3;
        }
        return w;
    }

    struct Row {
        std::size_t first = 0;
        std::vector<double> coef;
    };
    std::vector<double> r_;
    std::vector<Row> rows_;
    std::size_t lo_ = 0, hi_ = 0;
    int nodes_;
};

/// integral over r of F(xi_i, r) K0(k r) for a single row
inline double data_k0_integral(const BoundaryData& data, std::size_t xi_index, double k) {
    if (xi_index >= data.rows.size()) throw std::out_of_range("data_k0_integral: row index");
    BoundaryData one{data.eta0, {data.xi_grid[xi_index]}, data.r_grid, {data.rows[xi_index]}};
    return DataK0Integrator(one).integrate_all(k)[0];
}

/// Relative interpolation error estimate for the row integrals: the same integrals on every
/// other radius (spacing 2h) differ from the full-grid ones by about 15 times the error.
/// A positive scale replaces the peak of the integrals as denominator.
inline double data_k0_resolution_estimate(const BoundaryData& data, double k, double scale = 0) {
    BoundaryData coarse{data.eta0, data.xi_grid, {}, std::vector<BoundaryRow>(data.rows.size())};
    for (std::size_t j = 0; j < data.r_grid.size(); j += 2) coarse.r_grid.push_back(data.r_grid[j]);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& row = data.rows[i];
        if (row.values.empty()) continue;
        auto& c = coarse.rows[i];
        std::size_t first = (row.first + 1) / 2 * 2;
        if (first > row.first) first -= 2;
        c.first = first / 2;
        for (std::size_t j = first; j < row.first + row.values.size() + 2; j += 2)
            c.values.push_back(data.value(i, std::min(j, data.r_grid.size() - 1)));
    }
    auto fine = DataK0Integrator(data).integrate_all(k);
    auto crs = DataK0Integrator(coarse).integrate_all(k);
    double peak = 0, err = 0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        peak = std::max(peak, std::abs(fine[i]));
        err = std::max(err, std::abs(fine[i] - crs[i]) / 15);
    }
    if (scale > 0) peak = scale;
    return peak > 0 ? err / peak : 0;
}

/// Largest |row integral| at frequency k
inline double data_k0_peak(const BoundaryData& data, double k) {
    double peak = 0;
    for (double v : DataK0Integrator(data).integrate_all(k)) peak = std::max(peak, std::abs(v));
    return peak;
}

/// Hermite coefficients of the boundary data,
///     b_m(k) = sqrt(k) * integral over xi of D(xi, k) phi_m(sqrt(k) xi),
/// with D(xi, k) the data-side K0 integral. The unnormalized coefficient is
///     Lambda_m(k) = b_m(k) / (pi^{1/4} h_m(sqrt(k) eta0)).
class CoefficientTable {
public:
    CoefficientTable() = default;
    CoefficientTable(double eta0, std::vector<double> k_grid, std::vector<std::vector<double>> b)
        : eta0_(eta0), k_(std::move(k_grid)), b_(std::move(b)) {
        if (b_.size() != k_.size()) throw std::invalid_argument("CoefficientTable: one coefficient list per k");
    }
    double eta0() const { return eta0_; }
    const std::vector<double>& k_grid() const { return k_; }
    /// highest order stored at k index j
    int m_max(std::size_t j) const { return static_cast<int>(b_.at(j).size()) - 1; }
    int m_max() const {
        int m = -1;
        for (const auto& v : b_) m = std::max(m, static_cast<int>(v.size()) - 1);
        return m;
    }
    const std::vector<double>& normalized(std::size_t j) const { return b_.at(j); }
    std::size_t k_index(double k) const {
        auto it = std::find(k_.begin(), k_.end(), k);
        if (it == k_.end()) throw std::out_of_range("CoefficientTable: k not on the grid");
        return static_cast<std::size_t>(it - k_.begin());
    }
    /// Lambda_m(k_j), recombined in log space
    double lambda(int m, std::size_t j) const {
        const auto& b = b_.at(j);
        if (m < 0 || m >= static_cast<int>(b.size())) throw std::out_of_range("CoefficientTable: order not stored");
        if (b[m] == 0) return 0;
        double x = std::sqrt(k_[j]) * eta0_;
        HermiteNegTable h(m, x);
        double log_h = h.log_normalized(m);
        if (!(log_h + x * x / 2 > std::log(1e-300)))
            throw std::range_error("lambda: h_m(sqrt(k) eta0) below the floor in scaled form");
        double log_mag = std::log(std::abs(b[m])) - 0.25 * std::log(std::numbers::pi) - log_h;
        if (log_mag > std::log(std::numeric_limits<double>::max()))
            throw std::range_error("lambda: value overflows at m=" + std::to_string(m) + ", k=" + std::to_string(k_[j]));
        return std::copysign(std::exp(log_mag), b[m]);
    }
private:
    double eta0_ = 1;
    std::vector<double> k_;
    std::vector<std::vector<double>> b_;
};

/// Options for coefficient extraction
struct CoefficientOptions {
    int m_max = 20000;
    double endpoint_threshold = 1e-12;  ///< |D| at the xi-grid ends relative to max |D|
    double resolution_fraction = 0.75;  ///< phi_m wavenumber allowed, as a fraction of pi / dxi
};

/// Certificates recorded while extracting coefficients
struct CoefficientReport {
    double endpoint_ratio = 0;        ///< worst endpoint |D| / max |D| over k
    std::vector<int> m_available;     ///< per k, highest resolvable order kept
};

/// Highest order whose Hermite function is resolved on a xi-grid of spacing dxi at frequency k
inline int resolvable_order(double k, double dxi, double fraction) {
    double kmax = fraction * std::numbers::pi / dxi;
    double m = (kmax * kmax / k - 1) / 2;
    if (m < 0) return 0;
    return static_cast<int>(std::min(m, 1e8));
}

/// Trapezoid weights of a uniform grid; throws if the grid is not uniform
inline double uniform_step(const std::vector<double>& grid, const char* what) {
    if (grid.size() < 2) throw std::invalid_argument(std::string(what) + ": grid needs at least 2 points");
    double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * h)
            throw std::invalid_argument(std::string(what) + ": grid must be uniform");
    return h;
}

/// Hermite coefficients at one frequency from precomputed row integrals D
inline std::vector<double> hermite_coefficients(const std::vector<double>& xi_grid, const std::vector<double>& D,
                                                double k, int m_top) {
    double h = uniform_step(xi_grid, "hermite_coefficients");
    double sk = std::sqrt(k);
    std::vector<CompensatedSum<double>> acc(static_cast<std::size_t>(m_top) + 1);
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        if (D[i] == 0) continue;
        double w = (i == 0 || i + 1 == xi_grid.size() ? 0.5 : 1.0) * h * sk * D[i];
        HermiteFunctionSequence<double> s(sk * xi_grid[i]);
        detail::ScaleCache<double> cache;
        for (int m = 0; m <= m_top; ++m) {
            if (m > 0) s.next();
            acc[m] += w * s.mantissa() * cache.factor(s.log_scale());
        }
    }
    std::vector<double> b(acc.size());
    for (std::size_t m = 0; m < acc.size(); ++m) b[m] = acc[m].value();
    return b;
}

/// Coefficient table for every k of the grid
inline CoefficientTable build_coefficient_table(const BoundaryData& data, const std::vector<double>& k_grid,
                                                const CoefficientOptions& opt = {}, CoefficientReport* report = nullptr) {
    double dxi = uniform_step(data.xi_grid, "build_coefficient_table");
    DataK0Integrator integ(data);
    std::vector<std::vector<double>> b(k_grid.size());
    std::vector<double> endpoint(k_grid.size(), 0.0);
    std::vector<int> avail(k_grid.size(), 0);
    parallel_for(k_grid.size(), [&](std::size_t j) {
        double k = k_grid[j];
        auto D = integ.integrate_all(k);
        double peak = 0;
        for (double v : D) peak = std::max(peak, std::abs(v));
        endpoint[j] = peak > 0 ? std::max(std::abs(D.front()), std::abs(D.back())) / peak : 0;
        avail[j] = std::min(opt.m_max, resolvable_order(k, dxi, opt.resolution_fraction));
        b[j] = hermite_coefficients(data.xi_grid, D, k, avail[j]);
    });
    double worst = *std::max_element(endpoint.begin(), endpoint.end());
    if (report) {
        report->endpoint_ratio = worst;
        report->m_available = avail;
    }
    if (worst > opt.endpoint_threshold) throw CertificateError("coefficients: xi-domain truncation", worst, opt.endpoint_threshold);
    return CoefficientTable(data.eta0, k_grid, std::move(b));
}

/// Lambda_m(k) for a single order and frequency
inline double lambda_m(const BoundaryData& data, int m, double k, const CoefficientOptions& opt = {}) {
    CoefficientOptions o = opt;
    o.m_max = m;
    auto table = build_coefficient_table(data, {k}, o);
    if (table.m_max(0) < m)
        throw GridResolutionError("lambda_m: xi-grid too coarse for order " + std::to_string(m), table.m_max(0));
    return table.lambda(m, 0);
}

/// Psi value and the number of terms used
struct PsiValue {
    double psi = 0;
    int m_used = 0;
    double last_ratio = 0;
};

namespace detail {

/// Psi at one point from coefficients b and the ratio table of h_m(sqrt(k) eta0)
inline PsiValue psi_series(const std::vector<double>& b, const HermiteNegRatios<double>& ref, double k,
                           const ParabolicPoint& p, double tol, double floor = 0) {
    int top = static_cast<int>(b.size()) - 1;
    double sk = std::sqrt(k);
    auto mine = hermite_neg_ratios<double>(top, sk * p.eta);
    double q = mine.h0 / ref.h0 * std::exp(mine.h0_log_scale - ref.h0_log_scale);
    HermiteFunctionSequence<double> phi(sk * p.xi);
    ScaleCache<double> cache;
    CompensatedSum<double> sum;
    int small = 0;
    double term = 0;
    for (int m = 0; m <= top; ++m) {
        if (m > 0) {
            phi.next();
            q *= mine.ratio[m] / ref.ratio[m];
        }
        term = b[m] * phi.mantissa() * cache.factor(phi.log_scale()) * q;
        sum += term;
        double s = std::abs(sum.value());
        if (std::abs(term) <= tol * std::max(s, floor)) {
            if (++small >= 5) return {sum.value(), m, s > 0 ? std::abs(term) / s : 0};
        } else {
            small = 0;
        }
    }
    double s = std::abs(sum.value());
    double ratio = s > 0 ? std::abs(term) / s : std::numeric_limits<double>::infinity();
    throw TruncationError("build_psi: stopping rule unmet at m_max=" + std::to_string(top) + " (k=" +
                              std::to_string(k) + ", xi=" + std::to_string(p.xi) + ", eta=" + std::to_string(p.eta) + ")",
                          ratio);
}

}  // namespace detail

/// Psi(p, k_j) from the coefficient table. Terms are compared against tol * max(|sum|, floor).
inline PsiValue build_psi(const CoefficientTable& table, const ParabolicPoint& p, std::size_t k_index, double tol = 1e-10,
                          double floor = 0) {
    if (p.eta < table.eta0()) throw std::domain_error("build_psi: point must satisfy eta >= eta0");
    double k = table.k_grid().at(k_index);
    const auto& b = table.normalized(k_index);
    auto ref = hermite_neg_ratios<double>(static_cast<int>(b.size()) - 1, std::sqrt(k) * table.eta0());
    return detail::psi_series(b, ref, k, p, tol, floor);
}

/// Psi on a set of exterior points and the table's k-grid
struct PsiField {
    std::vector<ParabolicPoint> points;
    std::vector<double> k_grid;
    Matrix<double> values;  ///< [point][k]
    Matrix<int> m_used;
};

inline PsiField build_psi_field(const CoefficientTable& table, const std::vector<ParabolicPoint>& points, double tol = 1e-10,
                                double floor = 0) {
    for (const auto& p : points)
        if (p.eta < table.eta0()) throw std::domain_error("build_psi_field: point must satisfy eta >= eta0");
    PsiField f{points, table.k_grid(), Matrix<double>(points.size(), table.k_grid().size(), 0.0),
               Matrix<int>(points.size(), table.k_grid().size(), 0)};
    parallel_for(table.k_grid().size(), [&](std::size_t j) {
        double k = table.k_grid()[j];
        const auto& b = table.normalized(j);
        auto ref = hermite_neg_ratios<double>(static_cast<int>(b.size()) - 1, std::sqrt(k) * table.eta0());
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto v = detail::psi_series(b, ref, k, points[i], tol, floor);
            f.values(i, j) = v.psi;
            f.m_used(i, j) = v.m_used;
        }
    });
    return f;
}

/// integral of K0(k r) times the spherical mean of one bump around center
inline double bump_k0_integral(const Bump& bump, const Point& center, double k, double rtol = 1e-9) {
    double d = distance(center, bump.center), R = bump.radius;
    std::vector<double> br{std::max(0.0, d - R)};
    if (R - d > 0) br.push_back(R - d);
    br.push_back(d + R);
    std::sort(br.begin(), br.end());
    double total = 0;
    for (std::size_t s = 0; s + 1 < br.size(); ++s) {
        double a = br[s], b = br[s + 1];
        if (b <= a) continue;
        // r = a + (b - a)(1 - cos(pi tau))/2 turns square-root end behavior into odd powers of tau
        auto piece = [&](int n) {
            const auto& rule = gauss_legendre(n);
            double acc = 0;
            for (int i = 0; i < n; ++i) {
                double tau = 0.5 * (1 + rule.nodes[i]);
                double r = a + 0.5 * (b - a) * (1 - std::cos(std::numbers::pi * tau));
                if (r <= 0) continue;
                double jac = 0.5 * (b - a) * std::numbers::pi * std::sin(std::numbers::pi * tau);
                acc += 0.5 * rule.weights[i] * jac * bessel_k0(k * r) * bump_spherical_mean(bump, center, r);
            }
            return acc;
        };
        double prev = piece(24), cur = 0;
        int n = 48;
        for (; n <= 1536; n *= 2) {
            cur = piece(n);
            if (std::abs(cur - prev) <= rtol * std::abs(cur) || cur == prev) break;
            prev = cur;
        }
        if (n > 1536) throw QuadratureError("psi_direct: quadrature did not converge", std::abs(cur - prev));
        total += cur;
    }
    return total;
}

/// Psi computed from the phantom: integral over r of K0(k r) (Rf)(x(p), r)
inline double psi_direct(const Phantom& ph, const ParabolicPoint& p, double k, double rtol = 1e-9) {
    if (!(k > 0)) throw std::domain_error("psi_direct: k must be positive");
    Point c = to_cartesian(p);
    double sum = 0;
    for (const auto& b : ph.bumps()) sum += bump_k0_integral(b, c, k, rtol);
    return sum;
}

}  // namespace parasmt
