#pragma once
/// \file mellin.hpp
/// Mellin transforms on a logarithmic grid, inverse Mellin contour integrals and recovery of
/// the spherical means from the exterior field Psi.
///
/// With y = e^u the transform (M F)(s) = integral of y^{s-1} F(y) dy becomes the integral of
/// e^{su} F(e^u) du, evaluated by the trapezoid rule on a uniform u-grid.

#include "core.hpp"
#include "specfun.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parasmt {

using complex = std::complex<double>;

/// F(k) = sum_j k^{2j} (alpha_j ln k + beta_j), used below the first grid point
struct LowKModel {
    std::vector<double> alpha, beta;

    double operator()(double k) const {
        double lk = std::log(k), p = 1, v = 0;
        for (std::size_t j = 0; j < alpha.size(); ++j, p *= k * k) v += p * (alpha[j] * lk + beta[j]);
        return v;
    }
    /// integral from 0 to K of k^{s-1} F(k) dk
    complex integral(double K, complex s) const {
        complex total = 0;
        double lK = std::log(K);
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            complex w = s + 2.0 * static_cast<double>(j);
            complex kw = std::exp(w * lK);
            total += kw * (alpha[j] * (lK / w - 1.0 / (w * w)) + beta[j] / w);
        }
        return total;
    }
    /// h * sum over j >= 1 of g(u0 - j h), g(u) = e^{su} F(e^u): the trapezoid rule continued below u0
    complex grid_tail(double u0, double h, complex s) const {
        complex total = 0;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            complex w = s + 2.0 * static_cast<double>(j);
            complex q = std::exp(-w * h);
            complex geo = q / (1.0 - q);
            total += std::exp(w * u0) * ((alpha[j] * u0 + beta[j]) * geo - alpha[j] * h * geo / (1.0 - q));
        }
        return h * total;
    }
};

/// Samples F(e^u) on the uniform grid u_i = u0 + i h, optionally continued below u0 by a model
struct LogGridFunction {
    double u0 = 0, h = 1;
    std::vector<double> values;
    std::optional<LowKModel> low;

    std::size_t size() const { return values.size(); }
    double u(std::size_t i) const { return u0 + h * static_cast<double>(i); }
    double y(std::size_t i) const { return std::exp(u(i)); }
    std::vector<double> u_grid() const {
        std::vector<double> g(size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = u(i);
        return g;
    }

    static LogGridFunction sample(const std::function<double(double)>& f, double u_min, double u_max, std::size_t n) {
        if (n < 2 || !(u_max > u_min)) throw std::invalid_argument("LogGridFunction: need n >= 2 and u_max > u_min");
        LogGridFunction g;
        g.u0 = u_min;
        g.h = (u_max - u_min) / static_cast<double>(n - 1);
        g.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) g.values[i] = f(std::exp(g.u(i)));
        return g;
    }
    /// samples on a log-spaced grid y_i
    static LogGridFunction from_log_grid(const std::vector<double>& y, std::vector<double> values) {
        if (y.size() < 2 || y.size() != values.size()) throw std::invalid_argument("LogGridFunction: grid/value size mismatch");
        LogGridFunction g;
        g.u0 = std::log(y.front());
        g.h = (std::log(y.back()) - g.u0) / static_cast<double>(y.size() - 1);
        for (std::size_t i = 0; i < y.size(); ++i)
            if (std::abs(std::log(y[i]) - g.u(i)) > 1e-9 * std::max(1.0, g.h * static_cast<double>(i)))
                throw std::invalid_argument("LogGridFunction: grid is not log-spaced");
        g.values = std::move(values);
        return g;
    }
};

struct MellinOptions {
    double endpoint_threshold = 1e-13;  ///< weighted endpoint samples relative to their maximum
};

/// Ratios e^{sigma u} |F| at the grid ends over the maximum; the left end is exempt when a model continues F
inline std::pair<double, double> mellin_endpoint_ratios(const LogGridFunction& F, double sigma) {
    double peak = 0;
    std::vector<double> g(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        g[i] = std::exp(sigma * F.u(i)) * std::abs(F.values[i]);
        peak = std::max(peak, g[i]);
    }
    if (peak == 0) return {0, 0};
    return {F.low ? 0.0 : g.front() / peak, g.back() / peak};
}

/// (M F)(s) for 0 < Re s
inline complex mellin(const LogGridFunction& F, complex s, const MellinOptions& opt = {}) {
    if (F.size() < 2) throw std::invalid_argument("mellin: need at least two samples");
    if (!(s.real() > 0)) throw std::domain_error("mellin: requires Re s > 0");
    auto [left, right] = mellin_endpoint_ratios(F, s.real());
    double worst = std::max(left, right);
    if (worst > opt.endpoint_threshold)
        throw CertificateError("mellin: domain truncation (left " + std::to_string(left) + ", right " +
                                   std::to_string(right) + ")",
                               worst, opt.endpoint_threshold);
    CompensatedSum<double> re, im;
    std::size_t n = F.size();
    for (std::size_t i = 0; i < n; ++i) {
        double w = ((i == 0 && !F.low) || i + 1 == n) ? 0.5 : 1.0;
        complex term = w * F.values[i] * std::exp(s * F.u(i));
        re += term.real();
        im += term.imag();
    }
    complex total(re.value() * F.h, im.value() * F.h);
    if (F.low) total += F.low->grid_tail(F.u0, F.h, s);
    return total;
}

/// G(sigma + i t) on a symmetric t-grid
struct MellinSamples {
    double sigma = 0.5;
    std::vector<double> t_grid;
    std::vector<complex> values;
};

inline MellinSamples mellin_samples(const LogGridFunction& F, double sigma, double T, double dt, const MellinOptions& opt = {}) {
    if (!(sigma > 0 && sigma < 1)) throw std::domain_error("mellin_samples: sigma must lie in (0, 1)");
    if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("mellin_samples: T and dt must be positive");
    auto n = static_cast<std::size_t>(std::lround(T / dt));
    MellinSamples G{sigma, std::vector<double>(2 * n + 1), std::vector<complex>(2 * n + 1)};
    std::vector<complex> half(n + 1);
    parallel_for(n + 1, [&](std::size_t j) { half[j] = mellin(F, complex(sigma, dt * static_cast<double>(j)), opt); });
    for (std::size_t j = 0; j <= n; ++j) {
        G.t_grid[n + j] = dt * static_cast<double>(j);
        G.t_grid[n - j] = -dt * static_cast<double>(j);
        G.values[n + j] = half[j];
        G.values[n - j] = std::conj(half[j]);
    }
    return G;
}

struct InverseOptions {
    double symmetry_tolerance = 1e-12;
    double tail_threshold = 1;  ///< |G| at the grid ends relative to max |G|
};

/// (1/2 pi) integral of r^{-s} G(s) dt along Re s = sigma, from the t >= 0 half
inline double inverse_mellin(const MellinSamples& G, double r, const InverseOptions& opt = {}) {
    if (!(r > 0)) throw std::domain_error("inverse_mellin: r must be positive");
    std::size_t n = G.t_grid.size();
    if (n < 3 || n % 2 == 0 || G.values.size() != n) throw std::invalid_argument("inverse_mellin: need a symmetric odd-sized t-grid");
    std::size_t mid = n / 2;
    double peak = 0;
    for (const auto& v : G.values) peak = std::max(peak, std::abs(v));
    for (std::size_t j = 0; j <= mid; ++j) {
        if (std::abs(G.t_grid[mid + j] + G.t_grid[mid - j]) > 1e-12 * std::max(1.0, std::abs(G.t_grid[mid + j])))
            throw std::invalid_argument("inverse_mellin: t-grid is not symmetric");
        if (std::abs(G.values[mid + j] - std::conj(G.values[mid - j])) > opt.symmetry_tolerance * std::max(peak, 1e-300))
            throw std::invalid_argument("inverse_mellin: samples are not conjugate symmetric");
    }
    double tail = peak > 0 ? std::max(std::abs(G.values.front()), std::abs(G.values.back())) / peak : 0;
    if (tail > opt.tail_threshold) throw CertificateError("inverse_mellin: contour truncation", tail, opt.tail_threshold);
    double lr = std::log(r);
    CompensatedSum<double> sum;
    for (std::size_t j = mid; j < n; ++j) {
        double w = (j == mid || j + 1 == n) ? 0.5 : 1.0;
        double dt = j + 1 < n ? G.t_grid[j + 1] - G.t_grid[j] : G.t_grid[j] - G.t_grid[j - 1];
        complex s(G.sigma, G.t_grid[j]);
        sum += w * dt * (std::exp(-s * lr) * G.values[j]).real();
    }
    return sum.value() / std::numbers::pi;
}

/// Both sides of M(F1 * F2)(s) = (M F1)(s) (M F2)(1 - s), (F1 * F2)(x) = integral of F1(x x') F2(x') dx'.
/// The left side convolves on the grid of F1; F2's grid must share the step and be offset by whole steps.
inline std::pair<complex, complex> mellin_convolution_check(const LogGridFunction& F1, const LogGridFunction& F2, complex s,
                                                            const MellinOptions& opt = {}) {
    if (F1.low || F2.low) throw std::invalid_argument("mellin_convolution_check: model tails are not supported");
    if (std::abs(F1.h - F2.h) > 1e-12 * F1.h) throw std::invalid_argument("mellin_convolution_check: grids need equal steps");
    double off = F2.u0 / F1.h;
    long shift = std::lround(off);
    if (std::abs(off - static_cast<double>(shift)) > 1e-9) throw std::invalid_argument("mellin_convolution_check: grid offset is not a whole step");
    LogGridFunction conv{F1.u0, F1.h, std::vector<double>(F1.size(), 0.0), std::nullopt};
    long n1 = static_cast<long>(F1.size()), n2 = static_cast<long>(F2.size());
    std::vector<double> w2(F2.size());
    for (long j = 0; j < n2; ++j) w2[j] = ((j == 0 || j + 1 == n2) ? 0.5 : 1.0) * F2.values[j] * std::exp(F2.u(j));
    parallel_for(F1.size(), [&](std::size_t i) {
        CompensatedSum<double> acc;
        for (long j = 0; j < n2; ++j) {
            long idx = static_cast<long>(i) + j + shift;
            if (idx < 0 || idx >= n1 || w2[j] == 0) continue;
            acc += F1.values[idx] * w2[j];
        }
        conv.values[i] = acc.value() * F1.h;
    });
    complex lhs = mellin(conv, s, opt);
    complex rhs = mellin(F1, s, opt) * mellin(F2, 1.0 - s, opt);
    return {lhs, rhs};
}

/// Least-squares fit of the small-k behavior of Psi(k) = integral of F(r) K0(k r) dr:
///     Psi(k) = sum_j k^{2j} (alpha_j ln k + beta_j), alpha_0 = -integral of F.
/// Uses the first n_fit samples; order is the highest j kept.
inline LowKModel fit_low_k_model(const std::vector<double>& k, const std::vector<double>& psi, double mass, int n_fit = 8,
                                 int order = 1, double* residual = nullptr) {
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(n_fit), k.size());
    std::size_t p = static_cast<std::size_t>(2 * order + 1);
    if (n < p) throw std::invalid_argument("fit_low_k_model: not enough samples");
    // columns: beta_0, then (k^{2j} ln k, k^{2j}) for j = 1..order
    Matrix<double> A(n, p);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lk = std::log(k[i]);
        b[i] = psi[i] + mass * lk;
        A(i, 0) = 1;
        for (int j = 1; j <= order; ++j) {
            double kp = std::pow(k[i], 2 * j);
            A(i, 2 * j - 1) = kp * lk;
            A(i, 2 * j) = kp;
        }
    }
    std::vector<double> scale(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t i = 0; i < n; ++i) scale[c] = std::max(scale[c], std::abs(A(i, c)));
        for (std::size_t i = 0; i < n; ++i) A(i, c) /= scale[c];
    }
    // Householder QR
    std::vector<double> rhs = b;
    for (std::size_t c = 0; c < p; ++c) {
        double norm = 0;
        for (std::size_t i = c; i < n; ++i) norm += A(i, c) * A(i, c);
        norm = std::sqrt(norm);
        if (norm == 0) throw std::runtime_error("fit_low_k_model: singular design");
        double alpha = A(c, c) > 0 ? -norm : norm;
        std::vector<double> v(n, 0.0);
        v[c] = A(c, c) - alpha;
        for (std::size_t i = c + 1; i < n; ++i) v[i] = A(i, c);
        double vv = 0;
        for (std::size_t i = c; i < n; ++i) vv += v[i] * v[i];
        for (std::size_t cc = c; cc < p; ++cc) {
            double d = 0;
            for (std::size_t i = c; i < n; ++i) d += v[i] * A(i, cc);
            for (std::size_t i = c; i < n; ++i) A(i, cc) -= 2 * d / vv * v[i];
        }
        double d = 0;
        for (std::size_t i = c; i < n; ++i) d += v[i] * rhs[i];
        for (std::size_t i = c; i < n; ++i) rhs[i] -= 2 * d / vv * v[i];
    }
    std::vector<double> x(p);
    for (std::size_t c = p; c-- > 0;) {
        double s = rhs[c];
        for (std::size_t cc = c + 1; cc < p; ++cc) s -= A(c, cc) * x[cc];
        x[c] = s / A(c, c);
    }
    LowKModel m;
    m.alpha.push_back(-mass);
    m.beta.push_back(x[0] / scale[0]);
    for (int j = 1; j <= order; ++j) {
        m.alpha.push_back(x[2 * j - 1] / scale[2 * j - 1]);
        m.beta.push_back(x[2 * j] / scale[2 * j]);
    }
    if (residual) {
        double worst = 0, peak = 0;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(m(k[i]) - psi[i]));
            peak = std::max(peak, std::abs(psi[i]));
        }
        *residual = peak > 0 ? worst / peak : 0;
    }
    return m;
}

/// Contour settings for the recovery integral
struct ContourOptions {
    double sigma = 0.5;
    double T = 400;           ///< largest contour parameter
    double dt = 0.02;
    bool adaptive = true;     ///< stop where the propagated noise reaches the signal
    double noise = 1e-10;     ///< relative accuracy of the Psi samples
    double tail_threshold = 1;  ///< integrand envelope at T relative to its maximum
};

/// Precomputed contour integrand 2^s (M Psi)(1 - s) / Gamma^2((1 - s)/2), s = sigma + i t_j
struct ContourPlan {
    double sigma = 0.5, dt = 0.02, T_used = 0, tail_ratio = 0;
    std::vector<complex> coef;
};

inline ContourPlan plan_contour(const LogGridFunction& psi, const ContourOptions& opt, const MellinOptions& mopt = {}) {
    if (!(opt.sigma > 0 && opt.sigma < 1)) throw std::domain_error("recover_rf: sigma must lie in (0, 1)");
    if (!(opt.T > 0) || !(opt.dt > 0)) throw std::invalid_argument("recover_rf: T and dt must be positive");
    auto n = static_cast<std::size_t>(std::lround(opt.T / opt.dt));
    ContourPlan plan{opt.sigma, opt.dt, 0, 0, {}};
    // size of the integrand a perturbation of relative size noise would produce
    double abs_int = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) abs_int += std::exp((1 - opt.sigma) * psi.u(i)) * std::abs(psi.values[i]);
    abs_int *= psi.h;
    if (psi.low) abs_int += std::abs(psi.low->grid_tail(psi.u0, psi.h, complex(1 - opt.sigma, 0)));
    const std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / opt.dt)));
    std::vector<double> env;
    std::deque<double> recent;
    double peak = 0, low = std::numeric_limits<double>::infinity();
    std::size_t low_at = 0;
    for (std::size_t j = 0; j <= n; ++j) {
        complex s(opt.sigma, opt.dt * static_cast<double>(j));
        complex log_g = log_gamma_complex((1.0 - s) / 2.0);
        complex m = mellin(psi, 1.0 - s, mopt);
        complex c = m == 0.0 ? complex(0) : std::exp(s * std::numbers::ln2 - 2.0 * log_g + std::log(m));
        double noise = opt.noise * abs_int * std::exp(opt.sigma * std::numbers::ln2 - 2.0 * log_g.real());
        recent.push_back(std::abs(c));
        if (recent.size() > window) recent.pop_front();
        double e = *std::max_element(recent.begin(), recent.end());
        peak = std::max(peak, std::abs(c));
        if (opt.adaptive && j >= window) {
            if (noise > 0.5 * e) break;
            // the integrand of a decaying transform only grows again once noise dominates
            if (e < low) {
                low = e;
                low_at = j;
            }
            if (e > 100 * low) {
                plan.coef.resize(low_at + 1);
                env.resize(low_at + 1);
                break;
            }
        }
        plan.coef.push_back(c);
        env.push_back(e);
    }
    plan.T_used = opt.dt * static_cast<double>(plan.coef.size() - 1);
    double envelope = env.empty() ? 0 : env.back();
    plan.tail_ratio = peak > 0 ? envelope / peak : 0;
    if (plan.tail_ratio > opt.tail_threshold)
        throw CertificateError("recover_rf: contour truncation", plan.tail_ratio, opt.tail_threshold);
    return plan;
}

/// (Rf)(x, r) = (2/pi) Re integral over t >= 0 of 2^s r^{-s} (M Psi)(1 - s) / Gamma^2((1 - s)/2) dt
inline double recover_rf(const ContourPlan& plan, double r) {
    if (!(r > 0)) throw std::domain_error("recover_rf: r must be positive");
    double lr = std::log(r);
    CompensatedSum<double> sum;
    std::size_t n = plan.coef.size();
    for (std::size_t j = 0; j < n; ++j) {
        double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        complex s(plan.sigma, plan.dt * static_cast<double>(j));
        sum += w * (plan.coef[j] * std::exp(-s * lr)).real();
    }
    return 2 / std::numbers::pi * plan.dt * sum.value();
}

inline double recover_rf(const LogGridFunction& psi_row, double r, double sigma, double T, double dt) {
    ContourOptions opt;
    opt.sigma = sigma;
    opt.T = T;
    opt.dt = dt;
    opt.adaptive = false;
    return recover_rf(plan_contour(psi_row, opt), r);
}

}  // namespace parasmt
