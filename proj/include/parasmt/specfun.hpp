#pragma once
/// \file specfun.hpp
/// Hermite polynomials, Hermite functions of negative integer order, K0, complex Gamma
/// and the scaled complementary error function.
///
/// Most kernels are templates on the scalar type so that the same code runs in double
/// and in boost::multiprecision types.

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace parasmt {

constexpr int default_hermite_nmax = 200;

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
template<typename Real>
Real hermite_poly(int n, const Real& x, int n_max = default_hermite_nmax) {
    using std::isfinite;
    if (n < 0 || n > n_max)
        throw std::out_of_range("hermite_poly: order " + std::to_string(n) + " outside [0, " +
                                std::to_string(n_max) + "]");
    Real prev = 1, cur = 2 * x;
    if (n == 0) return prev;
    for (int j = 1; j < n; ++j) {
        Real next = 2 * x * cur - 2 * j * prev;
        prev = cur;
        cur = next;
    }
    if (!isfinite(static_cast<double>(cur)))
        throw std::range_error("hermite_poly: overflow at n=" + std::to_string(n) +
                               ", x=" + std::to_string(static_cast<double>(x)));
    return cur;
}

/// T_m(y) = (-i)^m H_m(i y), a real polynomial with nonnegative coefficients
template<typename Real>
Real hermite_poly_rotated(int m, const Real& y, int n_max = default_hermite_nmax) {
    using std::isfinite;
    if (m < 0 || m > n_max)
        throw std::out_of_range("hermite_poly_rotated: order " + std::to_string(m) + " outside [0, " +
                                std::to_string(n_max) + "]");
    Real prev = 1, cur = 2 * y;
    if (m == 0) return prev;
    for (int j = 1; j < m; ++j) {
        Real next = 2 * y * cur + 2 * j * prev;
        prev = cur;
        cur = next;
    }
    if (!isfinite(static_cast<double>(cur)))
        throw std::range_error("hermite_poly_rotated: overflow at m=" + std::to_string(m) +
                               ", y=" + std::to_string(static_cast<double>(y)));
    return cur;
}

namespace detail {

/// continued fraction e^{x^2} erfc(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
template<typename Real>
Real erfcx_continued_fraction(const Real& x) {
    using std::abs;
    const Real tiny = std::numeric_limits<Real>::min() * 1e10;
    const Real eps = std::numeric_limits<Real>::epsilon();
    Real f = x, c = x, d = 0;
    for (int j = 1; j < 100000; ++j) {
        Real a = Real(j) / 2;
        d = x + a * d;
        if (abs(d) < tiny) d = tiny;
        c = x + a / c;
        if (abs(c) < tiny) c = tiny;
        d = 1 / d;
        Real delta = c * d;
        f *= delta;
        if (abs(delta - 1) < eps) break;
    }
    using std::sqrt;
    return 1 / (f * sqrt(boost::math::constants::pi<Real>()));
}

}  // namespace detail

/// e^{x^2} erfc(x) for x >= 0
template<typename Real>
Real erfc_scaled(const Real& x) {
    using std::exp;
    if (!(x >= 0)) throw std::domain_error("erfc_scaled: negative argument");
    if constexpr (std::is_same_v<Real, double>) {
        if (x < 5) {
            // e^{x^2} with x^2 split into a rounded part and its exact remainder
            double hi = x * x, lo = std::fma(x, x, -hi);
            return exp(hi) * (1 + lo) * std::erfc(x);
        }
        return detail::erfcx_continued_fraction(x);
    } else {
        if (x < 10) return exp(x * x) * boost::math::erfc(x);
        return detail::erfcx_continued_fraction(x);
    }
}

/// Backward continued-fraction ratios of the normalized negative-order Hermite functions
/// h_m(x) = sqrt(2^m m!) e^{-x^2/2} H_{-m-1}(x), x >= 0.
/// ratio[m] = h_m / h_{m-1} for 1 <= m <= m_max; ratio[0] is unused.
/// h_0 = (sqrt(pi)/2) erfcx(x) e^{-x^2/2} is returned as mantissa h0 with log scale -x^2/2.
template<typename Real>
struct HermiteNegRatios {
    Real x = 0;
    Real h0 = 0;          ///< (sqrt(pi)/2) erfcx(x)
    Real h0_log_scale = 0;  ///< -x^2/2
    std::vector<Real> ratio;
};

template<typename Real>
HermiteNegRatios<Real> hermite_neg_ratios(int m_max, const Real& x) {
    using std::sqrt;
    using std::log;
    if (!(x >= 0)) throw std::domain_error("hermite_neg: negative argument");
    if (m_max < 0) throw std::out_of_range("hermite_neg: negative order");
    HermiteNegRatios<Real> out;
    out.x = x;
    out.h0 = sqrt(boost::math::constants::pi<Real>()) / 2 * erfc_scaled(x);
    out.h0_log_scale = -x * x / 2;
    out.ratio.assign(static_cast<std::size_t>(m_max) + 1, Real(0));
    if (m_max == 0) return out;
    const double xd = static_cast<double>(x);
    if (xd * std::sqrt(2.0 * m_max) <= 1) {
        // weakly growing regime: forward recurrence loses at most a factor e^2
        const Real e = 1;  // e^{-x^2/2} carried by the log scale
        Real hm1 = out.h0;
        Real hm = (e - 2 * x * out.h0) / sqrt(Real(2));
        out.ratio[1] = hm / hm1;
        for (int m = 1; m < m_max; ++m) {
            Real next = sqrt(Real(m) / (m + 1)) * hm1 - x * sqrt(Real(2) / (m + 1)) * hm;
            out.ratio[m + 1] = next / hm;
            hm1 = hm;
            hm = next;
        }
        return out;
    }
    // backward recurrence from a start index where the unwanted solution has decayed
    const double digits = -std::log(static_cast<double>(std::numeric_limits<Real>::epsilon())) + 10;
    double root = std::sqrt(2.0 * m_max) + digits / (2 * xd);
    long start = static_cast<long>(std::ceil(root * root / 2)) + 2;
    Real a = x * sqrt(Real(2) / (start + 1));
    Real b = sqrt(Real(start) / (start + 1));
    Real t = (sqrt(a * a + 4 * b) - a) / 2;  // fixed point of the ratio map
    for (long m = start; m >= 1; --m) {
        t = sqrt(Real(m) / (m + 1)) / (t + x * sqrt(Real(2) / (m + 1)));
        if (m <= m_max) out.ratio[static_cast<std::size_t>(m)] = t;
    }
    return out;
}

/// Table of h_m(x), m = 0..m_max, stored as natural logarithms
class HermiteNegTable {
public:
    HermiteNegTable(int m_max, double x) : x_(x) {
        auto r = hermite_neg_ratios<double>(m_max, x);
        log_h_.resize(static_cast<std::size_t>(m_max) + 1);
        log_h_[0] = std::log(r.h0) + r.h0_log_scale;
        for (int m = 1; m <= m_max; ++m) log_h_[m] = log_h_[m - 1] + std::log(r.ratio[m]);
    }
    int m_max() const { return static_cast<int>(log_h_.size()) - 1; }
    double x() const { return x_; }
    /// ln h_m(x)
    double log_normalized(int m) const { return log_h_.at(static_cast<std::size_t>(m)); }
    /// h_m(x) = sqrt(2^m m!) e^{-x^2/2} H_{-m-1}(x)
    double normalized(int m) const { return std::exp(log_normalized(m)); }
    /// g_m(x) = e^{-x^2} H_{-m-1}(x)
    double scaled(int m) const {
        return std::exp(log_normalized(m) - x_ * x_ / 2 - log_norm(m));
    }
    /// H_{-m-1}(x)
    double unscaled(int m) const { return std::exp(log_normalized(m) + x_ * x_ / 2 - log_norm(m)); }
    /// ln sqrt(2^m m!)
    static double log_norm(int m) { return 0.5 * (m * std::numbers::ln2 + std::lgamma(m + 1.0)); }
private:
    double x_;
    std::vector<double> log_h_;
};

/// g_m(x) = e^{-x^2} H_{-m-1}(x) for x >= 0
inline double hermite_neg_scaled(int m, double x, int n_max = default_hermite_nmax) {
    if (!(x >= 0)) throw std::domain_error("hermite_neg_scaled: negative argument " + std::to_string(x));
    if (m < 0 || m > n_max)
        throw std::out_of_range("hermite_neg_scaled: order " + std::to_string(m) + " outside [0, " +
                                std::to_string(n_max) + "]");
    return HermiteNegTable(m, x).scaled(m);
}

/// Sequence of orthonormal Hermite functions phi_n(z) = (2^n n! sqrt(pi))^{-1/2} H_n(z) e^{-z^2/2},
/// held as mantissa * exp(log_scale) so that no intermediate value under- or overflows.
template<typename Real>
class HermiteFunctionSequence {
public:
    explicit HermiteFunctionSequence(const Real& z) : z_(z) {
        using std::pow;
        cur_ = pow(boost::math::constants::pi<Real>(), Real(-0.25));
        prev_ = 0;
        log_scale_ = -z * z / 2;
    }
    int n() const { return n_; }
    const Real& mantissa() const { return cur_; }
    const Real& log_scale() const { return log_scale_; }
    Real value() const { using std::exp; return cur_ * exp(log_scale_); }
    void next() {
        using std::sqrt;
        using std::abs;
        Real nxt = sqrt(Real(2) / (n_ + 1)) * z_ * cur_ - sqrt(Real(n_) / (n_ + 1)) * prev_;
        prev_ = cur_;
        cur_ = nxt;
        ++n_;
        if (abs(cur_) > big()) {
            cur_ /= big();
            prev_ /= big();
            log_scale_ += log_big();
        }
    }
private:
    static Real big() { return Real(1e200); }
    static Real log_big() { using std::log; return log(Real(1e200)); }
    Real z_, prev_, cur_, log_scale_;
    int n_ = 0;
};

/// Sequence tau_n(y) = T_n(y) / sqrt(2^n n!) with the same mantissa/log-scale storage.
/// tau_n(y) >= 0 for y >= 0.
template<typename Real>
class RotatedHermiteSequence {
public:
    explicit RotatedHermiteSequence(const Real& y) : y_(y), prev_(0), cur_(1), log_scale_(0) {}
    int n() const { return n_; }
    const Real& mantissa() const { return cur_; }
    const Real& log_scale() const { return log_scale_; }
    void next() {
        using std::sqrt;
        using std::abs;
        Real nxt = sqrt(Real(2) / (n_ + 1)) * y_ * cur_ + sqrt(Real(n_) / (n_ + 1)) * prev_;
        prev_ = cur_;
        cur_ = nxt;
        ++n_;
        if (abs(cur_) > big()) {
            cur_ /= big();
            prev_ /= big();
            log_scale_ += log_big();
        }
    }
private:
    static Real big() { return Real(1e200); }
    static Real log_big() { using std::log; return log(Real(1e200)); }
    Real y_, prev_, cur_, log_scale_;
    int n_ = 0;
};

namespace detail {
inline double bessel_k0_scaled_asymptotic(double x) {
    double term = 1, sum = 1;
    for (int j = 1; j < 60; ++j) {
        double f = (2.0 * j - 1) * (2.0 * j - 1) / (8.0 * j * x);
        if (f >= 1) break;
        term *= -f;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::sqrt(std::numbers::pi / (2 * x)) * sum;
}
}  // namespace detail

/// Modified Bessel function K0(x), x > 0
inline double bessel_k0(double x) {
    if (!(x > 0)) throw std::domain_error("bessel_k0: argument must be positive, got " + std::to_string(x));
    if (x > 700) return std::exp(-x) * detail::bessel_k0_scaled_asymptotic(x);
    return boost::math::cyl_bessel_k(0, x);
}


/// e^x K0(x), x > 0
inline double bessel_k0_scaled(double x) {
    if (!(x > 0)) throw std::domain_error("bessel_k0_scaled: argument must be positive, got " + std::to_string(x));
    if (x > 100) return detail::bessel_k0_scaled_asymptotic(x);
    return std::exp(x) * boost::math::cyl_bessel_k(0, x);
}

namespace detail {

/// log sin(pi z), stable for large |Im z|
inline std::complex<double> log_sin_pi(std::complex<double> z) {
    using C = std::complex<double>;
    const double pi = std::numbers::pi;
    if (std::abs(z.imag()) < 20) return std::log(std::sin(pi * z));
    if (z.imag() < 0) return std::conj(log_sin_pi(std::conj(z)));
    // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z})
    C e2 = std::exp(C(0, 2 * pi) * z);
    return C(-std::numbers::ln2, pi / 2) - C(0, pi) * z + std::log(1.0 - e2);
}

}  // namespace detail

/// A logarithm of Gamma(z); exp of the result is Gamma(z) (the branch of the imaginary
/// part is not normalized)
inline std::complex<double> log_gamma_complex(std::complex<double> z) {
    using C = std::complex<double>;
    if (z.imag() == 0 && z.real() <= 0 && z.real() == std::floor(z.real()))
        throw std::domain_error("gamma_complex: pole at z=" + std::to_string(z.real()));
    if (z.real() < 0.5)
        return std::log(std::numbers::pi) - detail::log_sin_pi(z) - log_gamma_complex(1.0 - z);
    C w = z, prod = 1;
    bool shifted = false;
    while (std::abs(w) < 15) {
        prod *= w;
        w += 1.0;
        shifted = true;
    }
    static const double bernoulli[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
                                       -691.0 / 2730, 7.0 / 6, -3617.0 / 510};
    C series = 0, winv = 1.0 / w, winv2 = winv * winv, pw = winv;
    for (int j = 1; j <= 8; ++j) {
        series += bernoulli[j - 1] / (2.0 * j * (2.0 * j - 1)) * pw;
        pw *= winv2;
    }
    C result = (w - 0.5) * std::log(w) - w + 0.5 * std::log(2 * std::numbers::pi) + series;
    if (shifted) result -= std::log(prod);
    return result;
}

/// Gamma(z) for complex z away from the poles
inline std::complex<double> gamma_complex(std::complex<double> z) { return std::exp(log_gamma_complex(z)); }

}  // namespace parasmt
