#pragma once
/// \file extended_precision.hpp
/// K0 series summation that escalates to 50 or 100 decimal digits when the double-precision
/// sum is too ill-conditioned to meet the requested tolerance.

#include "expansion.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace parasmt {

using float50 = boost::multiprecision::cpp_bin_float_50;
using float100 = boost::multiprecision::cpp_bin_float_100;

/// Result of an adaptive K0 summation, reported in double
struct K0SeriesReport {
    double value = 0;
    int terms = 0;
    double kappa = 0;
    bool converged = false;
    int digits = 0;  ///< decimal digits of the arithmetic that produced value
};

namespace detail {

template<typename Real>
K0SeriesReport k0_report(const K0SeriesResult<Real>& r) {
    return {static_cast<double>(r.value), r.terms, r.kappa, r.converged, std::numeric_limits<Real>::digits10};
}

/// rounding error bound of a sum with condition kappa and n terms in working precision eps
inline double k0_rounding_bound(double kappa, int terms, double eps) {
    return 4 * kappa * eps * std::sqrt(static_cast<double>(terms) + 1);
}

}  // namespace detail

/// Sum the K0 series to relative accuracy tol, raising the working precision as needed
inline K0SeriesReport k0_series_adaptive(const ParabolicPoint& p, const ParabolicPoint& q, double k, double tol = 1e-12,
                                         long n_max = 2000000) {
    auto d = k0_series_sum<double>(p, q, k, n_max, tol);
    if (d.converged && detail::k0_rounding_bound(d.kappa, d.terms, std::numeric_limits<double>::epsilon()) <= tol)
        return detail::k0_report(d);
    double need = d.kappa;
    if (need * 1e-45 <= tol) {
        auto r = k0_series_sum<float50>(p, q, k, n_max, tol);
        if (r.converged && detail::k0_rounding_bound(r.kappa, r.terms, 1e-49) <= tol) return detail::k0_report(r);
        need = std::max(need, r.kappa);
    }
    auto r = k0_series_sum<float100>(p, q, k, n_max, tol);
    auto out = detail::k0_report(r);
    if (!r.converged) throw TruncationError("k0_series: stopping rule unmet within " + std::to_string(n_max) + " terms", r.last_ratio);
    if (detail::k0_rounding_bound(r.kappa, r.terms, 1e-99) > tol)
        throw CertificateError("k0_series: condition number", r.kappa, tol / 1e-99);
    return out;
}

}  // namespace parasmt
