#include <parasmt/expansion.hpp>
#include <parasmt/extended_precision.hpp>
#include <parasmt/oracles.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace parasmt;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Phantom axis_phantom() { return Phantom({{{1.0, 0.0}, 0.5, 1.0, 4}, {{2.5, 0.0}, 0.4, 0.7, 3}}, 1.0); }
Phantom skew_phantom() { return Phantom({{{1.2, 0.5}, 0.45, 1.0, 4}, {{2.2, -0.6}, 0.4, 0.8, 3}}, 1.0); }

BoundaryData sample(const Phantom& ph, double xi_max = 11, double dxi = 0.05, double r_max = 66, double dr = 0.01) {
    auto xi = linspace(-xi_max, xi_max, static_cast<std::size_t>(std::lround(2 * xi_max / dxi)) + 1);
    auto r = linspace(0, r_max, static_cast<std::size_t>(std::lround(r_max / dr)) + 1);
    return sample_boundary(ph, Parabola(ph.eta0()), xi, r);
}

const BoundaryData& axis_data() {
    static BoundaryData d = sample(axis_phantom());
    return d;
}
const BoundaryData& skew_data() {
    static BoundaryData d = sample(skew_phantom());
    return d;
}

}  // namespace

TEST(K0Series, ConvergesToBesselK0) {
    ParabolicPoint p{0, 2}, q{0.5, 1};
    auto r = k0_series_sum<double>(p, q, 1.0, 100000, 1e-14);
    ASSERT_TRUE(r.converged);
    double rho = distance(to_cartesian(p), to_cartesian(q));
    EXPECT_LE(rel(r.value, bessel_k0(rho)), 1e-10);
}

TEST(K0Series, InnerPointAtOrigin) {
    for (double eta : {0.5, 1.0, 2.0}) {
        ParabolicPoint p{0, eta}, q{0, 0};
        auto r = k0_series_sum<double>(p, q, 1.0, 100000, 1e-14);
        ASSERT_TRUE(r.converged);
        EXPECT_LE(rel(r.value, bessel_k0(eta * eta / 2)), 1e-10) << eta;
    }
}

TEST(K0Series, SingleTermClosedForm) {
    // n = 0 at xi = xi' = 0: sqrt(pi) e^{(k/2)(eta'^2 - eta^2)} * 2 * H_{-1}(sqrt(k) eta)
    for (double k : {0.5, 2.0}) {
        double eta = 1.7, etap = 0.6, b = std::sqrt(k) * eta;
        double hm1 = std::sqrt(std::numbers::pi) / 2 * std::exp(b * b) * std::erfc(b);
        double expect = std::sqrt(std::numbers::pi) * std::exp(k / 2 * (etap * etap - eta * eta)) * 2 * hm1;
        EXPECT_LE(rel(k0_series({0, eta}, {0, etap}, k, 0), expect), 1e-13);
    }
}

TEST(K0Series, FixedTruncationMatchesPartialSums) {
    ParabolicPoint p{0.3, 1.5}, q{-0.2, 0.7};
    double prev = k0_series(p, q, 1.0, 10);
    double next = k0_series(p, q, 1.0, 11);
    auto r = k0_series_sum<double>(p, q, 1.0, 11, 0.0);
    EXPECT_EQ(r.value, next);
    EXPECT_NE(prev, next);
    EXPECT_EQ(r.terms, 11);
}

TEST(K0Series, Errors) {
    EXPECT_THROW(k0_series({0, 1}, {0, 2}, 1.0, 5), std::domain_error);
    EXPECT_THROW(k0_series({0, 1}, {0, 1}, 1.0, 5), std::domain_error);
    EXPECT_THROW(k0_series({0, 2}, {0, 1}, 0.0, 5), std::domain_error);
}

TEST(K0Series, RandomPairsWithEscalation) {
    std::mt19937_64 gen(20261015);
    std::uniform_real_distribution<double> uxi(-3, 3), ueta(0.2, 3);
    int checked = 0;
    while (checked < 20) {
        ParabolicPoint p{uxi(gen), ueta(gen)}, q{uxi(gen), ueta(gen)};
        if (q.eta > p.eta) std::swap(p, q);
        if (p.eta - q.eta < 0.1) continue;
        for (double k : {0.5, 1.0, 4.0}) {
            auto r = k0_series_adaptive(p, q, k, 1e-12);
            double ref = bessel_k0(k * distance(to_cartesian(p), to_cartesian(q)));
            EXPECT_LE(rel(r.value, ref), 1e-8) << p.xi << ' ' << p.eta << ' ' << q.xi << ' ' << q.eta << ' ' << k;
        }
        ++checked;
    }
}

TEST(K0Series, EscalatesWhenIllConditioned) {
    ParabolicPoint p{3, 1.2}, q{-3, 1.0};
    auto d = k0_series_sum<double>(p, q, 4.0, 2000000, 1e-12);
    EXPECT_GT(d.kappa, 1e6);
    auto r = k0_series_adaptive(p, q, 4.0, 1e-12);
    EXPECT_GT(r.digits, 17);
    EXPECT_LE(rel(r.value, bessel_k0(4.0 * distance(to_cartesian(p), to_cartesian(q)))), 1e-10);
}

TEST(DataK0Integral, ZeroData) {
    BoundaryData d{1, {0.0}, linspace(0, 5, 501), {BoundaryRow{}}};
    EXPECT_EQ(data_k0_integral(d, 0, 1.0), 0.0);
}

TEST(DataK0Integral, NarrowBumpApproachesPointValue) {
    double r0 = 2, w = 0.02;
    auto r = linspace(0, 5, 5001);
    BoundaryRow row;
    for (std::size_t j = 0; j < r.size(); ++j) {
        double t = (r[j] - r0) / w;
        row.values.push_back(std::abs(t) < 1 ? 15.0 / (16 * w) * (1 - t * t) * (1 - t * t) : 0.0);
    }
    BoundaryData d{1, {0.0}, r, {row}};
    d.trim();
    for (double k : {0.5, 1.0, 3.0}) {
        // second-order moment correction: w^2/7 * K0''(k r0) / 2
        double k0pp = k * k * (bessel_k0(k * r0) + boost::math::cyl_bessel_k(1, k * r0) / (k * r0));
        double expect = bessel_k0(k * r0) + w * w / 14 * k0pp;
        EXPECT_LE(rel(data_k0_integral(d, 0, k), expect), 1e-6) << k;
    }
}

TEST(DataK0Integral, DecreasingInK) {
    const auto& d = axis_data();
    std::size_t i = d.xi_grid.size() / 2 + 7;
    double prev = data_k0_integral(d, i, 0.1);
    for (double k = 0.2; k < 8; k *= 1.5) {
        double cur = data_k0_integral(d, i, k);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(DataK0Integral, MatchesPhantomIntegral) {
    const auto& d = skew_data();
    auto ph = skew_phantom();
    for (double k : {0.5, 1.0, 2.0})
        for (std::size_t i : {200ul, 220ul, 241ul, 260ul}) {
            double direct = psi_direct(ph, {d.xi_grid[i], 1.0}, k);
            EXPECT_LE(rel(data_k0_integral(d, i, k), direct), 1e-8) << k << ' ' << i;
        }
    EXPECT_LE(data_k0_resolution_estimate(d, 2.0), 1e-7);
}

TEST(PsiDirect, MatchesAreaIntegral) {
    auto ph = skew_phantom();
    for (double k : {0.3, 1.0, 3.0})
        for (ParabolicPoint p : {ParabolicPoint{0, 1.3}, ParabolicPoint{1.5, 2.0}, ParabolicPoint{-1, 1.1}})
            EXPECT_LE(rel(psi_direct(ph, p, k), psi_area(ph, p, k)), 1e-9) << k;
}

TEST(PsiDirect, ZeroPhantomAndDistantDecay) {
    Phantom empty({}, 1.0);
    EXPECT_EQ(psi_direct(empty, {0.5, 2}, 1.0), 0.0);
    // far away the field decays like e^{-k r_min} up to algebraic factors
    Phantom ph({{{0.5, 0.0}, 0.2, 1.0, 3}}, 1.0);
    ParabolicPoint p = from_cartesian({40.5, 0.0});
    for (double k : {0.5, 1.0}) EXPECT_LE(rel(psi_direct(ph, p, k), psi_area(ph, p, k)), 1e-9);
    double s1 = std::log(psi_direct(ph, p, 1.0)), s2 = std::log(psi_direct(ph, p, 1.1));
    double slope = (s1 - s2) / 0.1;
    EXPECT_GE(slope, 39.8);
    EXPECT_LE(slope, 40.2 + 1.0);
}

TEST(Coefficients, ZeroDataGivesZeroTableAndField) {
    BoundaryData d{1, linspace(-4, 4, 161), linspace(0, 20, 2001), std::vector<BoundaryRow>(161)};
    auto t = build_coefficient_table(d, {0.5, 1.0});
    for (std::size_t j = 0; j < 2; ++j) {
        for (int m = 0; m <= 10; ++m) EXPECT_EQ(t.lambda(m, j), 0.0);
        EXPECT_EQ(build_psi(t, {0.3, 1.4}, j).psi, 0.0);
    }
}

TEST(Coefficients, OddOrdersVanishForAxisSymmetricPhantom) {
    const auto& d = axis_data();
    for (double k : {0.5, 1.0, 2.0}) {
        auto t = build_coefficient_table(d, {k});
        double l0 = std::abs(t.lambda(0, 0));
        for (int m : {1, 3, 5}) EXPECT_LE(std::abs(t.lambda(m, 0)), 1e-8 * l0) << k << ' ' << m;
        EXPECT_LE(std::abs(lambda_m(d, 1, k)), 1e-8 * l0);
    }
}

TEST(Coefficients, MatchPhantomSideIntegral) {
    for (int which = 0; which < 2; ++which) {
        const auto& d = which ? skew_data() : axis_data();
        auto ph = which ? skew_phantom() : axis_phantom();
        for (double k : {0.5, 1.0, 2.0}) {
            auto t = build_coefficient_table(d, {k});
            auto ref = phantom_coefficients(ph, k, 8);
            double scale = 0;
            for (double v : ref) scale = std::max(scale, std::abs(v));
            for (int m = 0; m <= 8; ++m) {
                double got = t.normalized(0)[m];
                if (std::abs(ref[m]) > 1e-8 * scale)
                    EXPECT_LE(rel(got, ref[m]), 1e-6) << which << ' ' << k << ' ' << m;
                else
                    EXPECT_LE(std::abs(got), 1e-6 * scale) << which << ' ' << k << ' ' << m;
            }
        }
    }
}

TEST(Coefficients, DomainTruncationIsReported) {
    auto d = sample(axis_phantom(), 3, 0.05, 12);
    EXPECT_THROW(build_coefficient_table(d, {0.5}), CertificateError);
}

TEST(BuildPsi, EqualsDataIntegralOnTheParabola) {
    const auto& d = skew_data();
    std::vector<double> ks{0.5, 1.0, 2.0};
    auto t = build_coefficient_table(d, ks);
    for (std::size_t j = 0; j < ks.size(); ++j)
        for (std::size_t i : {190ul, 215ul, 230ul, 250ul}) {
            auto v = build_psi(t, {d.xi_grid[i], 1.0}, j);
            EXPECT_LE(rel(v.psi, data_k0_integral(d, i, ks[j])), 1e-6) << i << ' ' << ks[j];
        }
}

TEST(BuildPsi, MatchesDirectFieldAndTailBound) {
    const auto& d = skew_data();
    auto ph = skew_phantom();
    std::vector<double> ks{0.5, 1.0, 2.0};
    auto t = build_coefficient_table(d, ks);
    std::vector<ParabolicPoint> pts{{0, 1.3}, {1.5, 2.0}, {-0.75, 1.1}, {0.75, 2.5}};
    auto field = build_psi_field(t, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < ks.size(); ++j) {
            double direct = psi_direct(ph, pts[i], ks[j]);
            EXPECT_LE(rel(field.values(i, j), direct), 1e-5) << i << ' ' << j;
            EXPECT_GT(field.values(i, j), 0);
            // 20 more terms move the sum by at most 10 tol |Psi|
            auto v = build_psi(t, pts[i], j, 1e-10);
            const auto& b = t.normalized(j);
            int top = std::min<int>(v.m_used + 20, static_cast<int>(b.size()) - 1);
            HermiteNegTable hp(top, std::sqrt(ks[j]) * pts[i].eta), h0(top, std::sqrt(ks[j]));
            HermiteFunctionSequence<double> phi(std::sqrt(ks[j]) * pts[i].xi);
            double extra = 0;
            for (int m = 0; m <= top; ++m) {
                if (m > 0) phi.next();
                if (m > v.m_used) extra += b[m] * phi.value() * std::exp(hp.log_normalized(m) - h0.log_normalized(m));
            }
            EXPECT_LE(std::abs(extra), 10 * 1e-10 * std::abs(v.psi));
        }
}

TEST(BuildPsi, TruncationFailureCarriesRatio) {
    auto d = skew_data();
    CoefficientOptions opt;
    opt.m_max = 2;
    auto t = build_coefficient_table(d, {1.0}, opt);
    try {
        build_psi(t, {0.5, 1.1}, 0);
        FAIL() << "expected truncation failure";
    } catch (const TruncationError& e) {
        EXPECT_GT(e.last_ratio(), 0);
    }
    EXPECT_THROW(build_psi(t, {0.5, 0.9}, 0), std::domain_error);
}

TEST(BuildPsi, FieldIsThreadCountIndependent) {
    const auto& d = axis_data();
    std::vector<double> ks{0.5, 0.8, 1.3, 2.0};
    std::vector<ParabolicPoint> pts{{0, 1.3}, {1.5, 2.0}};
    setenv("PARASMT_THREADS", "1", 1);
    auto a = build_psi_field(build_coefficient_table(d, ks), pts);
    setenv("PARASMT_THREADS", "4", 1);
    auto b = build_psi_field(build_coefficient_table(d, ks), pts);
    unsetenv("PARASMT_THREADS");
    EXPECT_EQ(a.values.data(), b.values.data());
    EXPECT_EQ(a.m_used.data(), b.m_used.data());
}

TEST(Lambda, RangeFloorGuard) {
    CoefficientTable t(5.0, {50.0}, {std::vector<double>(401, 1.0)});
    EXPECT_NO_THROW(t.lambda(0, 0));
    EXPECT_THROW(t.lambda(400, 0), std::range_error);
    EXPECT_THROW(t.lambda(401, 0), std::out_of_range);
}
