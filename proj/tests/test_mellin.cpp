#include <parasmt/expansion.hpp>
#include <parasmt/mellin.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace parasmt;

namespace {

double rel(complex a, complex b) { return std::abs(a - b) / std::abs(b); }

complex mellin_k0_exact(complex s) { return std::pow(2.0, s - 2.0) * std::exp(2.0 * log_gamma_complex(s / 2.0)); }

LogGridFunction k0_grid() { return LogGridFunction::sample([](double y) { return bessel_k0(y); }, -140, 6.5, 2933); }

double c2_bump(double y) {
    double q = 1 - (y - 2) * (y - 2);
    return q > 0 ? q * q * q : 0.0;
}

/// C2 bump on [1, 3], symmetric in log y
double log_c2_bump(double y) {
    double a = 0.5 * std::log(3.0), v = (std::log(y) - a) / a;
    double q = 1 - v * v;
    return q > 0 ? q * q * q : 0.0;
}

LogGridFunction indicator(double u_min, double u_max, double h) {
    auto n = static_cast<std::size_t>(std::lround((u_max - u_min) / h)) + 1;
    LogGridFunction g{u_min, h, std::vector<double>(n, 0.0), std::nullopt};
    for (std::size_t i = 0; i < n; ++i) {
        double u = g.u(i);
        g.values[i] = std::abs(u) < 0.5 * h ? 0.5 : (u < 0 ? 1.0 : 0.0);
    }
    return g;
}

}  // namespace

TEST(Mellin, IndicatorGivesReciprocal) {
    auto g = indicator(-75, 5, 0.002);
    EXPECT_LE(rel(mellin(g, 0.5), 2.0), 1e-6);
}

TEST(Mellin, BesselK0Pair) {
    auto g = k0_grid();
    EXPECT_LE(rel(mellin(g, 0.5), std::pow(2.0, -1.5) * std::pow(std::tgamma(0.25), 2)), 1e-7);
    for (complex s : {complex(0.3, 0), complex(0.5, 2), complex(0.9, 0)})
        EXPECT_LE(rel(mellin(g, s), mellin_k0_exact(s)), 1e-7) << s;
}

TEST(Mellin, ExponentialGivesGamma) {
    auto g = LogGridFunction::sample([](double y) { return std::exp(-y); }, -75, 4.5, 1600);
    EXPECT_LE(rel(mellin(g, 0.5), std::sqrt(std::numbers::pi)), 1e-10);
}

TEST(Mellin, DomainTruncationIsReported) {
    auto g = LogGridFunction::sample([](double y) { return std::exp(-y); }, -10, 4.5, 300);
    EXPECT_THROW(mellin(g, 0.5), CertificateError);
    EXPECT_THROW(mellin(g, complex(-0.1, 0)), std::domain_error);
}

TEST(Mellin, LowKModelTailMatchesFullGrid) {
    // Psi(k) = integral of F(r) K0(k r) dr for F = indicator of [1, 2]; full grid vs truncated grid + model
    auto psi = [](double k) {
        return integrate_gauss([&](double r) { return bessel_k0(k * r); }, 1, 2, 40);
    };
    auto full = LogGridFunction::sample(psi, -150, 4, 3081);
    std::size_t cut = 2500;
    LogGridFunction part{full.u(cut), full.h, std::vector<double>(full.values.begin() + cut, full.values.end()), std::nullopt};
    std::vector<double> ks, ps;
    for (std::size_t i = 0; i < 8; ++i) {
        ks.push_back(part.y(i));
        ps.push_back(part.values[i]);
    }
    double resid = 0;
    part.low = fit_low_k_model(ks, ps, 1.0, 8, 1, &resid);
    EXPECT_LE(resid, 1e-10);
    for (complex s : {complex(0.5, 0), complex(0.5, 3), complex(0.25, 7)})
        EXPECT_LE(rel(mellin(part, s), mellin(full, s)), 1e-9) << s;
}

TEST(MellinSamples, ConjugateSymmetry) {
    auto G = mellin_samples(k0_grid(), 0.5, 10, 0.1);
    std::size_t n = G.t_grid.size(), mid = n / 2;
    for (std::size_t j = 0; j <= mid; ++j) {
        EXPECT_EQ(G.t_grid[mid + j], -G.t_grid[mid - j]);
        EXPECT_LE(std::abs(G.values[mid + j] - std::conj(G.values[mid - j])), 1e-12 * std::abs(G.values[mid]));
    }
}

TEST(InverseMellin, RoundTripOnCompactBump) {
    auto sq = [](double y) {
        double q = 1 - (y - 2) * (y - 2);
        return q > 0 ? q * q : 0.0;
    };
    auto G0 = mellin_samples(LogGridFunction::sample(sq, -0.5, 1.6, 8401), 0.5, 1000, 0.05);
    EXPECT_NEAR(inverse_mellin(G0, 1.5), sq(1.5), 1e-6);
    auto G = mellin_samples(LogGridFunction::sample(log_c2_bump, -0.5, 1.6, 4201), 0.5, 200, 0.05);
    double worst = 0;
    for (double r = 0.8; r <= 3.2; r += 0.01) worst = std::max(worst, std::abs(inverse_mellin(G, r) - log_c2_bump(r)));
    EXPECT_LE(worst, 1e-5);
}

TEST(InverseMellin, ReciprocalIsIndicator) {
    std::size_t n = 40000;
    double dt = 0.01;
    MellinSamples G{0.5, std::vector<double>(2 * n + 1), std::vector<complex>(2 * n + 1)};
    for (std::size_t j = 0; j <= 2 * n; ++j) {
        G.t_grid[j] = dt * (static_cast<double>(j) - static_cast<double>(n));
        G.values[j] = 1.0 / complex(0.5, G.t_grid[j]);
    }
    EXPECT_NEAR(inverse_mellin(G, 0.5), 1.0, 2e-3);
    EXPECT_NEAR(inverse_mellin(G, 2.0), 0.0, 2e-3);
    InverseOptions strict;
    strict.tail_threshold = 1e-3;
    EXPECT_THROW(inverse_mellin(G, 0.5, strict), CertificateError);
}

TEST(InverseMellin, Linearity) {
    auto G1 = mellin_samples(LogGridFunction::sample(c2_bump, -0.5, 1.6, 800), 0.5, 20, 0.05);
    auto G2 = mellin_samples(k0_grid(), 0.5, 20, 0.05);
    MellinSamples G = G1;
    for (std::size_t j = 0; j < G.values.size(); ++j) G.values[j] = 2.5 * G1.values[j] - 0.75 * G2.values[j];
    for (double r : {0.7, 1.5, 2.2}) {
        double lhs = inverse_mellin(G, r), rhs = 2.5 * inverse_mellin(G1, r) - 0.75 * inverse_mellin(G2, r);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(InverseMellin, RejectsAsymmetricSamples) {
    auto G = mellin_samples(k0_grid(), 0.5, 2, 0.1);
    G.values.front() *= 2.0;
    EXPECT_THROW(inverse_mellin(G, 1.0), std::invalid_argument);
    EXPECT_THROW(inverse_mellin(G, -1.0), std::domain_error);
}

TEST(MellinConvolution, Indicators) {
    auto F = indicator(-70, 70, 0.01);
    auto [lhs, rhs] = mellin_convolution_check(F, F, 0.5);
    EXPECT_LE(rel(lhs, rhs), 1e-5);
    EXPECT_LE(rel(rhs, 4.0), 1e-4);
    LogGridFunction zero{-70, 0.01, std::vector<double>(F.size(), 0.0), std::nullopt};
    auto [l0, r0] = mellin_convolution_check(F, zero, 0.5);
    EXPECT_EQ(l0, 0.0);
    EXPECT_EQ(r0, 0.0);
}

TEST(MellinConvolution, BesselWithNarrowBump) {
    double h = 0.002, r0 = 1.5, w = 0.05;
    auto K = LogGridFunction::sample([](double y) { return bessel_k0(y); }, -140, 6.5, 73251);
    auto n = static_cast<std::size_t>(std::lround(2.0 / h)) + 1;
    LogGridFunction B{-1.0, h, std::vector<double>(n, 0.0), std::nullopt};
    for (std::size_t i = 0; i < n; ++i) {
        double t = (B.y(i) - r0) / w;
        B.values[i] = std::abs(t) < 1 ? 15.0 / (16 * w) * (1 - t * t) * (1 - t * t) : 0.0;
    }
    complex s(0.5, 1.0);
    auto [lhs, rhs] = mellin_convolution_check(K, B, s);
    EXPECT_LE(rel(lhs, rhs), 1e-5);
    EXPECT_LE(rel(rhs, mellin_k0_exact(s) * std::pow(r0, -s)), 1e-3);
}

TEST(RecoverRf, ZeroRowGivesZero) {
    LogGridFunction zero{-5, 0.05, std::vector<double>(200, 0.0), std::nullopt};
    for (double r : {0.5, 1.0, 3.0}) EXPECT_EQ(recover_rf(zero, r, 0.5, 20, 0.02), 0.0);
}

TEST(RecoverRf, IntegrandMatchesMellinOfSphericalMeans) {
    Phantom ph({{{1.0, 0.0}, 0.5, 1.0, 4}}, 1.0);
    ParabolicPoint p{0.5, 1.3};
    Point x = to_cartesian(p);
    auto [rmin, rmax] = support_bounds(ph, x);
    auto psi = LogGridFunction::sample([&](double k) { return psi_direct(ph, p, k, 1e-12); }, std::log(1e-3), std::log(80.0), 400);
    std::vector<double> ks, ps;
    for (std::size_t i = 0; i < 8; ++i) {
        ks.push_back(psi.y(i));
        ps.push_back(psi.values[i]);
    }
    psi.low = fit_low_k_model(ks, ps, ph.mass(), 8, 1);
    auto rf = LogGridFunction::sample([&](double r) { return spherical_mean(ph, x, r); }, std::log(rmin) - 0.1, std::log(rmax) + 0.1, 4000);
    ContourOptions opt;
    opt.T = 4;
    opt.dt = 0.5;
    opt.adaptive = false;
    auto plan = plan_contour(psi, opt);
    for (std::size_t j = 0; j < plan.coef.size(); ++j) {
        complex s(0.5, opt.dt * static_cast<double>(j));
        // 2^s M Psi(1-s) / Gamma^2((1-s)/2) = (M Rf)(s) / 2
        EXPECT_LE(rel(plan.coef[j], mellin(rf, s) / 2.0), 1e-5) << j;
    }
}

TEST(RecoverRf, MatchesSphericalMeansFromDirectField) {
    Phantom ph({{{1.0, 0.0}, 0.5, 1.0, 4}}, 1.0);
    ParabolicPoint p{0.5, 1.3};
    Point x = to_cartesian(p);
    auto [rmin, rmax] = support_bounds(ph, x);
    auto psi = LogGridFunction::sample([&](double k) { return psi_direct(ph, p, k, 1e-13); }, std::log(1e-3), std::log(80.0), 400);
    std::vector<double> ks, ps;
    for (std::size_t i = 0; i < 8; ++i) {
        ks.push_back(psi.y(i));
        ps.push_back(psi.values[i]);
    }
    psi.low = fit_low_k_model(ks, ps, ph.mass(), 8, 1);
    ContourOptions opt;
    opt.noise = 1e-12;
    auto plan = plan_contour(psi, opt);
    double peak = 0, worst = 0, below = 0;
    for (double r = 0.05; r <= rmax + 0.5; r += 0.01) {
        double ref = spherical_mean(ph, x, r), got = recover_rf(plan, r);
        peak = std::max(peak, std::abs(ref));
        worst = std::max(worst, std::abs(got - ref));
        if (r < rmin) below = std::max(below, std::abs(got));
    }
    EXPECT_LE(worst, 1e-3 * peak) << "contour truncated at T = " << plan.T_used;
    EXPECT_LE(below, 1e-3 * peak) << "contour truncated at T = " << plan.T_used;
}
