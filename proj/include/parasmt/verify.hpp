#pragma once
/// \file verify.hpp
/// Acceptance checks A1..A10. Each check reports its measured value against a pinned threshold.

#include "extended_precision.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

#include <chrono>
#include <iomanip>
#include <functional>
#include <map>
#include <random>

namespace parasmt {

enum class CheckStatus { Pass, Fail, Skip };

struct CheckResult {
    std::string id;
    std::string title;
    CheckStatus status = CheckStatus::Fail;
    double measured = 0;
    double threshold = 0;
    double seconds = 0;
    std::string detail;
};

inline const char* status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "PASS";
        case CheckStatus::Fail: return "FAIL";
        default: return "SKIP";
    }
}

/// Three significant digits for report text
inline std::string short_number(double v) {
    std::ostringstream out;
    out << std::setprecision(3) << v;
    return out.str();
}

/// One report line: "A1 PASS measured=... threshold=... time=...s title; detail"
inline std::string format_check(const CheckResult& r) {
    std::ostringstream out;
    out << r.id << ' ' << status_name(r.status) << " measured=" << short_number(r.measured)
        << " threshold=" << short_number(r.threshold) << " time=" << std::fixed << std::setprecision(1) << r.seconds << "s "
        << r.title;
    if (!r.detail.empty()) out << "; " << r.detail;
    return out.str();
}

/// Pinned acceptance tolerances
namespace acceptance {
inline constexpr double k0_series_rel = 1e-8;
inline constexpr double k0_series_seconds = 10;
inline constexpr double orthogonality_rel = 1e-8;
inline constexpr double orthogonality_seconds = 5;
inline constexpr double mellin_k0_rel = 1e-7;
inline constexpr double mellin_k0_seconds = 5;
inline constexpr double coefficient_rel = 1e-6;
inline constexpr double coefficient_seconds = 120;
inline constexpr double field_rel = 1e-5;
inline constexpr double field_floor = 1e-12;
inline constexpr double field_seconds = 120;
inline constexpr double recovery_max = 1e-2;
inline constexpr double recovery_rms = 2e-3;
inline constexpr double recovery_seconds = 600;
inline constexpr double sigma_factor = 2;
inline constexpr double support_rel = 1e-3;
inline constexpr double round_trip_abs = 1e-5;
inline constexpr double convolution_rel = 1e-5;
}  // namespace acceptance

class Verifier {
public:
    explicit Verifier(RunConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.phantoms.size() < 2) throw ConfigError({"[phantom]: verification needs two phantom sections"});
        if (cfg_.eval_points.empty()) throw ConfigError({"[eval]: verification needs evaluation points"});
    }

    static const std::vector<std::string>& ids() {
        static const std::vector<std::string> v{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"};
        return v;
    }

    /// Result skeleton carrying the criterion's title and threshold
    static CheckResult blank(const std::string& id) {
        static const std::map<std::string, std::pair<std::string, double>> spec{
            {"A1", {"K0 parabolic expansion vs bessel_k0, 50 pairs x 3 k", acceptance::k0_series_rel}},
            {"A2", {"Hermite orthogonality on the xi grid, m,n <= 12", acceptance::orthogonality_rel}},
            {"A3", {"Mellin transform of K0 vs 2^(s-2) Gamma^2(s/2)", acceptance::mellin_k0_rel}},
            {"A4", {"coefficient equivalence, m <= 8, k in {0.5, 1, 2}, two phantoms", acceptance::coefficient_rel}},
            {"A5", {"field identity on the eval grid x 6 k-values, two phantoms", acceptance::field_rel}},
            {"A6", {"exterior recovery vs direct spherical means, two phantoms", acceptance::recovery_max}},
            {"A7", {"sigma independence, sigma in {0.25, 0.75} vs 0.5", acceptance::sigma_factor * acceptance::recovery_max}},
            {"A8", {"support property below r_min", acceptance::support_rel}},
            {"A9", {"Mellin round trip on a C2 bump in [1, 3] and convolution identity", acceptance::round_trip_abs}},
            {"A10", {"determinism across runs and thread counts 1 and 8", 0}},
        };
        const auto& [title, threshold] = spec.at(id);
        return {id, title, CheckStatus::Fail, 0, threshold};
    }

    CheckResult run(const std::string& id) {
        static const std::map<std::string, CheckResult (Verifier::*)()> table{
            {"A1", &Verifier::a1}, {"A2", &Verifier::a2}, {"A3", &Verifier::a3}, {"A4", &Verifier::a4},
            {"A5", &Verifier::a5}, {"A6", &Verifier::a6}, {"A7", &Verifier::a7}, {"A8", &Verifier::a8},
            {"A9", &Verifier::a9}, {"A10", &Verifier::a10}};
        auto it = table.find(id);
        if (it == table.end()) throw std::invalid_argument("unknown acceptance criterion '" + id + "'");
        auto t0 = std::chrono::steady_clock::now();
        CheckResult r = blank(id);
        try {
            r = (this->*(it->second))();
        } catch (const TruncationError& e) {
            bool dependent = id == "A6" || id == "A7" || id == "A8" || id == "A10";
            r.status = dependent ? CheckStatus::Skip : CheckStatus::Fail;
            r.detail = std::string(dependent ? "skipped, " : "") + "truncation failure: " + e.what() +
                       " (last term ratio " + short_number(e.last_ratio()) + ")";
        } catch (const std::exception& e) {
            r.status = CheckStatus::Fail;
            r.detail = std::string("error: ") + e.what();
        }
        r.id = id;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    /// Expansion identity on random admissible pairs
    CheckResult a1() {
        auto r = blank("A1");
        auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 gen(20261016);
        std::uniform_real_distribution<double> uxi(-3, 3), ueta(0.2, 3);
        int pairs = 0, escalated = 0;
        while (pairs < 50) {
            ParabolicPoint p{uxi(gen), ueta(gen)}, q{uxi(gen), ueta(gen)};
            if (q.eta > p.eta) std::swap(p, q);
            if (p.eta - q.eta < 0.1) continue;
            for (double k : {0.5, 1.0, 4.0}) {
                auto s = k0_series_adaptive(p, q, k, 1e-12);
                if (s.digits > 17) ++escalated;
                double ref = bessel_k0(k * distance(to_cartesian(p), to_cartesian(q)));
                r.measured = std::max(r.measured, std::abs(s.value - ref) / ref);
            }
            ++pairs;
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.detail = std::to_string(escalated) + " sums in extended precision";
        finish(r, r.measured <= r.threshold, sec, acceptance::k0_series_seconds);
        return r;
    }

    /// Weighted Hermite orthogonality by the trapezoid rule on the configured xi grid
    CheckResult a2() {
        auto r = blank("A2");
        auto t0 = std::chrono::steady_clock::now();
        auto xi = cfg_.xi_grid();
        double h = uniform_step(xi, "A2");
        double worst_off = 0;
        for (double k : {0.5, 1.0, 2.0}) {
            double sk = std::sqrt(k);
            std::vector<std::vector<double>> H(13, std::vector<double>(xi.size()));
            std::vector<double> w(xi.size());
            for (std::size_t i = 0; i < xi.size(); ++i) {
                w[i] = h * std::exp(-k * xi[i] * xi[i]) * (i == 0 || i + 1 == xi.size() ? 0.5 : 1.0);
                for (int n = 0; n <= 12; ++n) H[n][i] = hermite_poly<double>(n, sk * xi[i]);
            }
            std::vector<double> diag(13);
            for (int n = 0; n <= 12; ++n) diag[n] = std::sqrt(std::numbers::pi / k) * std::ldexp(std::tgamma(n + 1.0), n);
            for (int n = 0; n <= 12; ++n)
                for (int m = 0; m <= n; ++m) {
                    CompensatedSum<double> sum;
                    for (std::size_t i = 0; i < xi.size(); ++i) sum += w[i] * H[n][i] * H[m][i];
                    if (m == n) r.measured = std::max(r.measured, std::abs(sum.value() - diag[n]) / diag[n]);
                    else worst_off = std::max(worst_off, std::abs(sum.value()) / std::min(diag[n], diag[m]));
                }
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.detail = "off-diagonal/diagonal " + short_number(worst_off);
        finish(r, r.measured <= r.threshold && worst_off <= acceptance::orthogonality_rel, sec, acceptance::orthogonality_seconds);
        return r;
    }

    /// Numeric Mellin transform of sampled K0
    CheckResult a3() {
        auto r = blank("A3");
        auto t0 = std::chrono::steady_clock::now();
        auto g = LogGridFunction::sample([](double y) { return bessel_k0(y); }, -140, 6.5, 2933);
        for (complex s : {complex(0.3, 0), complex(0.5, 2), complex(0.9, 0)}) {
            complex exact = std::pow(2.0, s - 2.0) * std::exp(2.0 * log_gamma_complex(s / 2.0));
            r.measured = std::max(r.measured, std::abs(mellin(g, s) - exact) / std::abs(exact));
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        finish(r, r.measured <= r.threshold, sec, acceptance::mellin_k0_seconds);
        return r;
    }

    /// Data-side coefficients vs phantom-side area integrals
    CheckResult a4() {
        auto r = blank("A4");
        auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            CoefficientOptions opt;
            opt.m_max = 8;
            auto t = build_coefficient_table(data(ph), {0.5, 1.0, 2.0}, opt);
            for (std::size_t j = 0; j < 3; ++j) {
                auto ref = phantom_coefficients(cfg_.phantoms[ph], t.k_grid()[j], 8);
                double scale = 0;
                for (double v : ref) scale = std::max(scale, std::abs(v));
                for (int m = 0; m <= 8; ++m) {
                    double got = t.normalized(j)[m];
                    // entries that vanish by symmetry are compared against the largest order
                    double den = std::abs(ref[m]) > 1e-8 * scale ? std::abs(ref[m]) : scale;
                    double e = std::abs(got - ref[m]) / den;
                    r.measured = std::max(r.measured, e);
                    ok = ok && e <= r.threshold;
                }
            }
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        finish(r, ok, sec, acceptance::coefficient_seconds);
        return r;
    }

    /// Series field vs direct K0 integral of the spherical means
    CheckResult a5() {
        auto r = blank("A5");
        auto t0 = std::chrono::steady_clock::now();
        auto ks = logspace(std::max(cfg_.k.min, 0.1), std::min(cfg_.k.max, 8.0), 6);
        std::size_t compared = 0;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            CoefficientOptions opt;
            opt.m_max = cfg_.m_max;
            auto t = build_coefficient_table(data(ph), ks, opt);
            auto field = build_psi_field(t, cfg_.eval_points, cfg_.series_tol);
            Matrix<double> direct(cfg_.eval_points.size(), ks.size(), 0.0);
            parallel_for(direct.data().size(), [&](std::size_t q) {
                std::size_t i = q / ks.size(), j = q % ks.size();
                direct(i, j) = psi_direct(cfg_.phantoms[ph], cfg_.eval_points[i], ks[j], 1e-12);
            });
            double peak = 0;
            for (double v : direct.data()) peak = std::max(peak, std::abs(v));
            for (std::size_t q = 0; q < direct.data().size(); ++q) {
                double d = direct.data()[q];
                if (std::abs(d) <= acceptance::field_floor * peak) continue;
                r.measured = std::max(r.measured, std::abs(field.values.data()[q] - d) / std::abs(d));
                ++compared;
            }
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.detail = std::to_string(compared) + " entries above the floor";
        finish(r, r.measured <= r.threshold, sec, acceptance::field_seconds);
        return r;
    }

    /// End-to-end recovery vs directly computed spherical means
    CheckResult a6() {
        auto r = blank("A6");
        auto t0 = std::chrono::steady_clock::now();
        double rms = 0, tmin = std::numeric_limits<double>::infinity(), tmax = 0;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            const auto& res = extraction(ph);
            auto e = errors(res.values, direct(ph));
            r.measured = std::max(r.measured, e.first);
            rms = std::max(rms, e.second);
            for (const auto& p : res.plans) {
                tmin = std::min(tmin, p.T_used);
                tmax = std::max(tmax, p.T_used);
            }
        }
        std::vector<std::string> missing;
        for (std::size_t ph = 0; ph < 2; ++ph)
            for (const auto& m : missing_certificates(exterior_csv(cfg_, extraction(ph))))
                missing.push_back(m);
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.detail = "rms " + short_number(rms) + " (threshold " + short_number(acceptance::recovery_rms) + "), contour T in [" +
                   short_number(tmin) + ", " + short_number(tmax) + "]";
        for (const auto& m : missing) r.detail += ", missing certificate " + m;
        finish(r, r.measured <= r.threshold && rms <= acceptance::recovery_rms && missing.empty(), sec, acceptance::recovery_seconds);
        return r;
    }

    /// Recovery at sigma 0.25 and 0.75 against sigma 0.5
    CheckResult a7() {
        auto r = blank("A7");
        double rms = 0;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            const auto& base = extraction(ph);
            auto rows = psi_rows(base.psi, base.mass, limits_, nullptr);
            double peak = peak_of(direct(ph));
            for (double sigma : {0.25, 0.75}) {
                ExtractResult alt;
                alt.psi = base.psi;
                recover_all(cfg_, rows, alt, sigma, limits_);
                auto e = errors(alt.values, base.values, peak);
                r.measured = std::max(r.measured, e.first);
                rms = std::max(rms, e.second);
            }
        }
        r.detail = "rms " + short_number(rms) + " (threshold " + short_number(acceptance::sigma_factor * acceptance::recovery_rms) + ")";
        r.status = r.measured <= r.threshold && rms <= acceptance::sigma_factor * acceptance::recovery_rms ? CheckStatus::Pass
                                                                                                           : CheckStatus::Fail;
        return r;
    }

    /// Recovered values inside the zero region r < r_min of each point
    CheckResult a8() {
        auto r = blank("A8");
        std::size_t cells = 0;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            const auto& res = extraction(ph);
            double peak = peak_of(direct(ph));
            for (std::size_t i = 0; i < res.psi.points.size(); ++i) {
                double rmin = support_bounds(cfg_.phantoms[ph], to_cartesian(res.psi.points[i])).first;
                for (std::size_t j = 0; j < res.radii.size(); ++j)
                    if (res.radii[j] < rmin) {
                        r.measured = std::max(r.measured, std::abs(res.values(i, j)) / peak);
                        ++cells;
                    }
            }
        }
        r.detail = std::to_string(cells) + " cells below r_min";
        r.status = cells > 0 && r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
        return r;
    }

    /// Mellin round trip on a C2 bump and the two-sided convolution identity
    CheckResult a9() {
        auto r = blank("A9");
        auto bump = [](double y) {
            double a = 0.5 * std::log(3.0), v = (std::log(y) - a) / a;
            double q = 1 - v * v;
            return q > 0 ? q * q * q : 0.0;
        };
        auto G = mellin_samples(LogGridFunction::sample(bump, -0.5, 1.6, 4201), 0.5, 200, 0.05);
        auto radii = linspace(0.8, 3.2, 241);
        std::vector<double> err(radii.size());
        parallel_for(radii.size(), [&](std::size_t i) { err[i] = std::abs(inverse_mellin(G, radii[i]) - bump(radii[i])); });
        r.measured = *std::max_element(err.begin(), err.end());
        auto K = LogGridFunction::sample([](double y) { return bessel_k0(y); }, -140, 6.5, 73251);
        auto B = LogGridFunction::sample(bump, -0.1, 1.2, 651);
        double conv = 0;
        for (complex s : {complex(0.5, 0), complex(0.5, 1), complex(0.3, -2)}) {
            auto [lhs, rhs] = mellin_convolution_check(K, B, s);
            conv = std::max(conv, std::abs(lhs - rhs) / std::abs(rhs));
        }
        r.detail = "convolution two-sided " + short_number(conv) + " (threshold " + short_number(acceptance::convolution_rel) + ")";
        r.status = r.measured <= r.threshold && conv <= acceptance::convolution_rel ? CheckStatus::Pass : CheckStatus::Fail;
        return r;
    }

    /// Byte-identical outputs across repeated runs and thread counts
    CheckResult a10() {
        auto r = blank("A10");
        struct Restore {
            ~Restore() { set_thread_count(0); }
        } restore;
        auto once = [&](unsigned threads) {
            set_thread_count(threads);
            auto d = simulate(cfg_, 0);
            auto res = run_extract(cfg_, d, limits_);
            return boundary_csv(d) + exterior_csv(cfg_, res) + coefficients_csv(res.table, cfg_.export_m_max) + psi_csv(res.psi);
        };
        auto a = once(1), b = once(1), c = once(8);
        std::size_t diff = (a != b) + (a != c);
        r.measured = static_cast<double>(diff);
        r.detail = std::to_string(a.size()) + " bytes per run";
        r.status = diff == 0 ? CheckStatus::Pass : CheckStatus::Fail;
        return r;
    }

    /// Certificates of the recovery runs, one line each
    std::vector<std::string> certificate_lines() {
        std::vector<std::string> out;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            if (!extract_[ph]) continue;
            for (const auto& c : extract_[ph]->certificates)
                out.push_back("phantom " + std::to_string(ph + 1) + " " + c.name + "=" + format_number(c.value));
        }
        return out;
    }

    /// Exterior files with the direct oracle column for every finished recovery run
    std::vector<std::filesystem::path> write_exterior(const std::filesystem::path& dir) {
        std::vector<std::filesystem::path> out;
        for (std::size_t ph = 0; ph < 2; ++ph) {
            if (!extract_[ph]) continue;
            auto path = dir / ("exterior_phantom" + std::to_string(ph + 1) + ".csv");
            write_text(path, exterior_csv(cfg_, *extract_[ph], &direct(ph)));
            out.push_back(path);
        }
        return out;
    }

private:
    static void finish(CheckResult& r, bool ok, double seconds, double limit) {
        bool fast = seconds <= limit;
        if (!fast) r.detail += (r.detail.empty() ? "" : ", ") + std::string("runtime above ") + short_number(limit) + "s";
        r.status = ok && fast ? CheckStatus::Pass : CheckStatus::Fail;
    }

    const BoundaryData& data(std::size_t ph) {
        auto& slot = data_[ph];
        if (!slot) slot = simulate(cfg_, ph);
        return *slot;
    }

    const ExtractResult& extraction(std::size_t ph) {
        auto& slot = extract_[ph];
        if (!slot) slot = run_extract(cfg_, data(ph), limits_);
        return *slot;
    }

    const Matrix<double>& direct(std::size_t ph) {
        auto& slot = direct_[ph];
        if (!slot) {
            auto radii = cfg_.eval_radii();
            Matrix<double> m(cfg_.eval_points.size(), radii.size(), 0.0);
            parallel_for(m.data().size(), [&](std::size_t q) {
                std::size_t i = q / radii.size(), j = q % radii.size();
                m(i, j) = spherical_mean(cfg_.phantoms[ph], to_cartesian(cfg_.eval_points[i]), radii[j]);
            });
            slot = std::move(m);
        }
        return *slot;
    }

    static double peak_of(const Matrix<double>& m) {
        double p = 0;
        for (double v : m.data()) p = std::max(p, std::abs(v));
        return p;
    }

    /// max and RMS of a - b relative to the peak of b (or the given peak)
    static std::pair<double, double> errors(const Matrix<double>& a, const Matrix<double>& b, double peak = 0) {
        if (peak <= 0) peak = peak_of(b);
        double worst = 0, sq = 0;
        for (std::size_t q = 0; q < a.data().size(); ++q) {
            double d = std::abs(a.data()[q] - b.data()[q]);
            worst = std::max(worst, d);
            sq += d * d;
        }
        return {worst / peak, std::sqrt(sq / static_cast<double>(a.data().size())) / peak};
    }

    RunConfig cfg_;
    ExtractLimits limits_;
    std::map<std::size_t, std::optional<BoundaryData>> data_;
    std::map<std::size_t, std::optional<ExtractResult>> extract_;
    std::map<std::size_t, std::optional<Matrix<double>>> direct_;
};

}  // namespace parasmt
