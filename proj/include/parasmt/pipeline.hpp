#pragma once
/// \file pipeline.hpp
/// Stage orchestration: boundary simulation, exterior extraction with certificates, CSV
/// exports and file comparison.

#include "config.hpp"
#include "expansion.hpp"
#include "io.hpp"
#include "mellin.hpp"

#include <filesystem>
#include <sstream>

namespace parasmt {

/// Named numerical certificate carried in output headers
struct Certificate {
    std::string name;
    double value = 0;
};

/// Thresholds applied during extraction
struct ExtractLimits {
    double data_resolution = 1e-8;   ///< relative interpolation error of the row integrals
    double xi_endpoint = 1e-12;      ///< |D| at the xi-grid ends relative to max |D|
    double mellin_endpoint = 1e-13;  ///< weighted Psi at k_max relative to its maximum
    double psi_floor = 1e-13;        ///< absolute series floor, relative to the largest data integral at k_min
    double low_k_fit_span = 0.65;    ///< width in ln k of the small-k fit window
    int low_k_order = 3;
};

/// Everything extraction produces
struct ExtractResult {
    CoefficientTable table;
    PsiField psi;
    std::vector<double> radii;
    Matrix<double> values;  ///< recovered (Rf)(x(point), radius), [point][radius]
    std::vector<ContourPlan> plans;
    std::vector<Certificate> certificates;
    double mass = 0;
};

/// Integral over r of one boundary row, exact for its cubic-spline interpolant
inline double row_mass(const BoundaryData& data, std::size_t i) {
    const auto& row = data.rows.at(i);
    if (row.values.empty()) return 0;
    std::size_t a = row.first > 0 ? row.first - 1 : 0;
    std::size_t b = std::min(data.r_grid.size() - 1, row.first + row.values.size());
    std::vector<double> x(data.r_grid.begin() + a, data.r_grid.begin() + b + 1), y;
    for (std::size_t j = a; j <= b; ++j) y.push_back(data.value(i, j));
    if (x.size() < 2) return 0;
    CubicSpline s(x, y);
    CompensatedSum<double> sum;
    for (std::size_t j = 0; j < s.intervals(); ++j) {
        double h = x[j + 1] - x[j];
        sum += h * (s.c0(j) + h * (s.c1(j) / 2 + h * (s.c2(j) / 3 + h * s.c3(j) / 4)));
    }
    return sum.value();
}

/// Total mass of the phantom from the row closest to xi = 0
inline double data_mass(const BoundaryData& data) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < data.xi_grid.size(); ++i)
        if (std::abs(data.xi_grid[i]) < std::abs(data.xi_grid[best])) best = i;
    return row_mass(data, best);
}

namespace detail {

inline void certify(std::vector<Certificate>& out, const std::string& stage, double value, double threshold) {
    out.push_back({stage, value});
    if (!(value <= threshold)) throw CertificateError(stage, value, threshold);
}

}  // namespace detail

/// Psi rows as log-grid functions with their small-k continuation
inline std::vector<LogGridFunction> psi_rows(const PsiField& field, double mass, const ExtractLimits& lim, double* worst_residual) {
    std::vector<LogGridFunction> rows;
    double worst = 0;
    int n_fit = 0;
    for (double k : field.k_grid)
        if (std::log(k / field.k_grid.front()) <= lim.low_k_fit_span * (1 + 1e-12)) ++n_fit;
    n_fit = std::max(n_fit, 2 * lim.low_k_order + 3);
    for (std::size_t i = 0; i < field.points.size(); ++i) {
        std::vector<double> v(field.values.row(i), field.values.row(i) + field.k_grid.size());
        auto g = LogGridFunction::from_log_grid(field.k_grid, v);
        double resid = 0;
        if (mass != 0 || v.front() != 0) g.low = fit_low_k_model(field.k_grid, v, mass, n_fit, lim.low_k_order, &resid);
        worst = std::max(worst, resid);
        rows.push_back(std::move(g));
    }
    if (worst_residual) *worst_residual = worst;
    return rows;
}

/// Recover the spherical means at every (point, radius) from Psi rows
inline void recover_all(const RunConfig& cfg, const std::vector<LogGridFunction>& rows, ExtractResult& res, double sigma,
                        const ExtractLimits& lim) {
    ContourOptions opt;
    opt.sigma = sigma;
    opt.T = cfg.T;
    opt.dt = cfg.dt;
    opt.adaptive = cfg.adaptive;
    opt.noise = cfg.noise;
    opt.tail_threshold = std::numeric_limits<double>::infinity();
    MellinOptions mopt;
    mopt.endpoint_threshold = lim.mellin_endpoint;
    res.radii = cfg.eval_radii();
    res.values = Matrix<double>(rows.size(), res.radii.size(), 0.0);
    res.plans.assign(rows.size(), {});
    parallel_for(rows.size(), [&](std::size_t i) { res.plans[i] = plan_contour(rows[i], opt, mopt); });
    parallel_for(rows.size() * res.radii.size(), [&](std::size_t q) {
        std::size_t i = q / res.radii.size(), j = q % res.radii.size();
        res.values(i, j) = recover_rf(res.plans[i], res.radii[j]);
    });
    double tail = 0, tmin = std::numeric_limits<double>::infinity(), tmax = 0;
    for (const auto& p : res.plans) {
        tail = std::max(tail, p.tail_ratio);
        tmin = std::min(tmin, p.T_used);
        tmax = std::max(tmax, p.T_used);
    }
    res.certificates.push_back({"contour_T_min", tmin});
    res.certificates.push_back({"contour_T_max", tmax});
    detail::certify(res.certificates, "contour_tail", tail, cfg.tail_threshold);
}

/// Full extraction: coefficients, Psi at the evaluation points, Mellin recovery
inline ExtractResult run_extract(const RunConfig& cfg, const BoundaryData& data, const ExtractLimits& lim = {},
                                 std::optional<double> sigma = std::nullopt) {
    ExtractResult res;
    auto k = cfg.k_grid();
    double scale = data_k0_peak(data, k.front());
    double est = 0;
    for (double kk : {k.front(), std::sqrt(k.front() * k.back()), k.back()})
        est = std::max(est, data_k0_resolution_estimate(data, kk, scale));
    res.certificates.push_back({"data_resolution", est});
    if (!(est <= lim.data_resolution))
        throw GridResolutionError("data_resolution: r-grid too coarse, interpolation error estimate " + format_number(est) +
                                      " above " + format_number(lim.data_resolution),
                                  est);
    CoefficientOptions copt;
    copt.m_max = cfg.m_max;
    copt.endpoint_threshold = std::numeric_limits<double>::infinity();
    CoefficientReport rep;
    res.table = build_coefficient_table(data, k, copt, &rep);
    detail::certify(res.certificates, "xi_endpoint", rep.endpoint_ratio, lim.xi_endpoint);
    res.certificates.push_back({"m_available_min", static_cast<double>(*std::min_element(rep.m_available.begin(), rep.m_available.end()))});
    double floor = lim.psi_floor * scale;
    res.certificates.push_back({"psi_floor", floor});
    res.psi = build_psi_field(res.table, cfg.eval_points, cfg.series_tol, floor);
    int mu = 0;
    for (int m : res.psi.m_used.data()) mu = std::max(mu, m);
    res.certificates.push_back({"series_tol", cfg.series_tol});
    res.certificates.push_back({"m_used_max", static_cast<double>(mu)});
    res.mass = data_mass(data);
    res.certificates.push_back({"data_mass", res.mass});
    double resid = 0;
    auto rows = psi_rows(res.psi, res.mass, lim, &resid);
    res.certificates.push_back({"low_k_residual", resid});
    double right = 0;
    for (const auto& r : rows) right = std::max(right, mellin_endpoint_ratios(r, 1 - cfg.sigma).second);
    detail::certify(res.certificates, "mellin_endpoint", right, lim.mellin_endpoint);
    recover_all(cfg, rows, res, sigma.value_or(cfg.sigma), lim);
    return res;
}

/// Boundary data of the first phantom on the configured grids
inline BoundaryData simulate(const RunConfig& cfg, std::size_t phantom_index = 0) {
    if (phantom_index >= cfg.phantoms.size()) throw ConfigError({"[phantom]: section " + std::to_string(phantom_index + 1) + " missing"});
    return sample_boundary(cfg.phantoms[phantom_index], Parabola(cfg.eta0), cfg.xi_grid(), cfg.r_grid());
}

/// Certificates every exterior file must carry
inline const std::vector<std::string>& required_certificates() {
    static const std::vector<std::string> v{"data_resolution", "xi_endpoint", "m_used_max", "mellin_endpoint", "contour_tail"};
    return v;
}

/// Required certificate names absent from an exterior file's header
inline std::vector<std::string> missing_certificates(const std::string& exterior_text) {
    std::vector<std::string> out;
    for (const auto& name : required_certificates())
        if (exterior_text.find("# certificate " + name + "=") == std::string::npos) out.push_back(name);
    return out;
}

inline std::string boundary_csv(const BoundaryData& data) {
    std::ostringstream out;
    write_boundary_csv(out, data);
    return out.str();
}

/// Exterior CSV; direct values add the value_direct and rel_err columns
inline std::string exterior_csv(const RunConfig& cfg, const ExtractResult& res, const Matrix<double>* direct = nullptr) {
    std::ostringstream out;
    out << "# exterior spherical means recovered from boundary data on eta0 = " << format_number(cfg.eta0) << "\n";
    out << "# sigma=" << format_number(res.plans.empty() ? cfg.sigma : res.plans.front().sigma) << " dt=" << format_number(cfg.dt)
        << " T=" << format_number(cfg.T) << "\n";
    for (const auto& c : res.certificates) out << "# certificate " << c.name << "=" << format_number(c.value) << "\n";
    double peak = 0;
    if (direct)
        for (double v : direct->data()) peak = std::max(peak, std::abs(v));
    out << (direct ? "xi,eta,r,value_recovered,value_direct,rel_err\n" : "xi,eta,r,value_recovered\n");
    for (std::size_t i = 0; i < res.psi.points.size(); ++i)
        for (std::size_t j = 0; j < res.radii.size(); ++j) {
            const auto& p = res.psi.points[i];
            out << format_number(p.xi) << ',' << format_number(p.eta) << ',' << format_number(res.radii[j]) << ','
                << format_number(res.values(i, j));
            if (direct) {
                double d = (*direct)(i, j);
                out << ',' << format_number(d) << ',' << format_number(peak > 0 ? std::abs(res.values(i, j) - d) / peak : 0.0);
            }
            out << '\n';
        }
    return out.str();
}

/// "m,k,lambda" for m <= export_m_max; orders whose Lambda leaves the double range are listed as comments
inline std::string coefficients_csv(const CoefficientTable& t, int export_m_max) {
    std::ostringstream out;
    out << "# coefficients Lambda_m(k) on eta0 = " << format_number(t.eta0()) << "\n";
    std::ostringstream skipped;
    std::ostringstream body;
    for (std::size_t j = 0; j < t.k_grid().size(); ++j)
        for (int m = 0; m <= std::min(export_m_max, t.m_max(j)); ++m) {
            try {
                double l = t.lambda(m, j);
                body << m << ',' << format_number(t.k_grid()[j]) << ',' << format_number(l) << '\n';
            } catch (const std::range_error&) {
                skipped << "# out of range: m=" << m << " k=" << format_number(t.k_grid()[j]) << '\n';
            }
        }
    out << skipped.str() << "m,k,lambda\n" << body.str();
    return out.str();
}

inline std::string psi_csv(const PsiField& f) {
    std::ostringstream out;
    out << "xi,eta,k,psi,m_used\n";
    for (std::size_t i = 0; i < f.points.size(); ++i)
        for (std::size_t j = 0; j < f.k_grid.size(); ++j)
            out << format_number(f.points[i].xi) << ',' << format_number(f.points[i].eta) << ',' << format_number(f.k_grid[j])
                << ',' << format_number(f.values(i, j)) << ',' << f.m_used(i, j) << '\n';
    return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto out = open_output(path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::filesystem::path run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    auto path = out_dir / cfg.boundary;
    write_text(path, boundary_csv(simulate(cfg)));
    return path;
}

inline BoundaryData read_boundary(const RunConfig& cfg, const std::string& path) {
    auto in = open_input(path);
    return read_boundary_csv(in, cfg.eta0, cfg.xi_grid(), cfg.r_grid(), path);
}

/// extraction from a boundary file; writes exterior, coefficient and Psi CSVs
inline ExtractResult run_extract(const RunConfig& cfg, const std::string& boundary_path, const std::filesystem::path& out_dir) {
    auto res = run_extract(cfg, read_boundary(cfg, boundary_path));
    write_text(out_dir / cfg.exterior, exterior_csv(cfg, res));
    write_text(out_dir / cfg.coefficients, coefficients_csv(res.table, cfg.export_m_max));
    write_text(out_dir / cfg.psi, psi_csv(res.psi));
    return res;
}

/// Differences between two exterior files
struct CompareResult {
    double max_rel = 0, rms_rel = 0;
    double worst_xi = 0, worst_eta = 0, worst_r = 0;
    std::size_t cells = 0;
};

inline CompareResult compare(const CsvTable& a, const CsvTable& b, const std::string& col_a = "value_recovered",
                             const std::string& col_b = "value_recovered") {
    if (a.rows.size() != b.rows.size()) throw SchemaError("compare: files have different numbers of rows");
    std::size_t xa = a.column("xi"), ea = a.column("eta"), ra = a.column("r"), va = a.column(col_a);
    std::size_t xb = b.column("xi"), eb = b.column("eta"), rb = b.column("r"), vb = b.column(col_b);
    double peak = 0;
    for (const auto& row : a.rows) peak = std::max(peak, std::abs(row[va]));
    CompareResult res;
    res.cells = a.rows.size();
    double sq = 0, worst = -1;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& p = a.rows[i];
        const auto& q = b.rows[i];
        if (p[xa] != q[xb] || p[ea] != q[eb] || p[ra] != q[rb])
            throw SchemaError("compare: grid mismatch at row " + std::to_string(i + 1));
        double d = std::abs(p[va] - q[vb]);
        sq += d * d;
        if (d > worst) {
            worst = d;
            res.worst_xi = p[xa];
            res.worst_eta = p[ea];
            res.worst_r = p[ra];
        }
    }
    double norm = peak > 0 ? peak : 1;
    res.max_rel = std::max(worst, 0.0) / norm;
    res.rms_rel = res.cells ? std::sqrt(sq / static_cast<double>(res.cells)) / norm : 0;
    return res;
}

}  // namespace parasmt
