#pragma once
/// \file config.hpp
/// Run configuration: sectioned "key = value" text with '#' comments.
///
///     [grid]       eta0, xi_min, xi_max, xi_count, r_min, r_max, r_count
///     [frequency]  k_min, k_max, k_count, m_max, series_tol
///     [contour]    sigma, T, dt, adaptive, noise, tail_threshold
///     [eval]       xi = ..., eta = ... (tensor grid) and/or point = xi eta (repeatable);
///                  r_min, r_max, r_count
///     [phantom]    margin, bump = cx cy R A p (repeatable); the section may repeat
///     [output]     boundary, exterior, coefficients, psi, report, export_m_max

#include "core.hpp"
#include "forward.hpp"
#include "geometry.hpp"
#include "io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace parasmt {

struct GridSpec {
    double min = 0, max = 1;
    std::size_t count = 2;
};

struct RunConfig {
    double eta0 = 1;
    GridSpec xi{-12, 12, 481}, r{0, 80, 8001};
    GridSpec k{0.05, 50, 240};
    int m_max = 20000;
    double series_tol = 1e-10;
    double sigma = 0.5, T = 400, dt = 0.02;
    bool adaptive = true;
    double noise = 1e-10, tail_threshold = 1;
    std::vector<ParabolicPoint> eval_points;
    GridSpec eval_r{0.05, 6, 40};
    std::vector<Phantom> phantoms;
    std::string boundary = "boundary.csv", exterior = "exterior.csv", coefficients = "coefficients.csv",
                psi = "psi.csv", report = "report.txt";
    int export_m_max = 32;

    std::vector<double> xi_grid() const { return linspace(xi.min, xi.max, xi.count); }
    std::vector<double> r_grid() const { return linspace(r.min, r.max, r.count); }
    std::vector<double> k_grid() const { return logspace(k.min, k.max, k.count); }
    std::vector<double> eval_radii() const { return linspace(eval_r.min, eval_r.max, eval_r.count); }
    const Phantom& phantom() const {
        if (phantoms.empty()) throw ConfigError({"[phantom]: no phantom section"});
        return phantoms.front();
    }
};

namespace detail {

struct RawSection {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<int> lines;
};

inline std::vector<RawSection> parse_sections(std::istream& in, const std::string& source) {
    std::vector<RawSection> out;
    std::string text;
    int lineno = 0;
    while (std::getline(in, text)) {
        ++lineno;
        auto hash = text.find('#');
        if (hash != std::string::npos) text.resize(hash);
        std::string t = trim(text);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError({source + ":" + std::to_string(lineno) + ": malformed section header"});
            out.push_back({trim(t.substr(1, t.size() - 2)), lineno, {}, {}});
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError({source + ":" + std::to_string(lineno) + ": expected 'key = value'"});
        if (out.empty()) throw ConfigError({source + ":" + std::to_string(lineno) + ": entry outside a section"});
        out.back().entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        out.back().lines.push_back(lineno);
    }
    return out;
}

}  // namespace detail

/// Parse and validate a configuration; every problem found is listed in the ConfigError
inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
    RunConfig cfg;
    std::vector<std::string> errors;
    auto sections = detail::parse_sections(in, source);
    std::vector<double> eval_xi, eval_eta;
    std::vector<ParabolicPoint> explicit_points;
    struct PhantomSpec {
        double margin = -1;
        std::vector<Bump> bumps;
        int line = 0;
    };
    std::vector<PhantomSpec> phantom_specs;

    for (const auto& sec : sections) {
        if (sec.name == "phantom") phantom_specs.push_back({-1, {}, sec.line});
        for (std::size_t e = 0; e < sec.entries.size(); ++e) {
            const auto& [key, value] = sec.entries[e];
            std::string where = source + ":" + std::to_string(sec.lines[e]) + ": [" + sec.name + "] " + key;
            auto num = [&](double& dst) {
                try {
                    dst = parse_number(value, where);
                } catch (const SchemaError&) {
                    errors.push_back(where + ": not a number '" + value + "'");
                }
            };
            auto count = [&](std::size_t& dst) {
                double v = 0;
                try {
                    v = parse_number(value, where);
                } catch (const SchemaError&) {
                    errors.push_back(where + ": not a number '" + value + "'");
                    return;
                }
                if (v < 2 || v != std::floor(v) || v > 1e8) errors.push_back(where + ": must be an integer >= 2");
                else dst = static_cast<std::size_t>(v);
            };
            auto list = [&](std::vector<double>& dst) {
                std::string v = value;
                for (char& c : v)
                    if (c == ',') c = ' ';
                for (const auto& tok : split_whitespace(v)) {
                    try {
                        dst.push_back(parse_number(tok, where));
                    } catch (const SchemaError&) {
                        errors.push_back(where + ": not a number '" + tok + "'");
                    }
                }
            };
            bool known = true;
            if (sec.name == "grid") {
                if (key == "eta0") num(cfg.eta0);
                else if (key == "xi_min") num(cfg.xi.min);
                else if (key == "xi_max") num(cfg.xi.max);
                else if (key == "xi_count") count(cfg.xi.count);
                else if (key == "r_min") num(cfg.r.min);
                else if (key == "r_max") num(cfg.r.max);
                else if (key == "r_count") count(cfg.r.count);
                else known = false;
            } else if (sec.name == "frequency") {
                if (key == "k_min") num(cfg.k.min);
                else if (key == "k_max") num(cfg.k.max);
                else if (key == "k_count") count(cfg.k.count);
                else if (key == "m_max") {
                    double v = cfg.m_max;
                    num(v);
                    if (v < 0 || v != std::floor(v) || v > 1e7) errors.push_back(where + ": must be a nonnegative integer");
                    else cfg.m_max = static_cast<int>(v);
                } else if (key == "series_tol") num(cfg.series_tol);
                else known = false;
            } else if (sec.name == "contour") {
                if (key == "sigma") num(cfg.sigma);
                else if (key == "T") num(cfg.T);
                else if (key == "dt") num(cfg.dt);
                else if (key == "noise") num(cfg.noise);
                else if (key == "tail_threshold") num(cfg.tail_threshold);
                else if (key == "adaptive") {
                    if (value == "true" || value == "1") cfg.adaptive = true;
                    else if (value == "false" || value == "0") cfg.adaptive = false;
                    else errors.push_back(where + ": expected true or false");
                } else known = false;
            } else if (sec.name == "eval") {
                if (key == "xi") list(eval_xi);
                else if (key == "eta") list(eval_eta);
                else if (key == "point") {
                    std::vector<double> v;
                    list(v);
                    if (v.size() != 2) errors.push_back(where + ": expected 'xi eta'");
                    else if (v[1] < 0) errors.push_back(where + ": eta must be nonnegative");
                    else explicit_points.push_back({v[0], v[1]});
                } else if (key == "r_min") num(cfg.eval_r.min);
                else if (key == "r_max") num(cfg.eval_r.max);
                else if (key == "r_count") count(cfg.eval_r.count);
                else known = false;
            } else if (sec.name == "phantom") {
                auto& ph = phantom_specs.back();
                if (key == "margin") num(ph.margin);
                else if (key == "bump") {
                    std::vector<double> v;
                    list(v);
                    if (v.size() != 5) errors.push_back(where + ": expected 'cx cy R A p'");
                    else if (v[4] != std::floor(v[4]) || v[4] < 0 || v[4] > 1000) errors.push_back(where + ": p must be an integer");
                    else ph.bumps.push_back({{v[0], v[1]}, v[2], v[3], static_cast<int>(v[4])});
                } else known = false;
            } else if (sec.name == "output") {
                if (key == "boundary") cfg.boundary = value;
                else if (key == "exterior") cfg.exterior = value;
                else if (key == "coefficients") cfg.coefficients = value;
                else if (key == "psi") cfg.psi = value;
                else if (key == "report") cfg.report = value;
                else if (key == "export_m_max") {
                    double v = 0;
                    num(v);
                    if (v < 0 || v != std::floor(v)) errors.push_back(where + ": must be a nonnegative integer");
                    else cfg.export_m_max = static_cast<int>(v);
                } else known = false;
            } else {
                errors.push_back(source + ":" + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
                break;
            }
            if (!known) errors.push_back(where + ": unknown key");
        }
    }

    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };
    check(cfg.eta0 > 0 && std::isfinite(cfg.eta0), "[grid] eta0: must be positive");
    check(cfg.xi.max > cfg.xi.min, "[grid] xi_max: must exceed xi_min");
    check(cfg.r.min >= 0 && cfg.r.max > cfg.r.min, "[grid] r_min/r_max: need 0 <= r_min < r_max");
    check(cfg.k.min > 0 && cfg.k.max > cfg.k.min, "[frequency] k_min/k_max: need 0 < k_min < k_max");
    check(cfg.series_tol > 0 && cfg.series_tol < 1, "[frequency] series_tol: must lie in (0, 1)");
    check(cfg.sigma > 0 && cfg.sigma < 1, "[contour] sigma: must lie in (0, 1)");
    check(cfg.T > 0 && cfg.dt > 0 && cfg.dt < cfg.T, "[contour] T/dt: need 0 < dt < T");
    check(cfg.noise >= 0, "[contour] noise: must be nonnegative");
    check(cfg.tail_threshold > 0, "[contour] tail_threshold: must be positive");
    check(cfg.eval_r.min > 0 && cfg.eval_r.max > cfg.eval_r.min, "[eval] r_min/r_max: need 0 < r_min < r_max");

    for (double xi : eval_xi)
        for (double eta : eval_eta) cfg.eval_points.push_back({xi, eta});
    if (eval_xi.empty() != eval_eta.empty()) errors.push_back("[eval] xi/eta: both lists are needed for a tensor grid");
    cfg.eval_points.insert(cfg.eval_points.end(), explicit_points.begin(), explicit_points.end());
    for (const auto& p : cfg.eval_points)
        if (!(p.eta >= cfg.eta0))
            errors.push_back("[eval] point (" + format_number(p.xi) + ", " + format_number(p.eta) + "): eta below eta0");

    for (const auto& spec : phantom_specs) {
        try {
            cfg.phantoms.emplace_back(spec.bumps, cfg.eta0, spec.margin);
        } catch (const std::invalid_argument& e) {
            errors.push_back(source + ":" + std::to_string(spec.line) + ": [phantom] " + e.what());
        }
    }
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

inline RunConfig read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open configuration '" + path + "'"});
    return parse_config(in, path);
}

}  // namespace parasmt
