/// parasmt command line: simulate, extract, verify, compare.
/// Exit status 0 on success, 1 on a failed check or certificate, 2 on usage or input errors.

#include <parasmt/verify.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace parasmt;

int report_config_error(const ConfigError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& f : e.fields()) std::cerr << "  " << f << '\n';
    return 2;
}

int simulate_cmd(const std::string& config, const std::string& out) {
    auto path = run_simulate(read_config(config), out);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int extract_cmd(const std::string& config, const std::string& boundary, const std::string& out) {
    auto cfg = read_config(config);
    auto res = run_extract(cfg, boundary, out);
    for (const auto& c : res.certificates) std::cout << "certificate " << c.name << '=' << format_number(c.value) << '\n';
    std::cout << "wrote " << (std::filesystem::path(out) / cfg.exterior).string() << '\n';
    return 0;
}

int verify_cmd(const std::string& config, const std::string& out, const std::vector<std::string>& only) {
    Verifier v(read_config(config));
    std::ostringstream report;
    bool ok = true;
    for (const auto& id : only.empty() ? Verifier::ids() : only) {
        auto r = v.run(id);
        std::string line = format_check(r);
        std::cout << line << std::endl;
        report << line << '\n';
        ok = ok && r.status == CheckStatus::Pass;
    }
    for (const auto& c : v.certificate_lines()) report << "# certificate " << c << '\n';
    report << "overall " << (ok ? "PASS" : "FAIL") << '\n';
    std::cout << "overall " << (ok ? "PASS" : "FAIL") << '\n';
    auto dir = std::filesystem::path(out);
    write_text(dir / "report.txt", report.str());
    v.write_exterior(dir);
    return ok ? 0 : 1;
}

int compare_cmd(const std::string& a, const std::string& b, const std::string& col_a, const std::string& col_b) {
    auto r = compare(read_csv_file(a), read_csv_file(b), col_a, col_b);
    std::cout << "cells " << r.cells << "\nmax_rel " << format_number(r.max_rel) << "\nrms_rel " << format_number(r.rms_rel)
              << "\nworst xi=" << format_number(r.worst_xi) << " eta=" << format_number(r.worst_eta)
              << " r=" << format_number(r.worst_r) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spherical means outside a parabola from data on the parabola"};
    app.require_subcommand(1);

    std::string config, out = ".", boundary, file_a, file_b, col_a = "value_recovered", col_b = "value_recovered";
    std::vector<std::string> only;

    auto* sim = app.add_subcommand("simulate", "sample the boundary data of the configured phantom");
    sim->add_option("--config", config, "configuration file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "output directory");

    auto* ext = app.add_subcommand("extract", "recover exterior spherical means from a boundary file");
    ext->add_option("--config", config, "configuration file")->required()->check(CLI::ExistingFile);
    ext->add_option("--boundary", boundary, "boundary CSV")->required()->check(CLI::ExistingFile);
    ext->add_option("--out", out, "output directory");

    auto* ver = app.add_subcommand("verify", "run the acceptance checks");
    ver->add_option("--config", config, "configuration file")->required()->check(CLI::ExistingFile);
    ver->add_option("--out", out, "output directory");
    ver->add_option("--only", only, "criteria to run (A1..A10)");

    auto* cmp = app.add_subcommand("compare", "max and RMS difference of two exterior files");
    cmp->add_option("a", file_a, "reference exterior CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("b", file_b, "exterior CSV to compare")->required()->check(CLI::ExistingFile);
    cmp->add_option("--column-a", col_a, "value column of a");
    cmp->add_option("--column-b", col_b, "value column of b");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) return simulate_cmd(config, out);
        if (*ext) return extract_cmd(config, boundary, out);
        if (*ver) return verify_cmd(config, out, only);
        return compare_cmd(file_a, file_b, col_a, col_b);
    } catch (const ConfigError& e) {
        return report_config_error(e);
    } catch (const CertificateError& e) {
        std::cerr << "certificate failure: " << e.what() << '\n';
        return 1;
    } catch (const TruncationError& e) {
        std::cerr << "truncation failure: " << e.what() << " (last term ratio " << format_number(e.last_ratio()) << ")\n";
        return 1;
    } catch (const GridResolutionError& e) {
        std::cerr << "grid resolution: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
