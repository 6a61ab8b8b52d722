#pragma once
/// \file io.hpp
/// Locale-independent number formatting, phantom description files and CSV exchange.

#include "core.hpp"
#include "forward.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace parasmt {

/// shortest text with 17 significant digits, independent of the C locale
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return std::string(s.substr(a, b - a));
}

/// parse a complete token as a double; throws SchemaError naming the context
inline double parse_number(std::string_view text, const std::string& context) {
    std::string t = trim(text);
    double v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
        if (t == "-inf") return -std::numeric_limits<double>::infinity();
        throw SchemaError(context + ": cannot parse number '" + t + "'");
    }
    return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t p = s.find(sep, start);
        out.emplace_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

/// Phantom file: lines "eta0 <v>", "margin <v>" and bump rows "cx cy R A p"; '#' starts a comment
inline Phantom parse_phantom(std::istream& in, const std::string& name = "phantom") {
    std::vector<Bump> bumps;
    double eta0 = -1, margin = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        for (char& c : line)
            if (c == '=' || c == ',') c = ' ';
        auto tok = split_whitespace(line);
        if (tok.empty()) continue;
        std::string ctx = name + ":" + std::to_string(lineno);
        if (tok[0] == "eta0" || tok[0] == "margin") {
            if (tok.size() != 2) throw SchemaError(ctx + ": expected '" + tok[0] + " <value>'");
            (tok[0] == "eta0" ? eta0 : margin) = parse_number(tok[1], ctx);
            continue;
        }
        if (tok.size() != 5) throw SchemaError(ctx + ": expected 'cx cy R A p'");
        Bump b;
        b.center = {parse_number(tok[0], ctx), parse_number(tok[1], ctx)};
        b.radius = parse_number(tok[2], ctx);
        b.amplitude = parse_number(tok[3], ctx);
        double p = parse_number(tok[4], ctx);
        if (p != std::floor(p) || p < 0 || p > 1000) throw SchemaError(ctx + ": smoothness must be an integer");
        b.smoothness = static_cast<int>(p);
        bumps.push_back(b);
    }
    if (eta0 <= 0) throw SchemaError(name + ": missing or nonpositive eta0");
    return Phantom(std::move(bumps), eta0, margin);
}

inline Phantom read_phantom(const std::string& path) {
    auto in = open_input(path);
    return parse_phantom(in, path);
}

inline void write_phantom(std::ostream& out, const Phantom& ph) {
    out << "eta0 " << format_number(ph.eta0()) << "\nmargin " << format_number(ph.margin()) << "\n# cx cy R A p\n";
    for (const auto& b : ph.bumps())
        out << format_number(b.center.x) << ' ' << format_number(b.center.y) << ' ' << format_number(b.radius) << ' '
            << format_number(b.amplitude) << ' ' << b.smoothness << '\n';
}

/// Boundary CSV "xi,r,value", xi outer; exactly-zero cells are not written
inline void write_boundary_csv(std::ostream& out, const BoundaryData& data) {
    out << "# boundary data F(xi, r) on eta0 = " << format_number(data.eta0) << "\n";
    out << "# xi_count=" << data.xi_grid.size() << " r_count=" << data.r_grid.size()
        << " (cells not listed are zero)\n";
    out << "xi,r,value\n";
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& row = data.rows[i];
        std::string xi = format_number(data.xi_grid[i]);
        for (std::size_t q = 0; q < row.values.size(); ++q) {
            if (row.values[q] == 0) continue;
            out << xi << ',' << format_number(data.r_grid[row.first + q]) << ',' << format_number(row.values[q]) << '\n';
        }
    }
}

/// Read a boundary CSV written on the given grids
inline BoundaryData read_boundary_csv(std::istream& in, double eta0, const std::vector<double>& xi_grid,
                                      const std::vector<double>& r_grid, const std::string& name = "boundary") {
    BoundaryData data{eta0, xi_grid, r_grid, std::vector<BoundaryRow>(xi_grid.size())};
    std::vector<std::map<std::size_t, double>> cells(xi_grid.size());
    std::string line;
    bool header = false;
    long lineno = 0;
    auto locate = [](const std::vector<double>& grid, double v) -> long {
        auto it = std::lower_bound(grid.begin(), grid.end(), v);
        if (it == grid.end() || *it != v) return -1;
        return it - grid.begin();
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::string ctx = name + ":" + std::to_string(lineno);
        if (!header) {
            if (trim(line) != "xi,r,value") throw SchemaError(ctx + ": expected header 'xi,r,value'");
            header = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 3) throw SchemaError(ctx + ": expected three fields");
        double xi = parse_number(f[0], ctx), r = parse_number(f[1], ctx), v = parse_number(f[2], ctx);
        long i = locate(xi_grid, xi), j = locate(r_grid, r);
        if (i < 0 || j < 0) throw SchemaError(ctx + ": (xi, r) = (" + f[0] + ", " + f[1] + ") is not on the configured grid");
        cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
    }
    if (!header) throw SchemaError(name + ": missing header 'xi,r,value'");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].empty()) continue;
        auto& row = data.rows[i];
        row.first = cells[i].begin()->first;
        row.values.assign(cells[i].rbegin()->first - row.first + 1, 0.0);
        for (auto& [j, v] : cells[i]) row.values[j - row.first] = v;
    }
    return data;
}

/// Simple CSV table: header names, numeric columns and the leading '#' comment lines
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == name) return c;
        throw SchemaError("missing column '" + name + "'");
    }
};

inline CsvTable read_csv(std::istream& in, const std::string& name = "csv") {
    CsvTable t;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line);
            continue;
        }
        auto f = split(line, ',');
        if (t.columns.empty()) {
            for (auto& c : f) t.columns.push_back(trim(c));
            continue;
        }
        std::string ctx = name + ":" + std::to_string(lineno);
        if (f.size() != t.columns.size()) throw SchemaError(ctx + ": expected " + std::to_string(t.columns.size()) + " fields");
        std::vector<double> row;
        for (auto& x : f) row.push_back(parse_number(x, ctx));
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) throw SchemaError(name + ": empty file");
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    auto in = open_input(path);
    return read_csv(in, path);
}

}  // namespace parasmt
