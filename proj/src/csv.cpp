#include "degflow/csv.hpp"

#include "degflow/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace degflow {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    return os;
}

std::vector<std::pair<double, double>> read_two_columns(const std::string& path, const std::string& header) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw ConfigError(path + ": expected header '" + header + "', got '" + line + "'");
    std::vector<std::pair<double, double>> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two columns");
        try {
            std::size_t used = 0;
            const double a = std::stod(line.substr(0, comma), &used);
            const std::string rest = line.substr(comma + 1);
            const double b = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("trailing text");
            rows.emplace_back(a, b);
        } catch (const std::logic_error&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

}  // namespace

template <class Space>
void write_profile_csv(const std::string& path, const Profile<Space>& p) {
    auto os = open_out(path);
    os << "grid,value\n";
    const auto pts = p.sample_points();
    const auto vals = p.values();
    for (std::size_t i = 0; i < vals.size(); ++i) os << format_double(pts[i]) << ',' << format_double(vals[i]) << '\n';
}

void write_quantiles_csv(const std::string& path, const QuantileProfile& Y) {
    auto os = open_out(path);
    os << "omega,Y\n";
    for (std::size_t i = 0; i < Y.n(); ++i) os << format_double(Y.omega(i)) << ',' << format_double(Y[i]) << '\n';
}

template <class Space>
Profile<Space> read_profile_csv(const std::string& path) {
    const auto rows = read_two_columns(path, "grid,value");
    std::vector<double> g, v;
    for (const auto& [a, b] : rows) {
        g.push_back(a);
        v.push_back(b);
    }
    try {
        return Profile<Space>::nodal(std::move(g), std::move(v));
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

QuantileProfile read_quantiles_csv(const std::string& path) {
    const auto rows = read_two_columns(path, "omega,Y");
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(r.second);
    return QuantileProfile(std::move(y));
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw ShapeError("table header/column count mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) throw ShapeError("table columns differ in length");
    }
    auto os = open_out(path);
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << format_double(columns[k][r]);
        os << '\n';
    }
}

template void write_profile_csv(const std::string&, const Profile<YSpace>&);
template void write_profile_csv(const std::string&, const Profile<XSpace>&);
template Profile<YSpace> read_profile_csv<YSpace>(const std::string&);
template Profile<XSpace> read_profile_csv<XSpace>(const std::string&);

}  // namespace degflow
