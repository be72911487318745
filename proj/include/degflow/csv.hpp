#pragma once

#include "degflow/profile.hpp"

#include <string>
#include <vector>

namespace degflow {

/// Two-column CSV with a mandatory header line, values printed with %.17g.
/// Nodal profiles are written node by node, cellwise ones at cell centres.
template <class Space>
void write_profile_csv(const std::string& path, const Profile<Space>& p);
void write_quantiles_csv(const std::string& path, const QuantileProfile& Y);

/// Reads a `grid,value` file as a nodal profile. Throws ConfigError on a
/// missing file, a wrong header or a malformed line (line number named).
template <class Space>
Profile<Space> read_profile_csv(const std::string& path);
QuantileProfile read_quantiles_csv(const std::string& path);

/// Column table; every column must have the same length.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns);

/// %.17g formatting used for every numeric output.
std::string format_double(double v);

}  // namespace degflow
