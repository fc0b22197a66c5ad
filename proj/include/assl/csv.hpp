#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace assl::csv {

/// Shortest text that parses back to the same double ("%.17g").
std::string real(double v);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

double parse_real(std::string_view field);
long long parse_int(std::string_view field);

}  // namespace assl::csv
