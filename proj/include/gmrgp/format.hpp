#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gmrgp {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a complete decimal number; returns false on trailing garbage.
bool parse_double(std::string_view text, double& value);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);
void write_csv_row(std::ostream& out, const std::vector<double>& cells);

}  // namespace gmrgp
