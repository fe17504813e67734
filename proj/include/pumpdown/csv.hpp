#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pumpdown/errors.hpp"

namespace pumpdown {

/// Serialize a double with 12 significant digits (the on-disk precision for
/// every numeric CSV field in this project).
std::string format_sig12(double v);

/// 17 significant digits: round-trips every finite double exactly.
std::string format_sig17(double v);

/// Split one CSV line on commas. A field opening with a double quote runs to
/// the closing quote (embedded commas kept, doubled quotes unescaped);
/// unquoted fields pass through verbatim.
std::vector<std::string> split_csv_line(const std::string& line);

/// Quote a field for CSV output when it contains a comma, quote or newline
/// (transfer labels like "3:4^(+,-)" need this); otherwise returns it as is.
std::string csv_quote(const std::string& field);

/// Strict double/int parsers: the full field must be consumed.
Result<double> parse_double(const std::string& s);
Result<long long> parse_int(const std::string& s);

}  // namespace pumpdown
