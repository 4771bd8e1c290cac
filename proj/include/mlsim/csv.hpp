#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mlsim {

/// Shortest round-trippable-enough rendering used in every CSV (10 significant digits).
std::string format_number(double value);

/// "/" for an undefined value, matching the report convention.
std::string format_optional(const std::optional<double>& value);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace mlsim
