#pragma once

#include <string>

namespace mobility {

/// printf-style %.Ng rendering; "nan"/"inf" spelled out.
std::string format_number(double value, int significant_digits = 6);

/// Shortest representation that parses back to the same double.
std::string format_exact(double value);

}  // namespace mobility
