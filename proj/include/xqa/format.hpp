#pragma once

#include <string>

namespace xqa {

// Shortest decimal that round-trips to the same double.
std::string full_precision(double value);

// Fixed notation with `decimals` digits after the point.
std::string fixed(double value, int decimals = 3);

std::string csv_escape(const std::string& field);

}  // namespace xqa
