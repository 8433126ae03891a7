#pragma once

#include <string>

namespace ebdg {

/// Shortest decimal string that round-trips to the same double; locale-free.
std::string format_double(double value);

}  // namespace ebdg
