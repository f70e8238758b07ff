#pragma once

#include <string>

namespace mfbmvol {

/// Locale-independent scientific notation with 17 significant digits.
std::string format_double(double v);

}  // namespace mfbmvol
