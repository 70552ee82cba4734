#pragma once

#include <span>
#include <string>
#include <vector>

namespace ergoloop {

/// A real vector carried along one edge of the loop. Scalars are vectors of
/// dimension 1.
using Signal = std::vector<double>;

inline Signal scalar(double value) { return Signal{value}; }

bool all_finite(std::span<const double> values);

/// Throws DimensionMismatch naming `what` when sizes differ.
void require_same_dimension(const Signal& a, const Signal& b, const std::string& what);

std::string format_signal(const Signal& s);

} // namespace ergoloop
