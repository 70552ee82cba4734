#include "ergoloop/signal.hpp"

#include <cmath>
#include <cstdio>

#include "ergoloop/error.hpp"

namespace ergoloop {

bool all_finite(std::span<const double> values)
{
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_same_dimension(const Signal& a, const Signal& b, const std::string& what)
{
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    what + ": dimensions " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()) + " differ");
    }
}

std::string format_signal(const Signal& s)
{
    std::string out = "[";
    char buf[32];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", s[i]);
        if (i) out += ", ";
        out += buf;
    }
    return out + "]";
}

} // namespace ergoloop
