#include "ergoloop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ergoloop/error.hpp"

namespace ergoloop {

std::string_view to_string(Kernel kernel)
{
    return kernel == Kernel::Gaussian ? "gaussian" : "epanechnikov";
}

Kernel kernel_from_string(std::string_view text)
{
    if (text == "gaussian") return Kernel::Gaussian;
    if (text == "epanechnikov") return Kernel::Epanechnikov;
    throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(text) + "'");
}

double kernel_value(Kernel kernel, double u)
{
    if (kernel == Kernel::Gaussian) {
        return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    }
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

KdeEstimate kde_estimate(std::span<const double> samples, double bandwidth,
                         std::span<const double> grid, Kernel kernel)
{
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "density estimate needs samples");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw Error(ErrorCode::NonpositiveBandwidth,
                    "bandwidth must be positive, got " + std::to_string(bandwidth));
    }
    KdeEstimate est;
    est.bandwidth = bandwidth;
    est.kernel = kernel;
    est.samples.assign(samples.begin(), samples.end());
    est.grid.assign(grid.begin(), grid.end());
    est.density.resize(grid.size());
    const double scale = 1.0 / (static_cast<double>(samples.size()) * bandwidth);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double z : samples) acc += kernel_value(kernel, (grid[g] - z) / bandwidth);
        est.density[g] = acc * scale;
    }
    return est;
}

namespace {

// Linear interpolation between order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

double silverman_bandwidth(std::span<const double> samples)
{
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "bandwidth needs samples");
    const double n = static_cast<double>(samples.size());
    const double sd = samples.size() > 1 ? mean_stderr(samples).std_error * std::sqrt(n) : 0.0;
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) spread = 1.0;
    return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> kde_grid(std::span<const double> samples, double bandwidth, double pad,
                             std::size_t min_points)
{
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "grid needs samples");
    if (!(bandwidth > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *mn - pad * bandwidth;
    const double hi = *mx + pad * bandwidth;
    const double spacing = bandwidth / 4.0;
    std::size_t points = static_cast<std::size_t>(std::ceil((hi - lo) / spacing)) + 1;
    points = std::max({points, min_points, std::size_t{2}});
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

double trapezoid(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "trapezoid: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return acc;
}

double distribution_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySamples, "distance needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    // Advance past every copy of the smallest pending value before comparing,
    // so ties between the samples do not create spurious gaps.
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double confidence)
{
    if (n == 0 || m == 0) throw Error(ErrorCode::EmptySamples, "critical value needs sample sizes");
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "confidence must be in (0, 1)");
    }
    const double alpha = 1.0 - confidence;
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

double normal_two_sided_quantile(double confidence)
{
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "confidence must be in (0, 1)");
    }
    // Solve P(|Z| <= x) = confidence by bisection on erf.
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::erf(mid / std::numbers::sqrt2) < confidence) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

MeanStderr mean_stderr(std::span<const double> values)
{
    MeanStderr r;
    if (values.empty()) return r;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / n;
    if (values.size() < 2) return r;
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std_error = std::sqrt(ss / (n - 1.0) / n);
    return r;
}

} // namespace ergoloop
