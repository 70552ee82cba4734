#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ergoloop {

enum class Kernel { Gaussian, Epanechnikov };

std::string_view to_string(Kernel kernel);
Kernel kernel_from_string(std::string_view text);

double kernel_value(Kernel kernel, double u);

struct KdeEstimate {
    double bandwidth = 0.0;
    Kernel kernel = Kernel::Gaussian;
    std::vector<double> samples;
    std::vector<double> grid;
    std::vector<double> density;
};

/// f_h(z) = 1/(n h) sum_i K((z - z_i) / h) on every grid point. Throws
/// EmptySamples and NonpositiveBandwidth.
KdeEstimate kde_estimate(std::span<const double> samples, double bandwidth,
                         std::span<const double> grid, Kernel kernel = Kernel::Gaussian);

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5). Falls back to
/// the sd, then to unit spread, when the sample is degenerate.
double silverman_bandwidth(std::span<const double> samples);

/// Uniform grid from min - pad*h to max + pad*h with spacing at most h/4 and
/// at least `min_points` points.
std::vector<double> kde_grid(std::span<const double> samples, double bandwidth, double pad = 6.0,
                             std::size_t min_points = 512);

double trapezoid(std::span<const double> x, std::span<const double> y);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|, in [0, 1].
/// Throws EmptySamples.
double distribution_distance(std::span<const double> a, std::span<const double> b);

/// Asymptotic two-sample critical value c(alpha) sqrt((n + m) / (n m)),
/// c(alpha) = sqrt(-ln(alpha / 2) / 2), alpha = 1 - confidence.
double ks_critical_value(std::size_t n, std::size_t m, double confidence);

/// Two-sided standard normal quantile for a confidence level (0.95 -> 1.96).
double normal_two_sided_quantile(double confidence);

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of the mean (n - 1 denominator); std_error is
/// 0 for fewer than two values.
MeanStderr mean_stderr(std::span<const double> values);

} // namespace ergoloop
