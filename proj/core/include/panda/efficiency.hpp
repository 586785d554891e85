#pragma once

#include <span>

namespace panda {

struct SizePoint {
    /// Training-set size in images.
    double n = 0.0;
    /// Metric value at that size.
    double y = 0.0;
};

/// y = slope * ln(n) + intercept
struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;

    double predict(double n) const;
};

/// Ordinary least squares of y on ln(n). Throws InsufficientPoints for fewer
/// than two points and DegenerateAbscissa when every n is equal (or any
/// n <= 0).
RegressionFit fit_log_linear(std::span<const SizePoint> points);

/// Training-set size whose fitted metric equals y: exp((y - intercept) / slope).
/// Throws ZeroSlope.
double effective_n(const RegressionFit& fit, double y);

/// Percentage gain (n_aug - n_orig) / n_orig * 100. Only meaningful when
/// originals and synthetic images are mixed 1:1. Throws NonpositiveBaseline.
double data_efficiency(double n_orig, double n_aug);

}  // namespace panda
