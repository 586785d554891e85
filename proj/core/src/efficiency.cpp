#include "panda/efficiency.hpp"

#include <algorithm>
#include <cmath>

#include "panda/error.hpp"

namespace panda {

double RegressionFit::predict(double n) const { return slope * std::log(n) + intercept; }

RegressionFit fit_log_linear(std::span<const SizePoint> points) {
    if (points.size() < 2) throw InsufficientPoints("log-linear fit needs at least two points");
    for (const auto& p : points) {
        if (!(p.n > 0.0) || !std::isfinite(p.n) || !std::isfinite(p.y)) {
            throw DegenerateAbscissa("training-set sizes must be positive and finite");
        }
    }
    const double count = static_cast<double>(points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& p : points) {
        mean_x += std::log(p.n);
        mean_y += p.y;
    }
    mean_x /= count;
    mean_y /= count;

    // Centred sums are better conditioned than the raw normal equations.
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.n) - mean_x;
        const double dy = p.y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateAbscissa("all training-set sizes are equal");

    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    double ss_res = 0.0;
    for (const auto& p : points) {
        const double r = p.y - fit.predict(p.n);
        ss_res += r * r;
    }
    // Two points (or any noiseless set) interpolate exactly; report r2 = 1
    // rather than leaking rounding noise.
    const double noise_floor = 1e-24 * std::max(1.0, syy);
    if (syy == 0.0 || ss_res <= noise_floor) {
        fit.r2 = 1.0;
    } else {
        fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

double effective_n(const RegressionFit& fit, double y) {
    if (fit.slope == 0.0 || !std::isfinite(fit.slope)) throw ZeroSlope("cannot invert a fit with zero slope");
    return std::exp((y - fit.intercept) / fit.slope);
}

double data_efficiency(double n_orig, double n_aug) {
    if (!(n_orig > 0.0)) throw NonpositiveBaseline("baseline effective size must be positive");
    return (n_aug - n_orig) / n_orig * 100.0;
}

}  // namespace panda
