#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace carleman_lab {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

// ordinary least squares y = intercept + slope·x
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw PreconditionViolated("line fit needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw PreconditionViolated("line fit needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

// exponent p in y ≈ C·x^p
inline double fit_power(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        lx.push_back(std::log(x[k]));
        ly.push_back(std::log(y[k]));
    }
    return fit_line(lx, ly).slope;
}

// ratio of successive errors under grid halving
inline double richardson_ratio(double coarse_err, double fine_err) {
    if (fine_err == 0.0) return coarse_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return coarse_err / fine_err;
}

inline double relative_drift(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

} // namespace carleman_lab
