#pragma once

#include <span>

namespace plastree {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares of y against x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace plastree
