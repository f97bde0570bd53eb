#pragma once

#include <vector>

namespace reslab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// y = slope * x, with R^2 = 1 - SS_res / SS_tot around the mean of y
LineFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace reslab
