#pragma once

#include <span>

namespace vbnet {

double rmse(std::span<const double> pred, std::span<const double> truth);

/// Coefficient of determination; throws DomainError for constant truth.
double r2(std::span<const double> pred, std::span<const double> truth);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y ≈ slope·x + intercept.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace vbnet
