#include "vbnet/metrics.hpp"

#include <cmath>

#include "vbnet/errors.hpp"

namespace vbnet {

namespace {
void check_lengths(std::size_t a, std::size_t b, const char* op) {
    if (a != b) throw DomainError(std::string(op) + ": length mismatch");
    if (a == 0) throw DomainError(std::string(op) + ": empty input");
}
}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size(), "rmse");
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sq += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    return std::sqrt(sq / static_cast<double>(pred.size()));
}

double r2(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size(), "r2");
    double mean = 0.0;
    for (double v : truth) mean += v;
    mean /= static_cast<double>(truth.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    if (ss_tot == 0.0) throw DomainError("r2: truth is constant");
    return 1.0 - ss_res / ss_tot;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    check_lengths(x.size(), y.size(), "least_squares");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("least_squares: x is constant");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace vbnet
