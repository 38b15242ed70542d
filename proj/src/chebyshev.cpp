#include "reslat/chebyshev.hpp"

#include <cmath>

namespace reslat {

std::vector<double> ChebFit::gauss_nodes(double a, double b, int n) {
    std::vector<double> x(n);
    for (int k = 0; k < n; ++k) {
        const double t = std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * n));
        x[n - 1 - k]   = 0.5 * (a + b) + 0.5 * (b - a) * t;
    }
    return x;
}

ChebFit ChebFit::from_values(double a, double b, const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    if (n < 1) throw ConfigError("ChebFit: empty sample set");
    // values arrive ascending in x; the projection runs over the standard
    // (descending) node ordering
    Vec c = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double theta = M_PI * (2.0 * k + 1.0) / (2.0 * n);
            sum += values[n - 1 - k] * std::cos(j * theta);
        }
        c(j) = 2.0 * sum / n;
    }
    return ChebFit(a, b, std::move(c));
}

namespace {

template <typename S>
S clenshaw(const Vec& c, double a, double b, S x) {
    const int n = static_cast<int>(c.size());
    const S y  = (2.0 * x - a - b) / (b - a);
    const S y2 = 2.0 * y;
    S d{}, dd{};
    for (int j = n - 1; j >= 1; --j) {
        const S sv = d;
        d  = y2 * d - dd + c(j);
        dd = sv;
    }
    return y * d - dd + 0.5 * c(0);
}

}  // namespace

double ChebFit::operator()(double x) const { return clenshaw<double>(coef_, a_, b_, x); }
Complex ChebFit::operator()(Complex x) const { return clenshaw<Complex>(coef_, a_, b_, x); }

ChebFit ChebFit::derivative() const {
    const int n = order();
    Vec d = Vec::Zero(std::max(n, 1));
    if (n >= 2) {
        d(n - 1) = 0.0;
        d(n - 2) = 2.0 * (n - 1) * coef_(n - 1);
        for (int j = n - 3; j >= 0; --j) d(j) = d(j + 2) + 2.0 * (j + 1) * coef_(j + 1);
        d *= 2.0 / (b_ - a_);
    }
    return ChebFit(a_, b_, std::move(d));
}

}  // namespace reslat
