#pragma once

#include "reslat/types.hpp"

namespace reslat {

// Chebyshev expansion on [a, b] through its Gauss nodes, with Clenshaw
// evaluation that accepts complex arguments (plain polynomial continuation
// off the real axis). Coefficient convention: c_0 enters with weight 1/2.
class ChebFit {
  public:
    ChebFit() = default;
    ChebFit(double a, double b, Vec coef) : a_(a), b_(b), coef_(std::move(coef)) {}

    // Ascending Chebyshev-Gauss nodes of [a, b].
    static std::vector<double> gauss_nodes(double a, double b, int n);

    // Fit from values at gauss_nodes(a, b, n), in the same (ascending) order.
    static ChebFit from_values(double a, double b, const std::vector<double>& values);

    double a() const { return a_; }
    double b() const { return b_; }
    int order() const { return static_cast<int>(coef_.size()); }
    const Vec& coefficients() const { return coef_; }

    double operator()(double x) const;
    Complex operator()(Complex x) const;

    ChebFit derivative() const;

  private:
    double a_ = -1.0, b_ = 1.0;
    Vec coef_;
};

}  // namespace reslat
