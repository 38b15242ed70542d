#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace reslat {

using Vec     = Eigen::VectorXd;
using Mat     = Eigen::MatrixXd;
using CVec    = Eigen::VectorXcd;
using CMat    = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Error raised by malformed configuration or invalid parameters.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Error raised when a numerical procedure fails (divergence, singularity,
// loss of accuracy beyond a contract bound).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Error raised when a monodromy matrix violates one of the structural
// hypotheses (nondegeneracy, spectrum off the negative axis, simple
// exponents, non-resonance).
struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

// A point of phase space T*R^n, positions y and momenta eta.
struct PhasePoint {
    Vec y;
    Vec eta;

    PhasePoint() = default;
    PhasePoint(Vec y_, Vec eta_) : y(std::move(y_)), eta(std::move(eta_)) {}

    int dof() const { return static_cast<int>(y.size()); }

    Vec z() const {
        Vec out(y.size() + eta.size());
        out << y, eta;
        return out;
    }

    static PhasePoint from_z(const Vec& z) {
        const int n = static_cast<int>(z.size()) / 2;
        return PhasePoint(z.head(n), z.tail(n));
    }

    bool finite() const { return y.allFinite() && eta.allFinite(); }
};

// Standard symplectic form matrix J = [[0, I], [-I, 0]] on R^{2n}.
inline Mat symplectic_j(int two_n) {
    const int n = two_n / 2;
    Mat j = Mat::Zero(two_n, two_n);
    j.topRightCorner(n, n).setIdentity();
    j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return j;
}

// sigma(u, v) = u^T J v, evaluated without forming J.
inline double sigma(const Vec& u, const Vec& v) {
    const int n = static_cast<int>(u.size()) / 2;
    return u.head(n).dot(v.tail(n)) - u.tail(n).dot(v.head(n));
}

// Bilinear (unconjugated) complex symplectic product u^T J v.
inline Complex csigma(const CVec& u, const CVec& v) {
    const int n = static_cast<int>(u.size()) / 2;
    Complex acc(0, 0);
    for (int i = 0; i < n; ++i) acc += u(i) * v(n + i) - u(n + i) * v(i);
    return acc;
}

}  // namespace reslat
