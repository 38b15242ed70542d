#pragma once

#include "reslat/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>

namespace reslat {

// A coordinate that lives on a circle: position index and period.
struct AngleCoord {
    int index;      // position index in y
    double period;  // wrap period (2*pi for the built-ins)
};

// A Hamiltonian system given by its principal symbol H_0, analytic gradient
// and Hessian, and an optional sub-principal symbol H_1. All evaluators take
// the stacked phase point z = (y, eta) in R^{2n}. Immutable after
// construction and safe to share between threads.
class HamiltonianSystem {
  public:
    using ScalarFn = std::function<double(const Vec&)>;
    using GradFn   = std::function<Vec(const Vec&)>;
    using HessFn   = std::function<Mat(const Vec&)>;
    using ProbeFn  = std::function<Vec(std::mt19937_64&)>;

    HamiltonianSystem(std::string name, int dof, ScalarFn eval0, GradFn grad0,
                      HessFn hess0, ScalarFn eval1,
                      std::map<std::string, double> params = {},
                      std::vector<AngleCoord> angles = {}, ProbeFn probe = {},
                      double singular_radius = 0.0)
        : name_(std::move(name)),
          dof_(dof),
          eval0_(std::move(eval0)),
          grad0_(std::move(grad0)),
          hess0_(std::move(hess0)),
          eval1_(std::move(eval1)),
          params_(std::move(params)),
          angles_(std::move(angles)),
          probe_(std::move(probe)),
          singular_radius_(singular_radius) {
        if (dof_ < 2) throw ConfigError("HamiltonianSystem: need at least 2 degrees of freedom");
        if (!eval0_ || !grad0_ || !hess0_)
            throw ConfigError("HamiltonianSystem: callback table missing a derivative");
    }

    const std::string& name() const { return name_; }
    int dof() const { return dof_; }
    int dim() const { return 2 * dof_; }

    double h0(const Vec& z) const { return eval0_(z); }
    Vec grad(const Vec& z) const { return grad0_(z); }
    Mat hess(const Vec& z) const { return hess0_(z); }
    double h1(const Vec& z) const { return eval1_ ? eval1_(z) : 0.0; }
    bool has_h1() const { return static_cast<bool>(eval1_); }

    const std::map<std::string, double>& params() const { return params_; }
    const std::vector<AngleCoord>& angles() const { return angles_; }
    double singular_radius() const { return singular_radius_; }

    // Hamiltonian vector field X_H = J grad H.
    Vec vector_field(const Vec& z) const {
        const Vec g = grad(z);
        const int n = dof_;
        Vec f(2 * n);
        f.head(n) = g.tail(n);
        f.tail(n) = -g.head(n);
        return f;
    }

    // Difference a - b with angular position components wrapped to
    // (-period/2, period/2].
    Vec wrap_diff(const Vec& a, const Vec& b) const {
        Vec d = a - b;
        for (const auto& ac : angles_) {
            double v = std::remainder(d(ac.index), ac.period);
            d(ac.index) = v;
        }
        return d;
    }

    // Sanity guard used inside integration loops: rejects non-finite points
    // and, for systems with a singular potential, points inside the cutoff.
    void guard(const Vec& z) const {
        if (!z.allFinite()) throw NumericalError(name_ + ": non-finite phase point");
        if (singular_radius_ > 0.0) {
            const int n = dof_;
            if (z.head(n).norm() < singular_radius_)
                throw NumericalError(name_ + ": trajectory entered singular cutoff |y| < " +
                                     std::to_string(singular_radius_));
        }
    }

    // Random phase point in the system's documented sampling domain,
    // used by the derivative-consistency checks.
    Vec random_probe(std::mt19937_64& rng) const {
        if (probe_) return probe_(rng);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vec z(dim());
        for (int i = 0; i < dim(); ++i) z(i) = u(rng);
        return z;
    }

  private:
    std::string name_;
    int dof_;
    ScalarFn eval0_;
    GradFn grad0_;
    HessFn hess0_;
    ScalarFn eval1_;
    std::map<std::string, double> params_;
    std::vector<AngleCoord> angles_;
    ProbeFn probe_;
    double singular_radius_;
};

// Transverse block kinds of the model Hamiltonian and of classified
// Floquet exponents: elliptic, real hyperbolic, complex hyperbolic.
enum class Kind { ee, hr, hc };

inline const char* kind_name(Kind k) {
    switch (k) {
        case Kind::ee: return "ee";
        case Kind::hr: return "hr";
        case Kind::hc: return "hc";
    }
    return "?";
}

// Named parameter set for build_system. Exactly one named builder is chosen
// by `name`; `mu` feeds the model, scalar params feed the rest.
struct SystemSpec {
    std::string name;                      // model | coulomb_stark | hyperboloid_geodesic |
                                           // revolution_surface_4d
    std::vector<Complex> mu;               // model exponents, Re >= 0
    std::string h1_kind = "zero";          // model sub-principal: zero | one | cos2t
    std::map<std::string, double> params;  // a, n, profile coefficients a1, a2
};

HamiltonianSystem build_system(const SystemSpec& spec);

HamiltonianSystem make_model(const std::vector<Complex>& mu, const std::string& h1_kind = "zero");
HamiltonianSystem make_coulomb_stark(double a, int n = 2);
HamiltonianSystem make_hyperboloid_geodesic();
HamiltonianSystem make_revolution_surface_4d(double a1, double a2);

// User-defined system from a callback table; gradient and Hessian are
// required, there is no automatic differentiation.
HamiltonianSystem make_user(int dof, HamiltonianSystem::ScalarFn eval0,
                            HamiltonianSystem::GradFn grad0, HamiltonianSystem::HessFn hess0,
                            HamiltonianSystem::ScalarFn eval1 = {},
                            std::vector<AngleCoord> angles = {});

// Consistency of analytic derivatives against centered finite differences.
struct DerivativeCheckReport {
    double max_grad_rel_err = 0.0;  // grad0 vs FD of eval0
    double max_hess_asym    = 0.0;  // symmetry defect of hess0
    double max_hess_rel_err = 0.0;  // hess0 vs FD of grad0
    bool pass               = false;
};

DerivativeCheckReport check_derivatives(const HamiltonianSystem& sys, int npoints = 100,
                                        std::uint64_t seed = 0x5eed);

// Per-transverse-block data of the model Hamiltonian; exposed for tests.
struct ModelBlock {
    Kind kind;
    Complex mu;  // per-unit-time exponent, Re >= 0
    int x_index; // first transverse position index (1-based slot in y is x_index+1)
    int width;   // 1 (ee/hr) or 2 (hc) position slots
};

std::vector<ModelBlock> model_blocks(const std::vector<Complex>& mu);

}  // namespace reslat
