#pragma once

#include "reslat/action.hpp"

namespace reslat {

struct QuantizationInput {
    double h = 0.01;        // semiclassical parameter in (0, 1)
    double eps0 = 0.5;      // longitudinal window: |m| h <= eps0
    double delta = 0.5;     // transverse window: |k| h <= h^delta, 0 < delta < 1
    double newton_tol = 1e-12;
    int max_iter = 50;

    void validate() const {
        if (!(h > 0.0 && h < 1.0)) throw ConfigError("quantize: h must lie in (0, 1)");
        if (!(delta > 0.0 && delta < 1.0))
            throw ConfigError("quantize: delta must lie in (0, 1)");
        if (!(eps0 > 0.0)) throw ConfigError("quantize: eps0 must be positive");
    }
    // windows are empty (no error) when eps0/h < 1 or h^delta/h < 1;
    // the floors carry a relative slack so that exact ratios like 0.3/0.1
    // land on the intended integer
    bool window_nonempty() const {
        return eps0 / h >= 1.0 && std::pow(h, delta) / h >= 1.0;
    }
    long m_max() const {
        const double q = eps0 / h;
        return static_cast<long>(std::floor(q * (1.0 + 4e-16) + 1e-12));
    }
    int k_max() const {
        const double q = std::pow(h, delta - 1.0);
        return static_cast<int>(std::floor(q * (1.0 + 4e-16) + 1e-12));
    }
};

struct Resonance {
    long m = 0;
    std::vector<int> k;
    Complex e;
    double residual = 0.0;
    int iters = 0;
};

struct LatticeFailure {
    long m = 0;
    std::vector<int> k;
    std::string reason;
};

struct ResonanceLattice {
    std::vector<Resonance> resonances;  // unique (m, k), sorted by Re E
    std::vector<LatticeFailure> failures;
    QuantizationInput input;
    std::string system_name;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

// Generalized Bohr-Sommerfeld residual
//   F(E; m, k) = S0(E)/(2 pi h) + S1(E) - (1/(2 pi i)) sum_j (k_j + 1/2) M_j(E) - m
// and its derivative dF/dE.
std::pair<Complex, Complex> bs_residual(const ActionModel& model, Complex e, long m,
                                        const std::vector<int>& k, double h);

Resonance solve_resonance(const ActionModel& model, long m, const std::vector<int>& k,
                          const QuantizationInput& input);

ResonanceLattice enumerate_lattice(const ActionModel& model, const QuantizationInput& input,
                                   int threads = 1);

// Exact lattice of the model Hamiltonian, from the closed-form fixed-vector
// condition of its monodromy operator: E = m h - i h sum_j (k_j + 1/2) mu_j
// over the per-unit-time exponent vector expanded per degree of freedom.
ResonanceLattice model_oracle(const std::vector<Complex>& mu, const QuantizationInput& input,
                              double window_lo, double window_hi);

struct ComparisonReport {
    double max_deviation = 0.0;
    long worst_m = 0;
    std::vector<int> worst_k;
    std::size_t count = 0;
};

// Per-(m, k) deviation between two lattices with identical index sets.
ComparisonReport compare(const ResonanceLattice& lattice, const ResonanceLattice& oracle);

// Per-degree-of-freedom expansion of a model exponent vector (hc entries
// contribute mu and conj mu), canonically ordered like the classifier output.
std::vector<Complex> expand_model_exponents(const std::vector<Complex>& mu);

}  // namespace reslat
