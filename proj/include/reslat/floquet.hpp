#pragma once

#include "reslat/orbits.hpp"

namespace reslat {

// Linearized return map co-restricted to the section frame, 2d x 2d with
// d = n - 1, together with the frame it is expressed in.
struct MonodromyData {
    Mat a;       // symplectic 2d x 2d
    double energy = 0.0;
    double period = 0.0;
    Mat basis;   // 2n x 2d section frame columns

    int transverse_dim() const { return static_cast<int>(a.rows()); }
};

// One Floquet quadruple {lambda, 1/lambda, conj lambda, 1/conj lambda},
// represented by the per-period exponent M = log lambda with Re M >= 0 and
// Im M >= 0. Elliptic entries carry M = i Theta with the first-kind angle
// Theta in (0, 2pi).
struct FloquetExponent {
    Complex m;
    Kind kind = Kind::hr;
    int pair_index = 0;
    double theta = 0.0;  // rotation angle, ee only
};

// Symplectic basis bringing b(rho) = (1/2) sigma(rho, B rho), B = log A,
// to one of the elementary quadratic forms:
//   ee: q * (x^2 + xi^2) / 2,  hr: q * (x xi),
//   hc: c (x1 xi1 + x2 xi2) - d (x1 xi2 - x2 xi1).
struct BlockNormalForm {
    Kind kind = Kind::hr;
    Mat basis;        // 2n_block columns of the 2d space: (x cols..., xi cols...)
    double coeff_c = 0.0;  // q for ee/hr, c for hc
    double coeff_d = 0.0;  // d for hc, 0 otherwise
    int pair_index = 0;
};

struct NonResonanceWitness {
    std::vector<int> k;
    double defect = 0.0;   // distance of sum k_j M_j from 2 pi i Z
};

struct NonResonanceResult {
    bool ok_weak = true;   // integer combination in 2 pi i Z implies the sum vanishes
    bool ok_strong = true;   // integer combination in 2 pi i Z implies k = 0
    NonResonanceWitness worst_weak;  // offender if failed, else closest call
    NonResonanceWitness worst_strong;
};

// Hypothesis flags with quantitative margins.
struct HypothesisReport {
    bool nondegenerate = false;          // no multiplier at 1
    double margin_unit = 0.0;            // min |lambda_j - 1|
    bool no_nonpositive_real = false;    // spectrum avoids (-inf, 0]
    double margin_negative_axis = 0.0;   // min distance of multipliers from (-inf, 0]
    bool partially_hyperbolic = false;   // some Re M_j > 0
    bool distinct_exponents = false;     // r = d
    bool nonres_weak = false;
    bool nonres_strong = false;
    NonResonanceWitness worst_weak;
    NonResonanceWitness worst_strong;
    int k_radius = 0;
    double tol_ell = 0.0;
    double tol_res_base = 0.0;
    std::string cz_convention = "floor-of-winding of first-kind eigenvalue arguments";

    bool all_required() const {
        return nondegenerate && no_nonpositive_real && distinct_exponents && nonres_weak &&
               nonres_strong;
    }
};

// Extracts the monodromy matrix by projecting Y(T) symplectically onto the
// section frame at the orbit start.
MonodromyData monodromy(const PeriodicOrbit& orbit);

// Groups the multipliers into quadruples and picks representatives.
std::vector<FloquetExponent> classify(const MonodromyData& md, double tol_ell = 1e-6);

// Per-degree-of-freedom exponents in canonical order: hc quadruples expand
// into (M, conj M); entries sorted by descending Re, then descending Im.
std::vector<Complex> per_dof_exponents(const std::vector<FloquetExponent>& exps);

// Real symplectic normal-form bases per quadruple.
std::vector<BlockNormalForm> block_normal_form(const MonodromyData& md, double tol_ell = 1e-6);

// Scans all integer vectors 0 < |k|_inf <= K against dist(sum k_j M_j,
// 2 pi i Z) < tol_res_base * (1 + |k|_1); exposed directly so constructed
// exponent lists can be screened without a monodromy matrix.
NonResonanceResult nonresonance_scan(const std::vector<Complex>& per_dof_m, int K,
                                     double tol_res_base = 1e-8);

HypothesisReport check_hypotheses(const MonodromyData& md, int K, double tol_res_base = 1e-8,
                                  double tol_ell = 1e-6);

// Conley-Zehnder index: total winding of the first-kind elliptic eigenvalues
// of the co-restricted variational flow over one period, floor convention.
// Returns 0 when no elliptic quadruple is present. grid is the initial time
// resolution; it is refined until every per-step argument increment is below
// pi/4.
int conley_zehnder(const PeriodicOrbit& orbit, int grid = 256);

// Per-block winding data behind conley_zehnder; first-kind branch angles at
// t = T (full winding, not reduced mod 2 pi).
std::vector<double> elliptic_winding_angles(const PeriodicOrbit& orbit, int grid = 256);

// Real bases of the expanding and contracting invariant subspaces of the
// hyperbolic part of the monodromy.
std::pair<Mat, Mat> stable_unstable_split(const MonodromyData& md, double tol_ell = 1e-6);

}  // namespace reslat
