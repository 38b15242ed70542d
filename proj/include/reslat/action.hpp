#pragma once

#include "reslat/chebyshev.hpp"
#include "reslat/floquet.hpp"

namespace reslat {

// Complex-evaluable fits of the classical data over an energy window:
// action S_0(E), period T(E), sub-principal integral I_1(E), and per-degree-
// of-freedom per-period exponents M_j(E).
struct ActionModel {
    double e_min = 0.0;
    double e_max = 0.0;
    double rho_c = 0.5;  // complex-validity radius as a fraction of the half-width

    ChebFit s0, period, i1;
    std::vector<ChebFit> m_re, m_im;
    std::vector<Kind> kinds;  // per dof
    int cz_index = 0;
    int node_count = 0;
    std::string system_name;
    double fit_residual = 0.0;     // max relative node residual over all fits
    double action_identity_err = 0.0;  // max |S0'(E) - T(E)| over the window

    int dof_count() const { return static_cast<int>(m_re.size()); }
    double half_width() const { return 0.5 * (e_max - e_min); }
    double center() const { return 0.5 * (e_max + e_min); }
};

// Evaluation of the fits at complex energy, with the derivatives needed by
// the quantization Newton iteration. S1 = -I1/(2 pi) + g/2.
struct ActionEval {
    Complex s0, s1, t, i1;
    Complex ds0, ds1;
    std::vector<Complex> m, dm;
};

// Loop action S_0 = integral of eta . dy along the stored orbit.
double action_integral(const PeriodicOrbit& orbit);

// I_1 = integral of H_1 over one period.
double subprincipal_integral(const PeriodicOrbit& orbit, const HamiltonianSystem& sys);

struct ActionModelOptions {
    int nonres_K = 10;
    double tol_ell = 1e-6;
    double tol_res_base = 1e-8;
    double rho_c = 0.5;
    bool with_cz = true;
    int cz_grid = 256;
};

ActionModel build_action_model(const OrbitFamily& family, const HamiltonianSystem& sys,
                               const ActionModelOptions& opts = {});

ActionEval eval_action(const ActionModel& model, Complex e);

}  // namespace reslat
