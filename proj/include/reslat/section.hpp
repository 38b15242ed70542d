#pragma once

#include "reslat/hamiltonian.hpp"
#include "reslat/integrator.hpp"
#include "reslat/types.hpp"

namespace reslat {

// Poincare section: hyperplane through `base` with unit `normal`, intersected
// with the energy shell when energy_slice is set.
struct SectionSpec {
    Vec base;
    Vec normal;
    bool energy_slice = true;
};

// Section through a point, oriented along the flow direction there.
SectionSpec section_through(const HamiltonianSystem& sys, const Vec& base);

// Transversality margin <normal, X_H(base)>; throws when it vanishes.
double check_transversality(const HamiltonianSystem& sys, const SectionSpec& sec);

// Symplectically normalized frame of the 2d-dimensional transverse space
//   V = { u : grad H . u = 0, X_H . u = 0 }
// at a phase point: columns (u_1..u_d, w_1..w_d) with sigma(u_i, w_j) =
// delta_ij and all other pairings zero. coords() extracts frame coordinates,
// killing the flow and energy-gradient directions.
struct SectionFrame {
    Vec flow;    // X_H at the base point
    Vec gradh;   // grad H at the base point
    Mat basis;   // 2n x 2d

    int transverse_dim() const { return static_cast<int>(basis.cols()); }

    // Coordinates of (the V-component of) a full-space vector.
    Vec coords(const Vec& x) const;
    // Frame coordinates of the co-restriction of a full-space linear map.
    Mat corestrict(const Mat& y) const;
};

// Deterministic frame at a point; if `seed` is non-null its columns are
// projected onto the new transverse space before re-normalization, which
// keeps frames continuous along a trajectory.
SectionFrame make_section_frame(const HamiltonianSystem& sys, const Vec& point,
                                const Mat* seed = nullptr);

// First return to the section.
struct PoincareReturn {
    Vec point;          // crossing point
    double time;        // elapsed time
    Mat jacobian;       // d(return point)/d(start), time-corrected onto the section
    Mat flow_jacobian;  // raw variational Y at the crossing
};

struct ReturnOptions {
    double tol = 1e-12;      // integrator tolerance
    double t_min = 1e-6;     // guard against immediate re-crossings
    double t_max = 1e3;      // give up beyond this time
    double max_step = std::numeric_limits<double>::infinity();
};

PoincareReturn poincare_return(const HamiltonianSystem& sys, const SectionSpec& sec,
                               const Vec& start, const ReturnOptions& opts = {});

// Coarse full-period estimate from a scouting integration: twice the first
// wrap jump of the section function when the normal touches an angular
// coordinate, otherwise the first recurrence dip of the wrapped phase-space
// distance. Used to pre-condition shooting from guesses too far off an
// unstable orbit for its first section crossing to be meaningful.
std::optional<double> estimate_return_time(const HamiltonianSystem& sys, const SectionSpec& sec,
                                           const Vec& start, double tol, double horizon);

}  // namespace reslat
