#pragma once

#include "reslat/section.hpp"

namespace reslat {

// A closed trajectory at fixed energy together with its stored solution of
// the variational system over one period.
struct PeriodicOrbit {
    HamiltonianSystem system;
    double energy = 0.0;
    double period = 0.0;
    Vec start;
    Trajectory trajectory;  // over [0, period]
    SectionSpec section;
};

struct OrbitFamily {
    std::vector<PeriodicOrbit> orbits;  // strictly increasing energy
    double e_min = 0.0;
    double e_max = 0.0;
};

struct ShootingOptions {
    double tol = 1e-11;       // Newton residual tolerance (section coordinates)
    double integrator_tol = 1e-12;
    int max_iter = 50;
    double t_min = 1e-6;      // return-time guard
    double t_max = 1e3;
};

// Moves z onto the energy shell H_0 = E along grad H_0.
Vec project_to_energy(const HamiltonianSystem& sys, Vec z, double E, double tol = 1e-13);

// Newton shooting on the section through the guess: finds the closed orbit
// at energy E, holding the energy constraint by projection.
PeriodicOrbit find_periodic_orbit(const HamiltonianSystem& sys, const PhasePoint& guess,
                                  double E, double tol, const ShootingOptions& opts = {});

// Continuation of the orbit over Chebyshev nodes of the energy range,
// warm-starting each solve from its nearest neighbor.
OrbitFamily continue_family(const HamiltonianSystem& sys, const PeriodicOrbit& seed,
                            std::pair<double, double> e_range, int node_count,
                            const ShootingOptions& opts = {});

// Default initial guesses for the built-in systems at energy E: the center
// manifold for the model, the equator for the geodesic flows, the barrier-top
// normal mode for the Coulomb-Stark saddle.
PhasePoint default_orbit_guess(const HamiltonianSystem& sys, double E);

// Closure residual |Phi^T(start) - start| with angular wrap.
double closure_residual(const PeriodicOrbit& orbit);

}  // namespace reslat
