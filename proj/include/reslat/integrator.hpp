#pragma once

#include "reslat/hamiltonian.hpp"
#include "reslat/types.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace reslat {

// Solution of the coupled flow/variational system along one time interval:
// samples of z(t), the tangent flow Y(t) with Y(t0) = Id, and the two loop
// quadratures accumulated along the way.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;    // z = (y, eta)
    std::vector<Mat> tangents;  // Y(t), 2n x 2n
    double t0 = 0.0;
    double t1 = 0.0;
    double energy = 0.0;        // H_0 at the start point
    double energy_drift = 0.0;  // max |H_0(z(t)) - energy| over samples
    double action_integral = 0.0;  // integral of eta . dy/dt dt
    double h1_integral = 0.0;      // integral of H_1(z(t)) dt

    const Vec& end_state() const { return states.back(); }
    const Mat& end_tangent() const { return tangents.back(); }
};

struct IntegrateOptions {
    double tol = 1e-12;                 // relative/absolute tolerance
    std::vector<double> output_times;   // extra exact-time samples (sorted not required)
    bool store_steps = true;            // keep every accepted step in the samples
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 2000000;
};

// Adaptive integration of dz/dt = J grad H_0(z), dY/dt = J H''(z) Y with an
// embedded Runge-Kutta 8(5,3) pair and 7th-order dense output.
Trajectory integrate(const HamiltonianSystem& sys, const PhasePoint& start, double t1,
                     double tol);
Trajectory integrate(const HamiltonianSystem& sys, const Vec& start_z, double t1,
                     const IntegrateOptions& opts);

// One accepted integrator step with its dense-output polynomial.
class DenseStep {
  public:
    DenseStep(double ta, double tb, const Mat& rcont) : ta_(ta), tb_(tb), rcont_(&rcont) {}
    double ta() const { return ta_; }
    double tb() const { return tb_; }
    // Interpolated state at t in [ta, tb].
    Vec eval(double t) const;

  private:
    double ta_, tb_;
    const Mat* rcont_;  // dim x 8 coefficient block
};

// Low-level engine shared by integrate() and the Poincare return map.
// rhs(t, y, dy) fills dy; observer is called after every accepted step and
// may return a time inside the step at which integration stops exactly.
using RhsFn      = std::function<void(double, const Vec&, Vec&)>;
using StepObserver = std::function<std::optional<double>(const DenseStep&)>;

struct CoreResult {
    double t_end;
    Vec y_end;
    bool stopped_by_observer = false;
};

CoreResult integrate_core(const RhsFn& rhs, Vec y0, double t0, double t1, double rtol,
                          double atol, double max_step, long max_steps,
                          const StepObserver& observer);

// Right-hand side of the coupled (z, Y, quadrature) system for sys; state
// layout is z (2n) | vec(Y) (4n^2) | action, H1 quadratures (2).
RhsFn hamiltonian_rhs(const HamiltonianSystem& sys);

}  // namespace reslat
