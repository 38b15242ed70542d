#include "reslat/orbits.hpp"
#include <optional>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace reslat {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Vec project_to_energy(const HamiltonianSystem& sys, Vec z, double E, double tol) {
    for (int it = 0; it < 40; ++it) {
        const double r = sys.h0(z) - E;
        if (std::abs(r) <= tol * (1.0 + std::abs(E))) return z;
        const Vec g = sys.grad(z);
        const double g2 = g.squaredNorm();
        if (g2 < 1e-20) throw NumericalError("project_to_energy: vanishing gradient");
        z -= (r / g2) * g;
    }
    throw NumericalError("project_to_energy: no convergence");
}

namespace {

struct NewtonResult {
    Vec point;
    double period;
};

// One Newton update of p from the residual in section coordinates. The
// co-restricted jacobian is the same whether y comes from a fixed-time map or
// a section return, because the frame coordinates kill the flow direction.
Vec newton_update(const HamiltonianSystem& sys, const SectionFrame& frame, const Vec& p,
                  double E, const Vec& r, const Mat& y) {
    const int m = frame.transverse_dim();
    Mat a(m, m);
    for (int j = 0; j < m; ++j) a.col(j) = frame.coords(y * frame.basis.col(j));
    Eigen::FullPivLU<Mat> lu(a - Mat::Identity(m, m));
    lu.setThreshold(1e-13);
    if (lu.rank() < m)
        throw NumericalError(
            "find_periodic_orbit: singular Newton system (return map has eigenvalue 1; "
            "nondegeneracy violated)");
    const Vec delta = lu.solve(-r);
    const double rn = r.norm();
    const double lambda = rn > 2.0 ? std::min(1.0, 2.0 / rn) : 1.0;
    return project_to_energy(sys, p + lambda * (frame.basis * delta), E);
}

// Multiple-shooting pre-conditioner for guesses outside the single-shooting
// basin (a strongly unstable orbit amplifies a cold perturbation beyond the
// nonlinear regime within one period, so any full-period evaluation is
// useless there). Short segments keep every trajectory evaluation local;
// unknowns are the segment points and the segment time, closed by phase and
// energy conditions, solved in least squares. Returns a point close enough
// to the orbit for plain section shooting to take over.
Vec multiple_shooting(const HamiltonianSystem& sys, Vec p, double E, double t_est,
                      const ShootingOptions& opts) {
    const int n2 = sys.dim();
    const int ms = 8;
    const Vec p_ref = p;
    const Vec f_ref = sys.vector_field(p);
    const double tau = t_est / ms;  // fixed segment time; the residual keeps a
                                    // small flow-direction defect when t_est is
                                    // off, which the section polish absorbs

    IntegrateOptions iopts;
    iopts.tol         = opts.integrator_tol;
    iopts.store_steps = false;

    // Euler-polygon initialization spreads the loop without integrating the
    // instability
    std::vector<Vec> q(ms, p);
    for (int i = 1; i < ms; ++i) q[i] = q[i - 1] + tau * sys.vector_field(q[i - 1]);

    const int nr = ms * n2 + 2;
    const int nx = ms * n2;
    Vec r(nr);
    Mat jac(nr, nx);

    const double accept = 0.05 * (1.0 + p.norm());
    double prev_norm = std::numeric_limits<double>::max();
    for (int it = 0; it < 40; ++it) {
        jac.setZero();
        for (int i = 0; i < ms; ++i) {
            const Trajectory seg = integrate(sys, q[i], tau, iopts);
            const int inext = (i + 1) % ms;
            r.segment(i * n2, n2) = sys.wrap_diff(seg.end_state(), q[inext]);
            jac.block(i * n2, i * n2, n2, n2) = seg.end_tangent();
            jac.block(i * n2, inext * n2, n2, n2) -= Mat::Identity(n2, n2);
        }
        r(ms * n2)     = f_ref.dot(p_ref - q[0]);
        r(ms * n2 + 1) = sys.h0(q[0]) - E;
        jac.block(ms * n2, 0, 1, n2)     = -f_ref.transpose();
        jac.block(ms * n2 + 1, 0, 1, n2) = sys.grad(q[0]).transpose();

        const double rn = r.norm();
        if (rn <= 1e-9 * (1.0 + p.norm())) break;
        if (it > 3 && rn > 0.9 * prev_norm) {
            if (rn < accept) break;  // stalled at the flow-direction defect
            throw NumericalError("find_periodic_orbit: multiple-shooting stall (|r| = " +
                                 std::to_string(rn) + ")");
        }
        prev_norm = rn;

        const Vec dx = jac.colPivHouseholderQr().solve(-r);
        const double lambda = rn > 1.0 ? 0.5 : 1.0;
        for (int i = 0; i < ms; ++i) q[i] += lambda * dx.segment(i * n2, n2);
    }
    return project_to_energy(sys, q[0], E);
}

NewtonResult newton_on_section(const HamiltonianSystem& sys, const SectionSpec& sec,
                               const SectionFrame& frame, Vec p, double E,
                               double tol, const ShootingOptions& opts) {
    ReturnOptions ropts;
    ropts.tol   = opts.integrator_tol;
    ropts.t_min = opts.t_min;
    ropts.t_max = opts.t_max;

    // Probe the first return; a small residual means the guess already sits
    // in the plain shooting basin (warm starts, symmetric initializers).
    std::optional<PoincareReturn> probe;
    try {
        probe = poincare_return(sys, sec, p, ropts);
    } catch (const NumericalError&) {
        // escaping guess; handled by the pre-conditioner below
    }
    double probe_rn = std::numeric_limits<double>::max();
    if (probe) probe_rn = frame.coords(sys.wrap_diff(probe->point, p)).norm();

    if (probe_rn > 0.05 * (1.0 + p.norm())) {
        auto t_ref = estimate_return_time(sys, sec, p, opts.integrator_tol,
                                          std::min(opts.t_max, 64.0));
        if (!t_ref && probe) t_ref = probe->time;
        if (!t_ref)
            throw NumericalError(
                "find_periodic_orbit: no return and no period estimate from the guess");
        p = multiple_shooting(sys, p, E, *t_ref, opts);
    }

    for (int it = 0; it < opts.max_iter; ++it) {
        const PoincareReturn ret = poincare_return(sys, sec, p, ropts);
        const Vec diff = sys.wrap_diff(ret.point, p);
        const Vec r    = frame.coords(diff);
        if (r.norm() <= tol * (1.0 + p.norm())) return {p, ret.time};
        p = newton_update(sys, frame, p, E, r, ret.jacobian);
    }
    throw NumericalError("find_periodic_orbit: Newton did not converge within " +
                         std::to_string(opts.max_iter) + " iterations");
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const HamiltonianSystem& sys, const PhasePoint& guess,
                                  double E, double tol, const ShootingOptions& opts) {
    if (!guess.finite()) throw ConfigError("find_periodic_orbit: non-finite guess");
    if (std::abs(sys.h0(guess.z()) - E) > 0.1 * (1.0 + std::abs(E)))
        throw ConfigError("find_periodic_orbit: guess energy too far from target E");

    Vec p0 = project_to_energy(sys, guess.z(), E);
    SectionSpec sec = section_through(sys, p0);
    SectionFrame frame = make_section_frame(sys, p0);

    NewtonResult nr = newton_on_section(sys, sec, frame, p0, E, tol, opts);

    IntegrateOptions iopts;
    iopts.tol = opts.integrator_tol;
    PeriodicOrbit orbit{sys, E, nr.period, nr.point, integrate(sys, nr.point, nr.period, iopts),
                        section_through(sys, nr.point)};

    const double clo = closure_residual(orbit);
    if (clo > 1e-9 * (1.0 + nr.point.norm()))
        throw NumericalError("find_periodic_orbit: closure residual " + std::to_string(clo) +
                             " above bound");
    if (std::abs(sys.h0(orbit.start) - E) > 1e-10 * (1.0 + std::abs(E)))
        throw NumericalError("find_periodic_orbit: start energy off the shell");
    if (!(orbit.period > 0.0)) throw NumericalError("find_periodic_orbit: non-positive period");
    return orbit;
}

double closure_residual(const PeriodicOrbit& orbit) {
    return orbit.system.wrap_diff(orbit.trajectory.end_state(), orbit.start)
        .lpNorm<Eigen::Infinity>();
}

OrbitFamily continue_family(const HamiltonianSystem& sys, const PeriodicOrbit& seed,
                            std::pair<double, double> e_range, int node_count,
                            const ShootingOptions& opts_in) {
    const double lo = e_range.first, hi = e_range.second;
    if (lo > hi) throw ConfigError("continue_family: empty energy range");
    if (seed.energy < lo - 1e-12 || seed.energy > hi + 1e-12)
        throw ConfigError("continue_family: seed energy outside range");

    OrbitFamily fam;
    fam.e_min = lo;
    fam.e_max = hi;

    if (lo == hi) {
        fam.orbits.push_back(seed);
        return fam;
    }
    if (node_count < 8 || node_count > 64)
        throw ConfigError("continue_family: node_count must lie in [8, 64]");

    // Chebyshev-Gauss nodes, ascending
    std::vector<double> nodes(node_count);
    for (int k = 0; k < node_count; ++k) {
        const double x = std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * node_count));
        nodes[node_count - 1 - k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
    }

    ShootingOptions opts = opts_in;
    opts.t_min = seed.period / 10.0;
    opts.t_max = std::max(opts_in.t_max, 20.0 * seed.period);

    // walk outward from the node closest to the seed
    int i0 = 0;
    for (int i = 1; i < node_count; ++i)
        if (std::abs(nodes[i] - seed.energy) < std::abs(nodes[i0] - seed.energy)) i0 = i;

    std::vector<std::optional<PeriodicOrbit>> found(node_count);

    auto solve_at = [&](int idx, const PeriodicOrbit& warm) {
        try {
            const Vec warm_z = project_to_energy(sys, warm.start, nodes[idx]);
            found[idx] = find_periodic_orbit(sys, PhasePoint::from_z(warm_z), nodes[idx],
                                             opts.tol, opts);
        } catch (const NumericalError& e) {
            throw NumericalError("continue_family: breakdown at E = " +
                                 std::to_string(nodes[idx]) + ": " + e.what());
        }
    };

    solve_at(i0, seed);
    for (int i = i0 + 1; i < node_count; ++i) solve_at(i, *found[i - 1]);
    for (int i = i0 - 1; i >= 0; --i) solve_at(i, *found[i + 1]);

    for (auto& o : found) fam.orbits.push_back(std::move(*o));
    for (size_t i = 1; i < fam.orbits.size(); ++i)
        if (!(fam.orbits[i].energy > fam.orbits[i - 1].energy))
            throw NumericalError("continue_family: energies not strictly monotone");
    return fam;
}

PhasePoint default_orbit_guess(const HamiltonianSystem& sys, double E) {
    const std::string& name = sys.name();
    const int n = sys.dof();

    if (name == "model") {
        // center manifold x = xi = 0, tau = E
        Vec y = Vec::Zero(n), eta = Vec::Zero(n);
        eta(0) = E;
        return {y, eta};
    }
    if (name == "hyperboloid_geodesic" || name == "revolution_surface_4d") {
        // the equator circle z = 0 at momentum p_theta = sqrt(2E)
        if (!(E > 0.0)) throw ConfigError(name + ": need kinetic energy E > 0");
        Vec y = Vec::Zero(n), eta = Vec::Zero(n);
        eta(0) = std::sqrt(2.0 * E);
        return {y, eta};
    }
    if (name == "coulomb_stark") {
        // barrier-top normal mode: start on the y_1 axis at the saddle
        // s* = 1/sqrt(a) with the energy surplus in the axial momentum
        const double a = sys.params().at("a");
        const double s_star = 1.0 / std::sqrt(a);
        const double v_top  = 2.0 * std::sqrt(a);
        if (E <= v_top)
            throw ConfigError("coulomb_stark: need E above the barrier value 2*sqrt(a)");
        Vec y = Vec::Zero(n), eta = Vec::Zero(n);
        y(0)   = s_star;
        eta(0) = std::sqrt(E - v_top);  // H = |eta|^2 + V
        return {y, eta};
    }
    throw ConfigError("default_orbit_guess: no built-in initializer for system '" + name + "'");
}

}  // namespace reslat
