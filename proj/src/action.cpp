#include "reslat/action.hpp"

#include <algorithm>
#include <cmath>

namespace reslat {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double action_integral(const PeriodicOrbit& orbit) {
    return orbit.trajectory.action_integral;
}

double subprincipal_integral(const PeriodicOrbit& orbit, const HamiltonianSystem& sys) {
    if (sys.dof() != orbit.system.dof())
        throw ConfigError("subprincipal_integral: system does not match the orbit");
    if (!sys.has_h1()) return 0.0;
    return orbit.trajectory.h1_integral;
}

ActionModel build_action_model(const OrbitFamily& family, const HamiltonianSystem& sys,
                               const ActionModelOptions& opts) {
    const int n_nodes = static_cast<int>(family.orbits.size());
    if (n_nodes < 8) throw ConfigError("build_action_model: need at least 8 family nodes");

    ActionModel model;
    model.e_min       = family.e_min;
    model.e_max       = family.e_max;
    model.rho_c       = opts.rho_c;
    model.node_count  = n_nodes;
    model.system_name = sys.name();

    // verify the family sits on the window's Chebyshev nodes
    const auto nodes = ChebFit::gauss_nodes(family.e_min, family.e_max, n_nodes);
    for (int i = 0; i < n_nodes; ++i)
        if (std::abs(family.orbits[i].energy - nodes[i]) >
            1e-9 * (1.0 + std::abs(nodes[i])))
            throw ConfigError("build_action_model: family energies are not Chebyshev nodes");

    std::vector<double> s0_vals(n_nodes), t_vals(n_nodes), i1_vals(n_nodes);
    std::vector<std::vector<Complex>> m_vals(n_nodes);
    std::vector<std::vector<Kind>> kind_vals(n_nodes);

    for (int i = 0; i < n_nodes; ++i) {
        const PeriodicOrbit& orb = family.orbits[i];
        s0_vals[i] = action_integral(orb);
        t_vals[i]  = orb.period;
        i1_vals[i] = subprincipal_integral(orb, sys);

        const MonodromyData md = monodromy(orb);
        const auto hyp = check_hypotheses(md, opts.nonres_K, opts.tol_res_base, opts.tol_ell);
        if (!hyp.all_required()) {
            std::string which;
            if (!hyp.nondegenerate) which += " nondegeneracy";
            if (!hyp.no_nonpositive_real) which += " spectrum-off-negative-axis";
            if (!hyp.distinct_exponents) which += " distinct-exponents";
            if (!hyp.nonres_weak) which += " weak-non-resonance";
            if (!hyp.nonres_strong) which += " strong-non-resonance";
            throw HypothesisError("build_action_model: hypotheses failed at node E = " +
                                  std::to_string(orb.energy) + ":" + which);
        }

        const auto exps = classify(md, opts.tol_ell);
        std::vector<Complex> dofs;
        std::vector<Kind> kinds;
        for (const auto& e : exps) {
            dofs.push_back(e.m);
            kinds.push_back(e.kind);
            if (e.kind == Kind::hc) {
                dofs.push_back(std::conj(e.m));
                kinds.push_back(Kind::hc);
            }
        }
        m_vals[i]    = std::move(dofs);
        kind_vals[i] = std::move(kinds);
    }

    const int d = static_cast<int>(m_vals[0].size());

    // canonical order at the first node, then continuous branch tracking
    {
        std::vector<int> order(d);
        for (int j = 0; j < d; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            const Complex a = m_vals[0][x], b = m_vals[0][y];
            if (a.real() != b.real()) return a.real() > b.real();
            return a.imag() > b.imag();
        });
        std::vector<Complex> mv(d);
        std::vector<Kind> kv(d);
        for (int j = 0; j < d; ++j) { mv[j] = m_vals[0][order[j]]; kv[j] = kind_vals[0][order[j]]; }
        m_vals[0]    = std::move(mv);
        kind_vals[0] = std::move(kv);
    }

    for (int i = 1; i < n_nodes; ++i) {
        if (static_cast<int>(m_vals[i].size()) != d)
            throw HypothesisError(
                "build_action_model: transverse dimension changed inside the window at E = " +
                std::to_string(family.orbits[i].energy));
        std::vector<Complex> matched(d);
        std::vector<Kind> mkinds(d);
        std::vector<bool> used(d, false);
        for (int j = 0; j < d; ++j) {
            int bi = -1;
            double bd = std::numeric_limits<double>::max();
            for (int c = 0; c < d; ++c) {
                if (used[c]) continue;
                const double dist = std::abs(m_vals[i][c] - m_vals[i - 1][j]);
                if (dist < bd) { bd = dist; bi = c; }
            }
            // collision guard: a second candidate equally close means the
            // branches cannot be told apart
            for (int c = 0; c < d; ++c)
                if (c != bi && !used[c] && std::abs(m_vals[i][c] - m_vals[i][bi]) < 1e-6)
                    throw HypothesisError(
                        "build_action_model: exponent branches collide at E = " +
                        std::to_string(family.orbits[i].energy));
            used[bi]   = true;
            matched[j] = m_vals[i][bi];
            mkinds[j]  = kind_vals[i][bi];
            if (mkinds[j] != kind_vals[0][j])
                throw HypothesisError(
                    "build_action_model: exponent kind changes across the window at E = " +
                    std::to_string(family.orbits[i].energy) + " (branch " + std::to_string(j) +
                    " " + kind_name(kind_vals[0][j]) + " -> " + kind_name(mkinds[j]) + ")");
        }
        m_vals[i]    = std::move(matched);
        kind_vals[i] = std::move(mkinds);
    }

    model.kinds = kind_vals[0];

    // Chebyshev fits over the window; for a degenerate window (single node)
    // fall back to constants
    auto fit_scalar = [&](const std::vector<double>& v) {
        if (family.e_min == family.e_max) {
            Vec c(1);
            c(0) = 2.0 * v[0];  // c0 counts with weight 1/2
            return ChebFit(family.e_min - 0.5, family.e_max + 0.5, c);
        }
        return ChebFit::from_values(family.e_min, family.e_max, v);
    };

    model.s0     = fit_scalar(s0_vals);
    model.period = fit_scalar(t_vals);
    model.i1     = fit_scalar(i1_vals);
    model.m_re.resize(d);
    model.m_im.resize(d);
    for (int j = 0; j < d; ++j) {
        std::vector<double> re(n_nodes), im(n_nodes);
        for (int i = 0; i < n_nodes; ++i) {
            re[i] = m_vals[i][j].real();
            im[i] = m_vals[i][j].imag();
        }
        model.m_re[j] = fit_scalar(re);
        model.m_im[j] = fit_scalar(im);
    }

    // node residuals (interpolation property)
    for (int i = 0; i < n_nodes; ++i) {
        const double e = family.orbits[i].energy;
        auto rel = [](double got, double want) {
            return std::abs(got - want) / (1.0 + std::abs(want));
        };
        model.fit_residual = std::max(model.fit_residual, rel(model.s0(e), s0_vals[i]));
        model.fit_residual = std::max(model.fit_residual, rel(model.period(e), t_vals[i]));
        model.fit_residual = std::max(model.fit_residual, rel(model.i1(e), i1_vals[i]));
        for (int j = 0; j < d; ++j) {
            model.fit_residual =
                std::max(model.fit_residual, rel(model.m_re[j](e), m_vals[i][j].real()));
            model.fit_residual =
                std::max(model.fit_residual, rel(model.m_im[j](e), m_vals[i][j].imag()));
        }
    }
    if (model.fit_residual > 1e-9)
        throw NumericalError("build_action_model: node fit residual above 1e-9");

    // Hamilton-Jacobi identity dS0/dE = T across the window
    if (family.e_min < family.e_max) {
        const ChebFit ds0 = model.s0.derivative();
        double max_t = 0.0;
        for (double t : t_vals) max_t = std::max(max_t, std::abs(t));
        for (int i = 0; i <= 50; ++i) {
            const double e = family.e_min + (family.e_max - family.e_min) * i / 50.0;
            model.action_identity_err =
                std::max(model.action_identity_err, std::abs(ds0(e) - model.period(e)));
        }
        if (model.action_identity_err > 1e-6 * max_t)
            throw NumericalError(
                "build_action_model: dS0/dE deviates from T(E) beyond 1e-6 relative "
                "(max defect " + std::to_string(model.action_identity_err) + ")");
    }

    // Conley-Zehnder index, constant across the window
    if (opts.with_cz) {
        bool any_ee = false;
        for (Kind k : model.kinds) any_ee |= (k == Kind::ee);
        if (any_ee) {
            model.cz_index = conley_zehnder(family.orbits[0], opts.cz_grid);
            for (int i = 1; i < n_nodes; ++i) {
                const int gi = conley_zehnder(family.orbits[i], opts.cz_grid);
                if (gi != model.cz_index)
                    throw HypothesisError(
                        "build_action_model: Conley-Zehnder index varies across the window "
                        "(node E = " + std::to_string(family.orbits[i].energy) + ")");
            }
        }
    }
    return model;
}

ActionEval eval_action(const ActionModel& model, Complex e) {
    const double hw = model.half_width();
    if (e.real() < model.e_min - 1e-12 || e.real() > model.e_max + 1e-12)
        throw ConfigError("eval_action: Re E outside the energy window");
    if (hw > 0.0 && std::abs(e.imag()) > model.rho_c * hw)
        throw ConfigError("eval_action: Im E outside the validity radius");

    ActionEval ev;
    ev.s0  = model.s0(e);
    ev.t   = model.period(e);
    ev.i1  = model.i1(e);
    ev.ds0 = model.s0.derivative()(e);
    const Complex di1 = model.i1.derivative()(e);
    ev.s1  = -ev.i1 / kTwoPi + 0.5 * model.cz_index;
    ev.ds1 = -di1 / kTwoPi;

    const int d = model.dof_count();
    ev.m.resize(d);
    ev.dm.resize(d);
    for (int j = 0; j < d; ++j) {
        // complex evaluation of the real/imaginary fits, recombined
        ev.m[j]  = model.m_re[j](e) + Complex(0.0, 1.0) * model.m_im[j](e);
        ev.dm[j] = model.m_re[j].derivative()(e) +
                   Complex(0.0, 1.0) * model.m_im[j].derivative()(e);
    }
    return ev;
}

}  // namespace reslat
