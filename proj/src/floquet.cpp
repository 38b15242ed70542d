#include "reslat/floquet.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reslat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double symplectic_defect(const Mat& a) {
    const int m = static_cast<int>(a.rows());
    const Mat j = symplectic_j(m);
    return (a.transpose() * j * a - j).cwiseAbs().maxCoeff();
}

// distance of a point from the closed ray (-inf, 0]
double dist_negative_axis(const Complex& l) {
    if (l.real() <= 0.0) return std::abs(l.imag());
    return std::abs(l);
}

// Krein sign of a unit-circle eigenvalue: Im(z^H J z) restricted to the
// eigenvector; the first-kind member of a conjugate pair is the positive one.
double krein_sign(const CVec& z) {
    const int n = static_cast<int>(z.size()) / 2;
    Complex acc(0.0, 0.0);
    for (int i = 0; i < n; ++i)
        acc += std::conj(z(i)) * z(n + i) - std::conj(z(n + i)) * z(i);
    return acc.imag();
}

struct Quadruple {
    std::vector<int> members;  // indices into the eigenvalue list
    Complex rep;               // multiplier representative
    Kind kind;
};

std::vector<Quadruple> group_quadruples(const CVec& evs, double tol_ell) {
    const int m = static_cast<int>(evs.size());
    std::vector<bool> used(m, false);
    std::vector<Quadruple> quads;

    auto find_closest = [&](const Complex& target) {
        int best = -1;
        double bd = std::numeric_limits<double>::max();
        for (int i = 0; i < m; ++i) {
            if (used[i]) continue;
            const double d = std::abs(evs(i) - target);
            if (d < bd) { bd = d; best = i; }
        }
        const double scale = 1.0 + std::abs(target);
        if (best < 0 || bd > 1e-4 * scale)
            throw NumericalError("classify: quadruple symmetry violated (missing partner for " +
                                 std::to_string(target.real()) + "+" +
                                 std::to_string(target.imag()) + "i)");
        used[best] = true;
        return best;
    };

    for (;;) {
        // pick the unused eigenvalue of largest modulus
        int i0 = -1;
        double bm = -1.0;
        for (int i = 0; i < m; ++i)
            if (!used[i] && std::abs(evs(i)) > bm) { bm = std::abs(evs(i)); i0 = i; }
        if (i0 < 0) break;

        const Complex l = evs(i0);
        if (dist_negative_axis(l) <= tol_ell)
            throw NumericalError(
                "classify: multiplier on (-inf, 0] within tolerance; the exponent branch is "
                "undefined");

        Quadruple q;
        used[i0] = true;
        q.members.push_back(i0);

        if (std::abs(std::abs(l) - 1.0) <= tol_ell) {
            // elliptic pair {lambda, conj lambda}
            if (std::abs(l.imag()) <= tol_ell)
                throw NumericalError("classify: multiplier too close to +-1 to resolve");
            q.kind = Kind::ee;
            q.members.push_back(find_closest(std::conj(l)));
            q.rep = l.imag() > 0.0 ? l : std::conj(l);  // provisional; Krein decides later
        } else if (std::abs(l.imag()) <= tol_ell * (1.0 + std::abs(l))) {
            q.kind = Kind::hr;
            q.members.push_back(find_closest(1.0 / l.real()));
            q.rep = std::abs(l) > 1.0 ? Complex(l.real(), 0.0) : Complex(1.0 / l.real(), 0.0);
            if (q.rep.real() < 0.0)
                throw NumericalError("classify: negative real multiplier");
        } else {
            q.kind = Kind::hc;
            q.members.push_back(find_closest(std::conj(l)));
            q.members.push_back(find_closest(1.0 / l));
            q.members.push_back(find_closest(std::conj(1.0 / l)));
            Complex rep = std::abs(l) > 1.0 ? l : 1.0 / l;
            if (rep.imag() < 0.0) rep = std::conj(rep);
            q.rep = rep;
        }
        quads.push_back(std::move(q));
    }
    return quads;
}

}  // namespace

MonodromyData monodromy(const PeriodicOrbit& orbit) {
    const HamiltonianSystem& sys = orbit.system;

    auto build = [&](const Trajectory& traj) {
        SectionFrame frame = make_section_frame(sys, orbit.start);
        MonodromyData md;
        md.energy = orbit.energy;
        md.period = orbit.period;
        md.basis  = frame.basis;
        md.a      = frame.corestrict(traj.end_tangent());
        return md;
    };

    MonodromyData md = build(orbit.trajectory);
    if (symplectic_defect(md.a) > 1e-7) {
        // re-integrate the variational system at a tighter tolerance
        IntegrateOptions iopts;
        iopts.tol        = 1e-13;
        iopts.store_steps = false;
        Trajectory tight = integrate(sys, orbit.start, orbit.period, iopts);
        md = build(tight);
        if (symplectic_defect(md.a) > 1e-7)
            throw NumericalError("monodromy: symplecticity defect above 1e-7 after refinement");
    }
    return md;
}

std::vector<FloquetExponent> classify(const MonodromyData& md, double tol_ell) {
    Eigen::EigenSolver<Mat> es(md.a);
    if (es.info() != Eigen::Success) throw NumericalError("classify: eigensolver failed");
    const CVec evs = es.eigenvalues();
    const CMat vecs = es.eigenvectors();

    auto quads = group_quadruples(evs, tol_ell);

    std::vector<FloquetExponent> out;
    int idx = 0;
    for (const auto& q : quads) {
        FloquetExponent fe;
        fe.kind       = q.kind;
        fe.pair_index = idx++;
        if (q.kind == Kind::ee) {
            // first-kind member by Krein sign
            int pos = -1;
            for (int mi : q.members) {
                CVec z = vecs.col(mi);
                if (krein_sign(z) > 0.0) { pos = mi; break; }
            }
            if (pos < 0)
                throw NumericalError("classify: no Krein-positive member in elliptic pair");
            double th = std::arg(evs(pos));
            if (th <= 0.0) th += kTwoPi;
            fe.theta = th;
            fe.m     = Complex(0.0, th);
        } else if (q.kind == Kind::hr) {
            fe.m = Complex(std::log(q.rep.real()), 0.0);
        } else {
            fe.m = std::log(q.rep);  // principal branch, Im in (0, pi)
        }
        out.push_back(fe);
    }

    // r = d: all per-dof exponents must be simple
    const auto dofs = per_dof_exponents(out);
    for (size_t i = 0; i < dofs.size(); ++i)
        for (size_t j = i + 1; j < dofs.size(); ++j)
            if (std::abs(dofs[i] - dofs[j]) < 1e-6)
                throw HypothesisError(
                    "classify: repeated Floquet exponents (r < d, multiplicity collision)");

    std::sort(out.begin(), out.end(), [](const FloquetExponent& a, const FloquetExponent& b) {
        if (a.m.real() != b.m.real()) return a.m.real() > b.m.real();
        return a.m.imag() > b.m.imag();
    });
    for (size_t i = 0; i < out.size(); ++i) out[i].pair_index = static_cast<int>(i);
    return out;
}

std::vector<Complex> per_dof_exponents(const std::vector<FloquetExponent>& exps) {
    std::vector<Complex> dofs;
    for (const auto& e : exps) {
        dofs.push_back(e.m);
        if (e.kind == Kind::hc) dofs.push_back(std::conj(e.m));
    }
    std::sort(dofs.begin(), dofs.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return dofs;
}

namespace {

// real eigenvector for a simple real eigenvalue via the LU kernel
Vec real_eigenvector(const Mat& a, double lambda) {
    const int m = static_cast<int>(a.rows());
    Eigen::FullPivLU<Mat> lu(a - lambda * Mat::Identity(m, m));
    lu.setThreshold(1e-9);
    const Mat ker = lu.kernel();
    if (ker.cols() < 1) throw NumericalError("block_normal_form: kernel extraction failed");
    return ker.col(0).normalized();
}

// restriction of the symmetric form S to the columns of basis
Mat restrict_form(const Mat& s, const Mat& basis) {
    return basis.transpose() * s * basis;
}

}  // namespace

std::vector<BlockNormalForm> block_normal_form(const MonodromyData& md, double tol_ell) {
    const auto exps = classify(md, tol_ell);  // validates the spectrum layout
    const int m = md.transverse_dim();
    const Mat j = symplectic_j(m);

    // principal real logarithm; admissible because classify excluded the
    // negative axis
    const Mat b = md.a.log();
    if ((b.exp() - md.a).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + md.a.cwiseAbs().maxCoeff()))
        throw NumericalError("block_normal_form: matrix logarithm did not converge");

    // Hessian of b(rho) = (1/2) sigma(rho, B rho) with the sign fixed so that
    // the flow of the quadratic Hamiltonian b is exp(tB)
    const Mat s_b = -j * b;

    Eigen::EigenSolver<Mat> es(md.a);
    const CVec evs = es.eigenvalues();
    const CMat vecs = es.eigenvectors();

    auto quads = group_quadruples(evs, tol_ell);
    std::vector<BlockNormalForm> out;

    for (size_t qi = 0; qi < quads.size(); ++qi) {
        const auto& q = quads[qi];
        BlockNormalForm nf;
        nf.kind       = q.kind;
        nf.pair_index = static_cast<int>(qi);

        if (q.kind == Kind::ee) {
            int pos = -1;
            for (int mi : q.members)
                if (krein_sign(vecs.col(mi)) > 0.0) { pos = mi; break; }
            if (pos < 0) throw NumericalError("block_normal_form: Krein sign not resolved");
            const CVec z = vecs.col(pos);
            Vec u = z.real(), v = z.imag();
            const double s = sigma(u, v);
            if (s <= 0.0)
                throw NumericalError("block_normal_form: unexpected Krein normalization");
            u /= std::sqrt(s);
            v /= std::sqrt(s);
            nf.basis.resize(m, 2);
            nf.basis << u, v;
            const Mat r = restrict_form(s_b, nf.basis);
            nf.coeff_c = 0.5 * (r(0, 0) + r(1, 1));
            if (std::abs(r(0, 0) - r(1, 1)) > 1e-7 || std::abs(r(0, 1)) > 1e-7)
                throw NumericalError("block_normal_form: elliptic block not isotropic");
        } else if (q.kind == Kind::hr) {
            const double lu = std::max(std::abs(evs(q.members[0]).real()),
                                       std::abs(evs(q.members[1]).real()));
            Vec wu = real_eigenvector(md.a, lu);
            Vec ws = real_eigenvector(md.a, 1.0 / lu);
            const double s = sigma(wu, ws);
            if (std::abs(s) < 1e-12)
                throw NumericalError("block_normal_form: degenerate hyperbolic pairing");
            ws /= s;
            nf.basis.resize(m, 2);
            nf.basis << wu, ws;
            Mat r = restrict_form(s_b, nf.basis);
            nf.coeff_c = r(0, 1);
            if (nf.coeff_c < 0.0) {
                // swap the roles of x and xi, preserving orientation
                Mat flipped(m, 2);
                flipped << ws, -wu;
                nf.basis = flipped;
                r = restrict_form(s_b, nf.basis);
                nf.coeff_c = r(0, 1);
            }
            if (std::abs(r(0, 0)) > 1e-7 || std::abs(r(1, 1)) > 1e-7)
                throw NumericalError("block_normal_form: hyperbolic block has diagonal residue");
        } else {
            // expanding eigenvector z for lambda (|lambda| > 1, Im > 0) and its
            // contracting partner w for 1/lambda, bilinearly normalized
            const Complex target_u = q.rep;
            int iu = -1, is = -1;
            double bu = 1e300, bs = 1e300;
            for (int i = 0; i < static_cast<int>(evs.size()); ++i) {
                const double du = std::abs(evs(i) - target_u);
                const double ds = std::abs(evs(i) - 1.0 / target_u);
                if (du < bu) { bu = du; iu = i; }
                if (ds < bs) { bs = ds; is = i; }
            }
            CVec z = vecs.col(iu);
            CVec w = vecs.col(is);
            const Complex s = csigma(z, w);
            if (std::abs(s) < 1e-12)
                throw NumericalError("block_normal_form: degenerate loxodromic pairing");
            w /= s;
            const double rt2 = std::sqrt(2.0);
            Vec e1 = rt2 * z.real(), e2 = rt2 * z.imag();
            Vec f1 = rt2 * w.real(), f2 = -rt2 * w.imag();
            nf.basis.resize(m, 4);
            nf.basis << e1, e2, f1, f2;
            const Mat r = restrict_form(s_b, nf.basis);
            // expected 2 b = 2 [c (x1 xi1 + x2 xi2) - d (x1 xi2 - x2 xi1)]
            nf.coeff_c = 0.5 * (r(0, 2) + r(1, 3));
            nf.coeff_d = 0.5 * (r(1, 2) - r(0, 3));
            if (nf.coeff_d < 0.0) {
                // conjugate representative: swap the roles of the two planes
                Mat flipped(m, 4);
                flipped << e2, e1, f2, f1;
                nf.basis = flipped;
                const Mat r2 = restrict_form(s_b, nf.basis);
                nf.coeff_c = 0.5 * (r2(0, 2) + r2(1, 3));
                nf.coeff_d = 0.5 * (r2(1, 2) - r2(0, 3));
            }
        }

        // symplectic normalization check on the block basis
        const int bc = static_cast<int>(nf.basis.cols());
        Mat gram(bc, bc);
        for (int i = 0; i < bc; ++i)
            for (int jx = 0; jx < bc; ++jx) gram(i, jx) = sigma(nf.basis.col(i), nf.basis.col(jx));
        const Mat jref = symplectic_j(bc);
        if ((gram - jref).cwiseAbs().maxCoeff() > 1e-8)
            throw NumericalError("block_normal_form: basis normalization defect above 1e-8");

        out.push_back(std::move(nf));
    }

    // order consistently with classify()
    std::sort(out.begin(), out.end(), [](const BlockNormalForm& a, const BlockNormalForm& b) {
        const Complex ma(a.coeff_c, a.coeff_d), mb(b.coeff_c, b.coeff_d);
        if (ma.real() != mb.real()) return ma.real() > mb.real();
        return ma.imag() > mb.imag();
    });
    for (size_t i = 0; i < out.size(); ++i) out[i].pair_index = static_cast<int>(i);
    return out;
}

NonResonanceResult nonresonance_scan(const std::vector<Complex>& per_dof_m, int K,
                                     double tol_res_base) {
    if (K > 20) throw ConfigError("nonresonance_scan: K > 20 rejected");
    if (K < 1) throw ConfigError("nonresonance_scan: need K >= 1");
    const int r = static_cast<int>(per_dof_m.size());
    if (r == 0) return {};
    double count = std::pow(2.0 * K + 1.0, r);
    if (count > 5e7) throw ConfigError("nonresonance_scan: scan too large");

    NonResonanceResult res;
    res.worst_weak.defect = std::numeric_limits<double>::max();
    res.worst_strong.defect = std::numeric_limits<double>::max();

    std::vector<int> k(r, -K);
    k.back() -= 1;  // pre-increment form
    auto advance = [&]() {
        for (int i = r - 1; i >= 0; --i) {
            if (k[i] < K) { ++k[i]; return true; }
            k[i] = -K;
        }
        return false;
    };

    while (advance()) {
        bool zero = true;
        int l1 = 0;
        for (int i = 0; i < r; ++i) {
            if (k[i] != 0) zero = false;
            l1 += std::abs(k[i]);
        }
        if (zero) continue;

        Complex sum(0.0, 0.0);
        for (int i = 0; i < r; ++i) sum += double(k[i]) * per_dof_m[i];
        const double im_res = std::remainder(sum.imag(), kTwoPi);
        const double defect = std::hypot(sum.real(), im_res);
        const double tol    = tol_res_base * (1.0 + l1);

        // strong condition: any nonzero k with the sum on the lattice
        if (defect < res.worst_strong.defect) res.worst_strong = {k, defect};
        if (defect < tol) res.ok_strong = false;

        // weak condition: on the lattice but the sum itself nonzero
        if (std::abs(sum) > tol) {
            if (defect < res.worst_weak.defect) res.worst_weak = {k, defect};
            if (defect < tol) res.ok_weak = false;
        }
    }
    return res;
}

HypothesisReport check_hypotheses(const MonodromyData& md, int K, double tol_res_base,
                                  double tol_ell) {
    HypothesisReport rep;
    rep.k_radius     = K;
    rep.tol_ell      = tol_ell;
    rep.tol_res_base = tol_res_base;

    Eigen::EigenSolver<Mat> es(md.a);
    const CVec evs = es.eigenvalues();

    rep.margin_unit = std::numeric_limits<double>::max();
    rep.margin_negative_axis = std::numeric_limits<double>::max();
    for (int i = 0; i < evs.size(); ++i) {
        rep.margin_unit = std::min(rep.margin_unit, std::abs(evs(i) - 1.0));
        rep.margin_negative_axis =
            std::min(rep.margin_negative_axis, dist_negative_axis(evs(i)));
    }
    rep.nondegenerate       = rep.margin_unit > tol_ell;
    rep.no_nonpositive_real = rep.margin_negative_axis > tol_ell;

    std::vector<Complex> dofs;
    try {
        const auto exps = classify(md, tol_ell);
        dofs = per_dof_exponents(exps);
        rep.distinct_exponents = true;
        for (const auto& e : exps)
            if (e.m.real() > tol_ell) rep.partially_hyperbolic = true;
    } catch (const HypothesisError&) {
        rep.distinct_exponents = false;
    }

    if (rep.distinct_exponents && !dofs.empty()) {
        const auto nr = nonresonance_scan(dofs, K, tol_res_base);
        rep.nonres_weak = nr.ok_weak;
        rep.nonres_strong = nr.ok_strong;
        rep.worst_weak  = nr.worst_weak;
        rep.worst_strong  = nr.worst_strong;
    }
    return rep;
}

namespace {

// greedy bijection between predicted and computed eigenvalues; the counts are
// tiny (2d <= 6), so full permutation search is affordable and exact
std::vector<int> best_assignment(const std::vector<Complex>& pred, const CVec& got) {
    const int m = static_cast<int>(pred.size());
    std::vector<int> perm(m), best(m);
    std::iota(perm.begin(), perm.end(), 0);
    double bestcost = std::numeric_limits<double>::max();
    std::sort(perm.begin(), perm.end());
    do {
        double c = 0.0;
        for (int i = 0; i < m; ++i) c += std::norm(got(perm[i]) - pred[i]);
        if (c < bestcost) { bestcost = c; best = perm; }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

std::vector<double> elliptic_winding_angles(const PeriodicOrbit& orbit, int grid) {
    const HamiltonianSystem& sys = orbit.system;
    const MonodromyData md = monodromy(orbit);
    const auto exps = classify(md);

    std::vector<Complex> targets;  // first-kind monodromy eigenvalues
    for (const auto& e : exps)
        if (e.kind == Kind::ee) targets.push_back(std::exp(Complex(0.0, e.theta)));
    if (targets.empty()) return {};

    const int m = md.transverse_dim();

    for (int n_grid = grid; n_grid <= 65536; n_grid *= 2) {
        // sample Y on a uniform grid
        IntegrateOptions iopts;
        iopts.tol = 1e-12;
        iopts.store_steps = false;
        iopts.output_times.resize(n_grid + 1);
        for (int i = 0; i <= n_grid; ++i)
            iopts.output_times[i] = orbit.period * (double(i) / n_grid);
        const Trajectory traj = integrate(sys, orbit.start, orbit.period, iopts);
        if (static_cast<int>(traj.times.size()) != n_grid + 1)
            throw NumericalError("conley_zehnder: sampling grid mismatch");

        // continuous section frames along the orbit
        SectionFrame f0 = make_section_frame(sys, orbit.start);
        Mat prev_basis  = f0.basis;

        std::vector<std::vector<Complex>> history;  // per sample, matched eigenvalues
        history.reserve(n_grid + 1);
        history.push_back(std::vector<Complex>(m, Complex(1.0, 0.0)));

        std::vector<double> theta(m, 0.0);
        bool refine = false;

        for (int i = 1; i <= n_grid && !refine; ++i) {
            SectionFrame fi = make_section_frame(sys, traj.states[i], &prev_basis);
            prev_basis      = fi.basis;

            // co-restriction across frames: coords_i( Y(t_i) basis_0 )
            Mat psi(m, m);
            for (int c = 0; c < m; ++c)
                psi.col(c) = fi.coords(traj.tangents[i] * f0.basis.col(c));

            Eigen::EigenSolver<Mat> es(psi);
            const CVec got = es.eigenvalues();

            // predict next positions by linear extrapolation
            std::vector<Complex> pred(m);
            const auto& prev = history.back();
            const auto* prev2 = history.size() > 1 ? &history[history.size() - 2] : nullptr;
            for (int c = 0; c < m; ++c)
                pred[c] = prev2 ? 2.0 * prev[c] - (*prev2)[c] : prev[c];

            const auto asg = best_assignment(pred, got);
            std::vector<Complex> matched(m);
            for (int c = 0; c < m; ++c) matched[c] = got(asg[c]);

            // accumulate argument increments
            for (int c = 0; c < m; ++c) {
                const Complex ratio = matched[c] / prev[c];
                const double dth = std::arg(ratio);
                if (std::abs(dth) > M_PI / 4.0) { refine = true; break; }
                theta[c] += dth;
            }
            history.push_back(std::move(matched));
        }
        if (refine) continue;

        // frame recurrence at the closing point
        if ((prev_basis - f0.basis).cwiseAbs().maxCoeff() > 1e-6)
            throw NumericalError(
                "conley_zehnder: section frame does not close up along the orbit (holonomy "
                "unresolved)");

        // pick the branches that land on the first-kind monodromy eigenvalues
        std::vector<double> windings;
        std::vector<bool> taken(m, false);
        for (const Complex& target : targets) {
            int bi = -1;
            double bd = std::numeric_limits<double>::max();
            for (int c = 0; c < m; ++c) {
                if (taken[c]) continue;
                const double d = std::abs(history.back()[c] - target);
                if (d < bd) { bd = d; bi = c; }
            }
            if (bi < 0 || bd > 1e-6)
                throw NumericalError("conley_zehnder: eigenvalue branch lost along the path");
            taken[bi] = true;

            // consistency: full angle must reduce to the first-kind angle mod 2 pi
            const double th = theta[bi];
            const double red = th - kTwoPi * std::floor(th / kTwoPi);
            const double target_angle = std::arg(target) > 0 ? std::arg(target)
                                                             : std::arg(target) + kTwoPi;
            if (std::abs(red - target_angle) > 1e-6 &&
                std::abs(red - target_angle + kTwoPi) > 1e-6 &&
                std::abs(red - target_angle - kTwoPi) > 1e-6)
                throw NumericalError("conley_zehnder: winding inconsistent with monodromy angle");
            windings.push_back(th);
        }
        return windings;
    }
    throw NumericalError("conley_zehnder: grid refinement exhausted");
}

int conley_zehnder(const PeriodicOrbit& orbit, int grid) {
    const auto windings = elliptic_winding_angles(orbit, grid);
    int g = 0;
    for (double th : windings) g += static_cast<int>(std::floor(th / kTwoPi));
    return g;
}

std::pair<Mat, Mat> stable_unstable_split(const MonodromyData& md, double tol_ell) {
    Eigen::EigenSolver<Mat> es(md.a);
    const CVec evs = es.eigenvalues();
    const CMat vecs = es.eigenvectors();
    const int m = md.transverse_dim();

    std::vector<Vec> plus, minus;
    std::vector<bool> used(m, false);
    for (int i = 0; i < m; ++i) {
        if (used[i]) continue;
        const Complex l = evs(i);
        if (std::abs(std::abs(l) - 1.0) <= tol_ell) continue;  // center directions excluded
        auto& bucket = std::abs(l) > 1.0 ? plus : minus;
        if (std::abs(l.imag()) <= tol_ell * (1.0 + std::abs(l))) {
            bucket.push_back(real_eigenvector(md.a, l.real()));
            used[i] = true;
        } else {
            if (l.imag() < 0.0) continue;  // conjugate handled with its partner
            bucket.push_back(vecs.col(i).real().normalized());
            bucket.push_back(vecs.col(i).imag().normalized());
            used[i] = true;
        }
    }
    if (plus.empty() && minus.empty())
        throw NumericalError("stable_unstable_split: no hyperbolic directions");

    auto pack = [&](const std::vector<Vec>& cols) {
        Mat out(m, cols.size());
        for (size_t c = 0; c < cols.size(); ++c) out.col(c) = cols[c];
        return out;
    };
    Mat fp = pack(plus), fm = pack(minus);

    // invariance check
    auto invariance = [&](const Mat& f) {
        if (f.cols() == 0) return 0.0;
        Eigen::HouseholderQR<Mat> qr(f);
        Mat q = Mat(qr.householderQ()).leftCols(f.cols());
        const Mat im = md.a * q;
        return (im - q * (q.transpose() * im)).cwiseAbs().maxCoeff();
    };
    if (invariance(fp) > 1e-8 || invariance(fm) > 1e-8)
        throw NumericalError("stable_unstable_split: invariance residual above 1e-8");
    return {fp, fm};
}

}  // namespace reslat
