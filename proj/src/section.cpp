#include "reslat/section.hpp"

#include <Eigen/QR>

#include <cmath>

namespace reslat {

SectionSpec section_through(const HamiltonianSystem& sys, const Vec& base) {
    SectionSpec sec;
    sec.base   = base;
    sec.normal = sys.vector_field(base);
    const double nn = sec.normal.norm();
    if (nn < 1e-14) throw NumericalError("section_through: vanishing flow at base point");
    sec.normal /= nn;
    return sec;
}

double check_transversality(const HamiltonianSystem& sys, const SectionSpec& sec) {
    if (sec.normal.norm() < 1e-14) throw ConfigError("section: zero normal");
    const double t = sec.normal.dot(sys.vector_field(sec.base));
    if (std::abs(t) < 1e-12)
        throw NumericalError("section: flow tangent to section (transversality lost)");
    return t;
}

Vec SectionFrame::coords(const Vec& x) const {
    const int d = transverse_dim() / 2;
    Vec c(2 * d);
    for (int j = 0; j < d; ++j) {
        c(j)     = sigma(x, basis.col(d + j));   // coefficient of u_j
        c(d + j) = -sigma(x, basis.col(j));      // coefficient of w_j
    }
    return c;
}

Mat SectionFrame::corestrict(const Mat& y) const {
    const int m = transverse_dim();
    Mat a(m, m);
    for (int j = 0; j < m; ++j) a.col(j) = coords(y * basis.col(j));
    return a;
}

SectionFrame make_section_frame(const HamiltonianSystem& sys, const Vec& point,
                                const Mat* seed) {
    const int n2 = sys.dim();
    SectionFrame fr;
    fr.flow  = sys.vector_field(point);
    fr.gradh = sys.grad(point);
    if (fr.flow.norm() < 1e-14)
        throw NumericalError("section frame: stationary point has no transverse splitting");

    // Orthonormal basis of the Euclidean complement of span{flow, gradh};
    // this equals the symplectic complement of the longitudinal plane.
    Mat fg(n2, 2);
    fg.col(0) = fr.flow.normalized();
    fg.col(1) = fr.gradh;
    Eigen::HouseholderQR<Mat> qr(fg);
    Mat q = qr.householderQ();
    const int d = (n2 - 2) / 2;
    Mat u(n2, d), w(n2, d);

    if (seed) {
        // Project the previous frame onto the new complement, keeping each
        // column's role; continuity of the frame field along a trajectory
        // depends on not reshuffling pairs here.
        Mat p = Mat::Identity(n2, n2) - q.leftCols(2) * q.leftCols(2).transpose();
        Mat cand = p * (*seed);
        for (int j = 0; j < d; ++j) {
            Vec uj = cand.col(j);
            Vec wj = cand.col(d + j);
            for (int i = 0; i < j; ++i) {
                uj += -sigma(uj, w.col(i)) * u.col(i) + sigma(uj, u.col(i)) * w.col(i);
                wj += -sigma(wj, w.col(i)) * u.col(i) + sigma(wj, u.col(i)) * w.col(i);
            }
            const double un = uj.norm();
            if (un < 1e-10) throw NumericalError("section frame: seeded column collapsed");
            uj /= un;
            wj *= un;  // keep sigma(u, w) before rescaling
            const double s = sigma(uj, wj);
            if (std::abs(s) < 1e-10)
                throw NumericalError("section frame: seeded pairing degenerated");
            wj /= s;
            u.col(j) = uj;
            w.col(j) = wj;
        }
    } else {
        // Symplectic Gram-Schmidt on the complement columns, deterministic
        // greedy pivoting.
        std::vector<Vec> pool;
        for (int j = 0; j < n2 - 2; ++j) pool.push_back(q.col(2 + j));

        for (int j = 0; j < d; ++j) {
            int iu = -1;
            double best = 0.0;
            for (size_t i = 0; i < pool.size(); ++i)
                if (pool[i].norm() > best) { best = pool[i].norm(); iu = static_cast<int>(i); }
            if (iu < 0 || best < 1e-10)
                throw NumericalError("section frame: degenerate transverse space");
            Vec uj = pool[iu] / best;
            pool.erase(pool.begin() + iu);

            int iw = -1;
            double bests = 0.0;
            for (size_t i = 0; i < pool.size(); ++i) {
                const double s = std::abs(sigma(uj, pool[i]));
                if (s > bests) { bests = s; iw = static_cast<int>(i); }
            }
            if (iw < 0 || bests < 1e-12)
                throw NumericalError("section frame: no symplectic partner found");
            Vec wj = pool[iw] / sigma(uj, pool[iw]);
            pool.erase(pool.begin() + iw);

            for (auto& v : pool) v += -sigma(v, wj) * uj + sigma(v, uj) * wj;

            u.col(j) = uj;
            w.col(j) = wj;
        }
    }

    fr.basis.resize(n2, 2 * d);
    fr.basis << u, w;
    return fr;
}

namespace {

// Wrap-aware section function g(z) = normal . wrap(z - base). For sections
// whose normal touches an angular coordinate, jump_guard is a quarter of the
// smallest wrap scale; sign changes with |g| beyond it are wrap artifacts,
// not crossings.
struct SectionFunction {
    const HamiltonianSystem* sys;
    const SectionSpec* sec;
    double jump_guard;

    SectionFunction(const HamiltonianSystem& s, const SectionSpec& sc) : sys(&s), sec(&sc) {
        jump_guard = std::numeric_limits<double>::infinity();
        for (const auto& ac : s.angles()) {
            const double c = std::abs(sc.normal(ac.index));
            if (c > 1e-12) jump_guard = std::min(jump_guard, 0.25 * ac.period * c);
        }
    }

    double operator()(const Vec& z) const {
        return sec->normal.dot(sys->wrap_diff(z, sec->base));
    }
};

}  // namespace

std::optional<double> estimate_return_time(const HamiltonianSystem& sys, const SectionSpec& sec,
                                           const Vec& start, double tol, double horizon) {
    SectionFunction g(sys, sec);
    auto rhs = hamiltonian_rhs(sys);
    const int n2 = sys.dim();

    Vec s0(n2 + n2 * n2 + 2);
    s0.head(n2) = start;
    Eigen::Map<Mat>(s0.data() + n2, n2, n2) = Mat::Identity(n2, n2);
    s0.tail(2).setZero();

    const double trust = 0.25 * (1.0 + start.norm());
    bool exited = false;
    double d_prev2 = 0.0, d_prev = 0.0, t_prev = 0.0;
    double g_prev = g(start);
    std::optional<double> wrap_time, dip_time;

    StepObserver obs = [&](const DenseStep& ds) -> std::optional<double> {
        constexpr int kSub = 4;
        for (int i = 1; i <= kSub; ++i) {
            const double t = ds.ta() + (ds.tb() - ds.ta()) * i / kSub;
            const Vec z = ds.eval(t).head(n2);
            const double gv = g(z);
            if (!wrap_time && std::isfinite(g.jump_guard) && gv * g_prev < 0.0 &&
                std::abs(gv) > g.jump_guard && std::abs(g_prev) > g.jump_guard)
                wrap_time = 0.5 * (t + t_prev);
            g_prev = gv;

            const double d = sys.wrap_diff(z, start).norm();
            if (!exited) {
                exited = d > trust;
            } else if (!dip_time && d_prev > 0.0 && d_prev < d_prev2 && d_prev <= d &&
                       d_prev < 0.8 * trust) {
                dip_time = t_prev;
            }
            d_prev2 = d_prev;
            d_prev  = d;
            t_prev  = t;
            if (wrap_time && dip_time) return t;  // stop early
        }
        return std::nullopt;
    };
    try {
        integrate_core(rhs, s0, 0.0, horizon, tol, tol, horizon / 32.0, 2000000, obs);
    } catch (const NumericalError&) {
        // blow-up or cutoff during the scout: use whatever was seen
    }
    if (wrap_time) return 2.0 * *wrap_time;
    return dip_time;
}

PoincareReturn poincare_return(const HamiltonianSystem& sys, const SectionSpec& sec,
                               const Vec& start, const ReturnOptions& opts) {
    const double orient = check_transversality(sys, sec) > 0.0 ? 1.0 : -1.0;
    const int n2 = sys.dim();

    SectionFunction g(sys, sec);
    auto rhs = hamiltonian_rhs(sys);

    Vec s0(n2 + n2 * n2 + 2);
    s0.head(n2) = start;
    Eigen::Map<Mat>(s0.data() + n2, n2, n2) = Mat::Identity(n2, n2);
    s0.tail(2).setZero();

    // sampled section values along each accepted step; sub-sampling catches
    // double crossings inside one step
    auto gz = [&](const DenseStep& ds, double t) { return orient * g(ds.eval(t).head(n2)); };

    double g_prev = orient * g(start);
    double t_prev = 0.0;

    StepObserver obs = [&](const DenseStep& ds) -> std::optional<double> {
        constexpr int kSub = 4;
        double ga = g_prev, ta = t_prev;
        for (int i = 1; i <= kSub; ++i) {
            const double tb = ds.ta() + (ds.tb() - ds.ta()) * i / kSub;
            const double gb = gz(ds, tb);
            const bool in_guard = std::abs(ga) < g.jump_guard && std::abs(gb) < g.jump_guard;
            if (tb > opts.t_min && ga < 0.0 && gb >= 0.0 && in_guard) {
                // bisection + final secant polish on the dense interpolant
                double lo = ta, hi = tb, glo = ga, ghi = gb;
                if (lo < opts.t_min) {
                    lo  = opts.t_min;
                    glo = gz(ds, lo);
                    if (glo >= 0.0) {  // the sign change sits before the guard
                        ga = gb;
                        ta = tb;
                        continue;
                    }
                }
                for (int it = 0; it < 200 && (hi - lo) > 1e-15 * (1.0 + hi); ++it) {
                    double mid = 0.5 * (lo + hi);
                    // secant acceleration once the bracket is tight
                    if (ghi != glo) {
                        const double sec_t = hi - ghi * (hi - lo) / (ghi - glo);
                        if (sec_t > lo && sec_t < hi && (hi - lo) < 0.1 * (ds.tb() - ds.ta()))
                            mid = sec_t;
                    }
                    const double gm = gz(ds, mid);
                    if (std::abs(gm) <= 1e-12) { lo = hi = mid; glo = ghi = gm; break; }
                    if (gm < 0.0) { lo = mid; glo = gm; }
                    else          { hi = mid; ghi = gm; }
                }
                const double tc = 0.5 * (lo + hi);
                if (std::abs(gz(ds, tc)) > 1e-9)
                    throw NumericalError("poincare_return: root polish failed on section function");
                return tc;
            }
            ga = gb;
            ta = tb;
        }
        g_prev = ga;
        t_prev = ds.tb();
        if (ds.tb() > opts.t_max) throw NumericalError("poincare_return: no return before t_max");
        return std::nullopt;
    };

    CoreResult res = integrate_core(rhs, s0, 0.0, opts.t_max, opts.tol, opts.tol,
                                    opts.max_step, 2000000, obs);
    if (!res.stopped_by_observer)
        throw NumericalError("poincare_return: no return before t_max");

    PoincareReturn ret;
    ret.time  = res.t_end;
    ret.point = res.y_end.head(n2);
    ret.flow_jacobian = Eigen::Map<const Mat>(res.y_end.data() + n2, n2, n2);

    // tangential-crossing check: dg/dt = normal . X_H at the crossing
    const Vec f_ret = sys.vector_field(ret.point);
    const double dgdt = sec.normal.dot(f_ret);
    if (std::abs(dgdt) < 1e-10)
        throw NumericalError("poincare_return: tangential crossing (|dg/dt| < 1e-10)");

    // time-corrected return jacobian: project the flow variation onto the section
    ret.jacobian = ret.flow_jacobian -
                   f_ret * (sec.normal.transpose() * ret.flow_jacobian) / dgdt;
    return ret;
}

}  // namespace reslat
