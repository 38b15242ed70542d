#include "reslat/hamiltonian.hpp"

#include <cmath>

namespace reslat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double get_param(const std::map<std::string, double>& p, const std::string& key, double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

}  // namespace

std::vector<ModelBlock> model_blocks(const std::vector<Complex>& mu) {
    std::vector<ModelBlock> blocks;
    int slot = 0;
    for (const Complex& m : mu) {
        if (m.real() < -1e-14)
            throw ConfigError("model: exponents must satisfy Re mu >= 0, got Re = " +
                              std::to_string(m.real()));
        if (std::abs(m) < 1e-14) throw ConfigError("model: zero exponent is degenerate");
        ModelBlock b;
        b.mu      = m;
        b.x_index = slot;
        if (std::abs(m.imag()) < 1e-14) {
            b.kind  = Kind::hr;
            b.width = 1;
        } else if (std::abs(m.real()) < 1e-14) {
            if (m.imag() < 0.0) throw ConfigError("model: elliptic exponents need Im mu > 0");
            b.kind  = Kind::ee;
            b.width = 1;
        } else {
            b.kind  = Kind::hc;
            b.width = 2;
        }
        slot += b.width;
        blocks.push_back(b);
    }
    return blocks;
}

// Model Hamiltonian on T*(S^1 x R^d) in real coordinates
//   y = (t, x_1, ..., x_d), eta = (tau, xi_1, ..., xi_d),
//   H = tau + sum over blocks of
//         hr:  mu * x xi
//         ee:  omega * (x^2 + xi^2) / 2           (mu = i omega)
//         hc:  c (x1 xi1 + x2 xi2) - d (x1 xi2 - x2 xi1)   (mu = c + i d)
// The sign of tau is fixed so that dS0/dE = T > 0.
HamiltonianSystem make_model(const std::vector<Complex>& mu, const std::string& h1_kind) {
    const auto blocks = model_blocks(mu);
    int d             = 0;
    for (const auto& b : blocks) d += b.width;
    const int n = 1 + d;

    auto eval0 = [blocks, n](const Vec& z) {
        double h = z(n);  // tau
        for (const auto& b : blocks) {
            const int ix = 1 + b.x_index;      // position slot
            const int ip = n + 1 + b.x_index;  // momentum slot
            if (b.kind == Kind::hr) {
                h += b.mu.real() * z(ix) * z(ip);
            } else if (b.kind == Kind::ee) {
                h += b.mu.imag() * 0.5 * (z(ix) * z(ix) + z(ip) * z(ip));
            } else {
                const double c = b.mu.real(), dd = b.mu.imag();
                h += c * (z(ix) * z(ip) + z(ix + 1) * z(ip + 1)) -
                     dd * (z(ix) * z(ip + 1) - z(ix + 1) * z(ip));
            }
        }
        return h;
    };

    auto grad0 = [blocks, n](const Vec& z) {
        Vec g = Vec::Zero(2 * n);
        g(n)  = 1.0;  // dH/dtau
        for (const auto& b : blocks) {
            const int ix = 1 + b.x_index;
            const int ip = n + 1 + b.x_index;
            if (b.kind == Kind::hr) {
                g(ix) += b.mu.real() * z(ip);
                g(ip) += b.mu.real() * z(ix);
            } else if (b.kind == Kind::ee) {
                g(ix) += b.mu.imag() * z(ix);
                g(ip) += b.mu.imag() * z(ip);
            } else {
                const double c = b.mu.real(), dd = b.mu.imag();
                g(ix) += c * z(ip) - dd * z(ip + 1);
                g(ix + 1) += c * z(ip + 1) + dd * z(ip);
                g(ip) += c * z(ix) + dd * z(ix + 1);
                g(ip + 1) += c * z(ix + 1) - dd * z(ix);
            }
        }
        return g;
    };

    auto hess0 = [blocks, n](const Vec&) {
        Mat h = Mat::Zero(2 * n, 2 * n);
        for (const auto& b : blocks) {
            const int ix = 1 + b.x_index;
            const int ip = n + 1 + b.x_index;
            if (b.kind == Kind::hr) {
                h(ix, ip) = h(ip, ix) = b.mu.real();
            } else if (b.kind == Kind::ee) {
                h(ix, ix) = h(ip, ip) = b.mu.imag();
            } else {
                const double c = b.mu.real(), dd = b.mu.imag();
                h(ix, ip) = h(ip, ix) = c;
                h(ix + 1, ip + 1) = h(ip + 1, ix + 1) = c;
                h(ix, ip + 1) = h(ip + 1, ix) = -dd;
                h(ix + 1, ip) = h(ip, ix + 1) = dd;
            }
        }
        return h;
    };

    HamiltonianSystem::ScalarFn eval1;
    if (h1_kind == "zero") {
        eval1 = {};
    } else if (h1_kind == "one") {
        eval1 = [](const Vec&) { return 1.0; };
    } else if (h1_kind == "cos2t") {
        eval1 = [](const Vec& z) { return std::cos(z(0)) * std::cos(z(0)); };
    } else {
        throw ConfigError("model: unknown h1 kind '" + h1_kind + "'");
    }

    auto probe = [n](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vec z(2 * n);
        for (int i = 0; i < 2 * n; ++i) z(i) = u(rng);
        z(0) = kTwoPi * 0.5 * (u(rng) + 1.0);
        return z;
    };

    return HamiltonianSystem("model", n, eval0, grad0, hess0, eval1, {},
                             {AngleCoord{0, kTwoPi}}, probe);
}

// H = |eta|^2 + 1/|y| + a y_1 on R^n: repulsive Coulomb potential with a
// constant Stark field along y_1.
HamiltonianSystem make_coulomb_stark(double a, int n) {
    if (!(a > 0.0)) throw ConfigError("coulomb_stark: need a > 0");
    if (n < 2) throw ConfigError("coulomb_stark: need n >= 2");

    auto eval0 = [a, n](const Vec& z) {
        const double r = z.head(n).norm();
        return z.tail(n).squaredNorm() + 1.0 / r + a * z(0);
    };
    auto grad0 = [a, n](const Vec& z) {
        Vec g(2 * n);
        const Vec y    = z.head(n);
        const double r = y.norm();
        g.head(n)      = -y / (r * r * r);
        g(0) += a;
        g.tail(n) = 2.0 * z.tail(n);
        return g;
    };
    auto hess0 = [n](const Vec& z) {
        Mat h          = Mat::Zero(2 * n, 2 * n);
        const Vec y    = z.head(n);
        const double r = y.norm();
        const double r3 = r * r * r, r5 = r3 * r * r;
        h.topLeftCorner(n, n) = 3.0 * y * y.transpose() / r5 - Mat::Identity(n, n) / r3;
        h.bottomRightCorner(n, n) = 2.0 * Mat::Identity(n, n);
        return h;
    };

    auto probe = [n](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vec z(2 * n);
        for (;;) {
            for (int i = 0; i < n; ++i) z(i) = 2.5 * u(rng);
            const double r = z.head(n).norm();
            if (r > 0.5 && r < 2.5) break;
        }
        for (int i = n; i < 2 * n; ++i) z(i) = u(rng);
        return z;
    };

    return HamiltonianSystem("coulomb_stark", n, eval0, grad0, hess0, {},
                             {{"a", a}, {"n", double(n)}}, {}, probe, 1e-8);
}

namespace {

// Geodesic Hamiltonian of a revolution hypersurface
//   { (f(z) cos th, f(z) sin th, z) : z in R^k },  f(z)^2 = 1 + sum a_i z_i^2,
// in induced coordinates (th, z; p_th, p_z). With
//   phi = 1 + sum a_i z_i^2,  psi = sum a_i^2 z_i^2,  w = sum a_i z_i p_i,
// the inverse metric gives
//   H = p_th^2 / (2 phi) + |p_z|^2 / 2 - w^2 / (2 (phi + psi)).
// The circle z = 0 is a closed geodesic; a_i > 0 makes direction i real
// hyperbolic and a_i < 0 elliptic, with per-period exponent 2 pi sqrt(|a_i|).
HamiltonianSystem make_warped_geodesic(std::string name, const std::vector<double>& a) {
    const int k = static_cast<int>(a.size());
    const int n = 1 + k;
    for (double ai : a)
        if (std::abs(ai) > 2.0)
            throw ConfigError(name + ": profile coefficients limited to |a| <= 2");

    struct Aux {
        double phi, psi, w, u, s;
        Vec alpha, beta;  // alpha_i = a_i z_i, beta_i = a_i (1 + a_i) z_i
    };
    auto aux = [a, k, n](const Vec& zz) {
        Aux x;
        x.alpha.resize(k);
        x.beta.resize(k);
        x.phi = 1.0;
        x.psi = 0.0;
        x.w   = 0.0;
        for (int i = 0; i < k; ++i) {
            const double zi = zz(1 + i), pi = zz(n + 1 + i);
            x.alpha(i) = a[i] * zi;
            x.beta(i)  = a[i] * (1.0 + a[i]) * zi;
            x.phi += a[i] * zi * zi;
            x.psi += a[i] * a[i] * zi * zi;
            x.w += a[i] * zi * pi;
        }
        if (x.phi < 1e-10) throw NumericalError("warped geodesic: metric degenerated (phi <= 0)");
        x.u = 1.0 / x.phi;
        x.s = 1.0 / (x.phi + x.psi);
        return x;
    };

    auto eval0 = [aux, k, n](const Vec& z) {
        const Aux x     = aux(z);
        const double pt = z(n);
        double pz2      = 0.0;
        for (int i = 0; i < k; ++i) pz2 += z(n + 1 + i) * z(n + 1 + i);
        return 0.5 * pt * pt * x.u + 0.5 * pz2 - 0.5 * x.w * x.w * x.s;
    };

    auto grad0 = [aux, a, k, n](const Vec& z) {
        const Aux x     = aux(z);
        const double pt = z(n);
        Vec g           = Vec::Zero(2 * n);
        for (int i = 0; i < k; ++i) {
            const double pi = z(n + 1 + i);
            g(1 + i)        = -pt * pt * x.alpha(i) * x.u * x.u - x.w * a[i] * pi * x.s +
                       x.w * x.w * x.beta(i) * x.s * x.s;
            g(n + 1 + i) = pi - x.w * x.alpha(i) * x.s;
        }
        g(n) = pt * x.u;
        return g;
    };

    auto hess0 = [aux, a, k, n](const Vec& z) {
        const Aux x     = aux(z);
        const double pt = z(n);
        const double u = x.u, s = x.s, w = x.w;
        Mat h = Mat::Zero(2 * n, 2 * n);
        for (int i = 0; i < k; ++i) {
            const double pi = z(n + 1 + i);
            for (int j = 0; j < k; ++j) {
                const double pj = z(n + 1 + j);
                double v = 4.0 * pt * pt * x.alpha(i) * x.alpha(j) * u * u * u -
                           a[i] * a[j] * pi * pj * s +
                           2.0 * w * s * s * (a[i] * pi * x.beta(j) + a[j] * pj * x.beta(i)) -
                           4.0 * w * w * x.beta(i) * x.beta(j) * s * s * s;
                if (i == j)
                    v += -pt * pt * a[i] * u * u + w * w * a[i] * (1.0 + a[i]) * s * s;
                h(1 + i, 1 + j) = v;

                double m = -a[i] * x.alpha(j) * pi * s + 2.0 * w * x.alpha(j) * x.beta(i) * s * s;
                if (i == j) m += -a[i] * w * s;
                h(1 + i, n + 1 + j) = m;
                h(n + 1 + j, 1 + i) = m;

                h(n + 1 + i, n + 1 + j) = (i == j ? 1.0 : 0.0) - x.alpha(i) * x.alpha(j) * s;
            }
            h(1 + i, n) = h(n, 1 + i) = -2.0 * pt * x.alpha(i) * u * u;
        }
        h(n, n) = u;
        return h;
    };

    auto probe = [k, n](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vec z(2 * n);
        z(0) = kTwoPi * 0.5 * (u(rng) + 1.0);
        for (int i = 0; i < k; ++i) z(1 + i) = 0.5 * u(rng);
        for (int i = 0; i < n; ++i) z(n + i) = u(rng);
        return z;
    };

    std::map<std::string, double> params;
    for (int i = 0; i < k; ++i) params["a" + std::to_string(i + 1)] = a[i];

    return HamiltonianSystem(std::move(name), n, eval0, grad0, hess0, {},
                             std::move(params), {AngleCoord{0, kTwoPi}}, probe);
}

}  // namespace

HamiltonianSystem make_hyperboloid_geodesic() {
    // x^2 + y^2 - z^2 = 1: profile f^2 = 1 + z^2.
    return make_warped_geodesic("hyperboloid_geodesic", {1.0});
}

HamiltonianSystem make_revolution_surface_4d(double a1, double a2) {
    if (!(a1 > 0.0))
        throw ConfigError("revolution_surface_4d: need a1 > 0 for a hyperbolic direction");
    return make_warped_geodesic("revolution_surface_4d", {a1, a2});
}

HamiltonianSystem make_user(int dof, HamiltonianSystem::ScalarFn eval0,
                            HamiltonianSystem::GradFn grad0, HamiltonianSystem::HessFn hess0,
                            HamiltonianSystem::ScalarFn eval1, std::vector<AngleCoord> angles) {
    return HamiltonianSystem("user", dof, std::move(eval0), std::move(grad0), std::move(hess0),
                             std::move(eval1), {}, std::move(angles));
}

HamiltonianSystem build_system(const SystemSpec& spec) {
    if (spec.name == "model") {
        if (spec.mu.empty()) throw ConfigError("model: empty exponent vector");
        return make_model(spec.mu, spec.h1_kind);
    }
    if (spec.name == "coulomb_stark") {
        const double a = get_param(spec.params, "a", 1.0);
        const int n    = static_cast<int>(get_param(spec.params, "n", 2.0));
        return make_coulomb_stark(a, n);
    }
    if (spec.name == "hyperboloid_geodesic") return make_hyperboloid_geodesic();
    if (spec.name == "revolution_surface_4d") {
        const double a1 = get_param(spec.params, "a1", 1.0);
        const double a2 = get_param(spec.params, "a2", -0.2);
        return make_revolution_surface_4d(a1, a2);
    }
    throw ConfigError("build_system: unknown system '" + spec.name + "'");
}

DerivativeCheckReport check_derivatives(const HamiltonianSystem& sys, int npoints,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DerivativeCheckReport rep;
    const int dim = sys.dim();

    for (int p = 0; p < npoints; ++p) {
        const Vec z    = sys.random_probe(rng);
        const Vec g    = sys.grad(z);
        const Mat h    = sys.hess(z);
        const double gs = 1.0 + g.norm();

        rep.max_hess_asym = std::max(rep.max_hess_asym, (h - h.transpose()).cwiseAbs().maxCoeff());

        for (int i = 0; i < dim; ++i) {
            const double step = 6e-6 * (1.0 + std::abs(z(i)));
            Vec zp = z, zm = z;
            zp(i) += step;
            zm(i) -= step;
            const double fd_g = (sys.h0(zp) - sys.h0(zm)) / (2.0 * step);
            rep.max_grad_rel_err =
                std::max(rep.max_grad_rel_err, std::abs(fd_g - g(i)) / gs);

            const Vec fd_h = (sys.grad(zp) - sys.grad(zm)) / (2.0 * step);
            const double hs = 1.0 + h.col(i).norm();
            rep.max_hess_rel_err =
                std::max(rep.max_hess_rel_err, (fd_h - h.col(i)).cwiseAbs().maxCoeff() / hs);
        }
    }

    rep.pass = rep.max_grad_rel_err <= 1e-6 && rep.max_hess_asym <= 1e-12 &&
               rep.max_hess_rel_err <= 1e-5;
    return rep;
}

}  // namespace reslat
