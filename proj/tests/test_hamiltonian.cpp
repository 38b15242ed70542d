#include "reslat/hamiltonian.hpp"

#include <doctest.h>

#include <cmath>

using namespace reslat;

namespace {

// brute-force 1-d minimizer (golden section) used as the barrier oracle
double minimize_1d(const std::function<double(double)>& f, double a, double b) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (f(c) < f(d)) b = d;
        else             a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("model center manifold has H0 = E") {
    const auto sys = make_model({Complex(1.0, 0.0)});
    for (double e : {-0.4, 0.0, 0.3, 1.2}) {
        Vec z = Vec::Zero(4);
        z(2)  = e;  // tau
        CHECK(sys.h0(z) == doctest::Approx(e).epsilon(1e-15));
    }
}

TEST_CASE("model blocks and layout") {
    const auto blocks = model_blocks({Complex(1.0, 0.0), Complex(0.5, 0.2), Complex(0.0, 0.3)});
    REQUIRE(blocks.size() == 3);
    CHECK(blocks[0].kind == Kind::hr);
    CHECK(blocks[1].kind == Kind::hc);
    CHECK(blocks[1].width == 2);
    CHECK(blocks[2].kind == Kind::ee);
    const auto sys = make_model({Complex(1.0, 0.0), Complex(0.5, 0.2), Complex(0.0, 0.3)});
    CHECK(sys.dof() == 5);  // t + 1 + 2 + 1

    CHECK_THROWS_AS(make_model({Complex(-1.0, 0.0)}), ConfigError);
    CHECK_THROWS_AS(make_model({Complex(0.0, -0.3)}), ConfigError);
}

TEST_CASE("coulomb-stark barrier minimum is 2 sqrt(a), not 2/sqrt(a)") {
    for (double a : {1.0, 4.0}) {
        const auto vb = [a](double s) { return 1.0 / s + a * s; };
        const double s_star = minimize_1d(vb, 1e-3, 10.0);
        CHECK(s_star == doctest::Approx(1.0 / std::sqrt(a)).epsilon(1e-8));
        CHECK(vb(s_star) == doctest::Approx(2.0 * std::sqrt(a)).epsilon(1e-10));
    }
    // on the positive y1-axis the effective barrier of the built system
    const auto sys = make_coulomb_stark(1.0, 2);
    Vec z = Vec::Zero(4);
    z(0)  = 1.0;
    CHECK(sys.h0(z) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("builder errors") {
    CHECK_THROWS_AS(build_system({.name = "no_such_system"}), ConfigError);
    CHECK_THROWS_AS(make_coulomb_stark(-1.0, 2), ConfigError);
    CHECK_THROWS_AS(make_coulomb_stark(1.0, 1), ConfigError);
    CHECK_THROWS_AS(make_revolution_surface_4d(-1.0, 0.5), ConfigError);
    // callback table missing a derivative
    auto eval0 = [](const Vec& z) { return z.squaredNorm(); };
    CHECK_THROWS_AS(make_user(2, eval0, nullptr, nullptr), ConfigError);
}

TEST_CASE("derivative consistency at 100 random points per built-in system") {
    std::vector<HamiltonianSystem> systems;
    systems.push_back(make_model({Complex(1.0, 0.0)}));
    systems.push_back(make_model({Complex(0.5, 0.2), Complex(0.0, 0.3)}, "cos2t"));
    systems.push_back(make_coulomb_stark(1.0, 2));
    systems.push_back(make_coulomb_stark(2.5, 3));
    systems.push_back(make_hyperboloid_geodesic());
    systems.push_back(make_revolution_surface_4d(1.0, -0.2));

    for (const auto& sys : systems) {
        CAPTURE(sys.name());
        const auto rep = check_derivatives(sys, 100);
        CHECK(rep.max_grad_rel_err <= 1e-6);
        CHECK(rep.max_hess_asym <= 1e-12);
        CHECK(rep.max_hess_rel_err <= 1e-5);
        CHECK(rep.pass);
    }
}

TEST_CASE("hyperboloid equator point is critical transversally") {
    const auto sys = make_hyperboloid_geodesic();
    // (theta, z; p_theta, p_z) = (0, 0; 1, 0): unit speed on the waist circle
    Vec z = Vec::Zero(4);
    z(2)  = 1.0;
    CHECK(sys.h0(z) == doctest::Approx(0.5));
    const Vec g = sys.grad(z);
    CHECK(g(0) == doctest::Approx(0.0));  // dH/dtheta
    CHECK(g(1) == doctest::Approx(0.0));  // dH/dz vanishes on the equator
    CHECK(g(3) == doctest::Approx(0.0));  // dH/dp_z
}

TEST_CASE("wrap_diff folds the angular coordinate") {
    const auto sys = make_model({Complex(1.0, 0.0)});
    Vec a = Vec::Zero(4), b = Vec::Zero(4);
    a(0)  = 6.28318530717958647692 + 0.001;
    b(0)  = 0.001;
    const Vec d = sys.wrap_diff(a, b);
    CHECK(std::abs(d(0)) < 1e-12);
}
