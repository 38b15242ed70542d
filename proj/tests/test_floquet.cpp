#include "reslat/floquet.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace reslat;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Mat rotation2(double th) {
    Mat r(2, 2);
    r << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    return r;
}

MonodromyData md_from(const Mat& a) {
    MonodromyData md;
    md.a      = a;
    md.energy = 0.0;
    md.period = kTwoPi;
    return md;
}

// hc normal-form generator with exponents +-(c +- i d)
Mat hc_generator(double c, double d) {
    Mat b = Mat::Zero(4, 4);
    b(0, 0) = c;  b(0, 1) = d;
    b(1, 0) = -d; b(1, 1) = c;
    b(2, 2) = -c; b(2, 3) = d;
    b(3, 2) = -d; b(3, 3) = -c;
    return b;
}

Mat random_symplectic(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    Mat s(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s(i, j) = u(rng);
    const Mat sym = 0.5 * (s + s.transpose());
    const Mat gen = symplectic_j(dim) * sym;
    return gen.exp();
}

PeriodicOrbit model_orbit(const std::vector<Complex>& mu, double e) {
    const auto sys = make_model(mu);
    return find_periodic_orbit(sys, default_orbit_guess(sys, e), e, 1e-11);
}

}  // namespace

TEST_CASE("monodromy of the hr model orbit is diag(e^{2pi}, e^{-2pi})") {
    const auto orbit = model_orbit({Complex(1.0, 0.0)}, 0.3);
    const auto md = monodromy(orbit);
    REQUIRE(md.a.rows() == 2);
    CHECK(md.a(0, 0) == doctest::Approx(std::exp(kTwoPi)).epsilon(1e-9));
    CHECK(md.a(1, 1) == doctest::Approx(std::exp(-kTwoPi)).epsilon(1e-9));
    CHECK(std::abs(md.a(0, 1)) < 1e-8);
    CHECK(std::abs(md.a(1, 0)) < 1e-8);
    CHECK(md.a.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("monodromy of an elliptic model block is a rotation by 2 pi omega") {
    const auto orbit = model_orbit({Complex(0.0, 0.3)}, 0.1);
    const auto md = monodromy(orbit);
    const Mat expect = rotation2(kTwoPi * 0.3);
    CHECK((md.a - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("monodromy integrity across all built-in systems") {
    struct Case {
        HamiltonianSystem sys;
        double e;
    };
    std::vector<Case> cases;
    cases.push_back({make_model({Complex(1.0, 0.0)}), 0.2});
    cases.push_back({make_model({Complex(0.5, 0.2), Complex(0.0, 0.3)}), 0.1});
    cases.push_back({make_coulomb_stark(1.0, 2), 2.2});
    cases.push_back({make_hyperboloid_geodesic(), 0.5});
    cases.push_back({make_revolution_surface_4d(1.0, -0.2), 0.5});

    for (const auto& c : cases) {
        CAPTURE(c.sys.name());
        const auto orbit = find_periodic_orbit(c.sys, default_orbit_guess(c.sys, c.e), c.e,
                                               1e-11);
        const auto md = monodromy(orbit);
        const int m = md.transverse_dim();
        const Mat j = symplectic_j(m);
        CHECK((md.a.transpose() * j * md.a - j).cwiseAbs().maxCoeff() <= 1e-7);
        CHECK(std::abs(md.a.determinant() - 1.0) <= 1e-9);

        // quadruple closure under inversion and conjugation
        Eigen::EigenSolver<Mat> es(md.a);
        const CVec evs = es.eigenvalues();
        for (int i = 0; i < evs.size(); ++i) {
            double d_inv = 1e300, d_conj = 1e300;
            for (int k = 0; k < evs.size(); ++k) {
                d_inv  = std::min(d_inv, std::abs(evs(k) - 1.0 / evs(i)));
                d_conj = std::min(d_conj, std::abs(evs(k) - std::conj(evs(i))));
            }
            CHECK(d_inv <= 1e-7 * (1.0 + std::abs(1.0 / evs(i))));
            CHECK(d_conj <= 1e-7 * (1.0 + std::abs(evs(i))));
        }
    }
}

TEST_CASE("classify: hyperbolic pair") {
    Mat a(2, 2);
    a << std::exp(1.0), 0.0, 0.0, std::exp(-1.0);
    const auto exps = classify(md_from(a));
    REQUIRE(exps.size() == 1);
    CHECK(exps[0].kind == Kind::hr);
    CHECK(exps[0].m.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exps[0].m.imag() == doctest::Approx(0.0));
}

TEST_CASE("classify: planar rotation") {
    const auto exps = classify(md_from(rotation2(0.6)));
    REQUIRE(exps.size() == 1);
    CHECK(exps[0].kind == Kind::ee);
    CHECK(exps[0].theta == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(exps[0].m.imag() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(exps[0].m.real() == doctest::Approx(0.0));
}

TEST_CASE("classify: first-kind angle beyond pi is kept, not conjugated") {
    // rotation by 1.4 pi: the Krein-positive eigenvalue has negative
    // imaginary part; the angle must come out as 1.4 pi, not 0.6 pi
    const double th = 1.4 * M_PI;
    const auto exps = classify(md_from(rotation2(th)));
    REQUIRE(exps.size() == 1);
    CHECK(exps[0].theta == doctest::Approx(th).epsilon(1e-12));
}

TEST_CASE("classify: loxodromic quadruple") {
    const Mat a = hc_generator(0.5, 0.2).exp();
    const auto exps = classify(md_from(a));
    REQUIRE(exps.size() == 1);
    CHECK(exps[0].kind == Kind::hc);
    CHECK(exps[0].m.real() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(exps[0].m.imag() == doctest::Approx(0.2).epsilon(1e-10));

    const auto dofs = per_dof_exponents(exps);
    REQUIRE(dofs.size() == 2);
    CHECK(dofs[0].imag() == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(dofs[1].imag() == doctest::Approx(-0.2).epsilon(1e-10));
}

TEST_CASE("classify error paths") {
    Mat neg(2, 2);
    neg << -2.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(classify(md_from(neg)), NumericalError);

    // multiplier within tolerance of +1: unresolvable
    CHECK_THROWS_AS(classify(md_from(rotation2(1e-8))), NumericalError);

    Mat rep = Mat::Zero(4, 4);
    rep(0, 0) = std::exp(1.0);
    rep(1, 1) = std::exp(1.0);
    rep(2, 2) = std::exp(-1.0);
    rep(3, 3) = std::exp(-1.0);
    CHECK_THROWS_AS(classify(md_from(rep)), HypothesisError);
}

TEST_CASE("classify of model monodromy returns per-period exponents 2 pi mu") {
    const std::vector<Complex> mu = {Complex(0.5, 0.2), Complex(0.0, 0.3)};
    const auto orbit = model_orbit(mu, 0.1);
    const auto exps = classify(monodromy(orbit));
    const auto dofs = per_dof_exponents(exps);
    REQUIRE(dofs.size() == 3);
    CHECK(std::abs(dofs[0] - kTwoPi * Complex(0.5, 0.2)) < 1e-8);
    CHECK(std::abs(dofs[1] - kTwoPi * Complex(0.5, -0.2)) < 1e-8);
    CHECK(std::abs(dofs[2] - kTwoPi * Complex(0.0, 0.3)) < 1e-8);
}

TEST_CASE("block normal form: elliptic block") {
    const auto nfs = block_normal_form(md_from(rotation2(0.6)));
    REQUIRE(nfs.size() == 1);
    CHECK(nfs[0].kind == Kind::ee);
    CHECK(nfs[0].coeff_c == doctest::Approx(0.6).epsilon(1e-10));
}

TEST_CASE("block normal form: hyperbolic block from [[2,1],[1,1]]") {
    Mat a(2, 2);
    a << 2.0, 1.0, 1.0, 1.0;  // det 1, eigenvalues (3 +- sqrt 5)/2
    const double lam = 0.5 * (3.0 + std::sqrt(5.0));
    const auto nfs = block_normal_form(md_from(a));
    REQUIRE(nfs.size() == 1);
    CHECK(nfs[0].kind == Kind::hr);
    CHECK(nfs[0].coeff_c == doctest::Approx(std::log(lam)).epsilon(1e-10));
}

TEST_CASE("block normal form: loxodromic coefficients") {
    const Mat a = hc_generator(0.5, 0.2).exp();
    const auto nfs = block_normal_form(md_from(a));
    REQUIRE(nfs.size() == 1);
    CHECK(nfs[0].kind == Kind::hc);
    CHECK(nfs[0].coeff_c == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(nfs[0].coeff_d == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("normal form kinds and coefficients are conjugation invariant") {
    std::mt19937_64 rng(42);
    // mixed hr + ee block in the (x1, x2, xi1, xi2) layout
    Mat base = Mat::Zero(4, 4);
    base(0, 0) = std::exp(0.8);
    base(2, 2) = std::exp(-0.8);
    const Mat rot = rotation2(0.6);
    base(1, 1) = rot(0, 0);
    base(1, 3) = rot(0, 1);
    base(3, 1) = rot(1, 0);
    base(3, 3) = rot(1, 1);

    for (int trial = 0; trial < 100; ++trial) {
        const Mat s = random_symplectic(4, rng);
        const Mat a = s.inverse() * base * s;
        const auto nfs = block_normal_form(md_from(a));
        REQUIRE(nfs.size() == 2);
        // canonical order: hr (Re 0.8) before ee (Re 0)
        CHECK(nfs[0].kind == Kind::hr);
        CHECK(nfs[0].coeff_c == doctest::Approx(0.8).epsilon(1e-6));
        CHECK(nfs[1].kind == Kind::ee);
        CHECK(nfs[1].coeff_c == doctest::Approx(0.6).epsilon(1e-6));

        const auto exps = classify(md_from(a));
        CHECK(exps[0].m.real() == doctest::Approx(0.8).epsilon(1e-6));
        CHECK(exps[1].m.imag() == doctest::Approx(0.6).epsilon(1e-6));
    }
}

TEST_CASE("exp(log A) reproduces A") {
    std::mt19937_64 rng(7);
    const Mat a0 = hc_generator(0.4, 0.15).exp();
    for (int trial = 0; trial < 20; ++trial) {
        const Mat s = random_symplectic(4, rng);
        const Mat a = s.inverse() * a0 * s;
        const Mat b = Mat(a.log());
        CHECK((Mat(b.exp()) - a).cwiseAbs().maxCoeff() <=
              1e-8 * (1.0 + a.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("non-resonance scan cases") {
    // single real hyperbolic exponent never meets the imaginary lattice
    auto r1 = nonresonance_scan({Complex(1.0, 0.0)}, 10);
    CHECK(r1.ok_weak);
    CHECK(r1.ok_strong);

    // constructed resonant elliptic pair: sum at k = (1,1) equals 2 pi i,
    // a genuine nonzero lattice point: the strong condition fails, the weak holds
    auto r2 = nonresonance_scan({Complex(0.0, M_PI), Complex(0.0, M_PI)}, 2);
    CHECK_FALSE(r2.ok_strong);
    CHECK(r2.worst_strong.defect <= 1e-12);

    // rational rotation number: k = 3 gives 2 pi i != 0
    auto r3 = nonresonance_scan({Complex(0.0, kTwoPi / 3.0)}, 3);
    CHECK_FALSE(r3.ok_weak);
    CHECK_FALSE(r3.ok_strong);

    // Diophantine pair passes at K = 10
    auto r4 = nonresonance_scan({Complex(1.0, 0.0), Complex(0.0, kTwoPi / std::sqrt(5.0))}, 10);
    CHECK(r4.ok_weak);
    CHECK(r4.ok_strong);

    CHECK_THROWS_AS(nonresonance_scan({Complex(1.0, 0.0)}, 21), ConfigError);
}

TEST_CASE("check_hypotheses on the hr model orbit") {
    const auto orbit = model_orbit({Complex(1.0, 0.0)}, 0.2);
    const auto rep = check_hypotheses(monodromy(orbit), 10);
    CHECK(rep.nondegenerate);
    CHECK(rep.no_nonpositive_real);
    CHECK(rep.partially_hyperbolic);
    CHECK(rep.distinct_exponents);
    CHECK(rep.nonres_weak);
    CHECK(rep.nonres_strong);
    CHECK(rep.all_required());
    CHECK(rep.margin_unit == doctest::Approx(1.0 - std::exp(-kTwoPi)).epsilon(1e-8));
}

TEST_CASE("conley-zehnder index of model orbits") {
    // pure hyperbolic: no first-kind eigenvalues
    CHECK(conley_zehnder(model_orbit({Complex(1.0, 0.0)}, 0.2)) == 0);

    // elliptic with omega < 1: winding stays below one turn
    const auto o03 = model_orbit({Complex(0.0, 0.3)}, 0.1);
    CHECK(conley_zehnder(o03) == 0);
    CHECK(conley_zehnder(o03, 512) == 0);

    // omega = 1.4: one full turn completed
    const auto o14 = model_orbit({Complex(0.0, 1.4)}, 0.1);
    CHECK(conley_zehnder(o14) == 1);
    CHECK(conley_zehnder(o14, 512) == 1);

    const auto w = elliptic_winding_angles(o14);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == doctest::Approx(kTwoPi * 1.4).epsilon(1e-8));
}

TEST_CASE("revolution surface: exponents and winding match the closed forms") {
    // profile f^2 = 1 + z1^2 - 0.2 z2^2 at kinetic energy E: per-period
    // exponents 2 pi sqrt(a_i) by the geodesic rescaling, independent of E
    const auto sys = make_revolution_surface_4d(1.0, -0.2);
    const auto orbit = find_periodic_orbit(sys, default_orbit_guess(sys, 0.5), 0.5, 1e-11);
    const auto exps = classify(monodromy(orbit));
    REQUIRE(exps.size() == 2);
    CHECK(exps[0].kind == Kind::hr);
    CHECK(exps[0].m.real() == doctest::Approx(kTwoPi).epsilon(1e-8));
    CHECK(exps[1].kind == Kind::ee);
    CHECK(exps[1].theta == doctest::Approx(kTwoPi * std::sqrt(0.2)).epsilon(1e-8));

    CHECK(conley_zehnder(orbit) == 0);
    const auto w = elliptic_winding_angles(orbit);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == doctest::Approx(kTwoPi * std::sqrt(0.2)).epsilon(1e-7));
}

TEST_CASE("stable/unstable splitting") {
    Mat a(2, 2);
    a << std::exp(1.0), 0.0, 0.0, std::exp(-1.0);
    const auto [fp, fm] = stable_unstable_split(md_from(a));
    REQUIRE(fp.cols() == 1);
    REQUIRE(fm.cols() == 1);
    CHECK(std::abs(std::abs(fp(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(fp(1, 0)) < 1e-12);
    CHECK(std::abs(fm(0, 0)) < 1e-12);

    // conjugated case: invariance residual within bound
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat s = random_symplectic(2, rng);
        const Mat ac = s.inverse() * a * s;
        const auto [gp, gm] = stable_unstable_split(md_from(ac));
        const Vec vp = gp.col(0).normalized();
        CHECK((ac * vp - vp.dot(ac * vp) * vp).norm() <= 1e-8 * ac.norm());
    }

    // mixed ee + hr: one expanding, one contracting direction
    const auto orbit = model_orbit({Complex(0.7, 0.0), Complex(0.0, 0.3)}, 0.1);
    const auto md = monodromy(orbit);
    const auto [hp, hm] = stable_unstable_split(md);
    CHECK(hp.cols() == 1);
    CHECK(hm.cols() == 1);

    // pure elliptic: error
    CHECK_THROWS_AS(stable_unstable_split(md_from(rotation2(0.6))), NumericalError);
}
