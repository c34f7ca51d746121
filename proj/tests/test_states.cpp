#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magsq/errors.hpp"
#include "magsq/model.hpp"
#include "magsq/states.hpp"

#include <cmath>
#include <sstream>

using namespace magsq;
using namespace magsq::states;
using qops::cplx;

TEST_CASE("Fock recurrence matches the squeeze operator") {
    const int N = 80;
    for (cplx xi : {cplx(0.4, 0.0), cplx(0.3, -0.5), cplx(0.0, 1.0)}) {
        const Vector a = squeezed_vacuum_fock(xi, N);
        // padded operator, since truncating S(xi) itself distorts the top levels
        const Vector b = (model::squeeze_operator(xi, 2 * N) * qops::fock_ket(2 * N, 0)).head(N);
        CHECK((a - b).norm() < 1e-9);
        CHECK(std::abs(a.norm() - 1.0) < 1e-10);
        for (int n = 1; n < N; n += 2) CHECK(std::abs(a(n)) == 0.0);
    }
}

TEST_CASE("mean occupation is sinh^2 r") {
    for (double r : {0.2, 0.9, 1.5}) {
        const int N = 300;
        const Vector v = squeezed_vacuum_fock(cplx(0.0, r), N);
        double n = 0.0;
        for (int k = 0; k < N; ++k) n += k * std::norm(v(k));
        CHECK(n == doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-9));
    }
}

TEST_CASE("truncation that loses mass throws") {
    CHECK_THROWS_AS(squeezed_vacuum_fock(cplx(2.5, 0.0), 20), NumericError);
}

TEST_CASE("overlap and norms of the parity superpositions") {
    const int N = 200;
    for (double r : {0.3, 1.0, 1.3657}) {
        const cplx xi(0.0, -r);
        const double ch = std::cosh(2.0 * r);
        const auto p = superposition_pm(xi, Parity::plus, N);
        const auto m = superposition_pm(xi, Parity::minus, N);
        CHECK(p.overlap_numeric == doctest::Approx(1.0 / std::sqrt(ch)).epsilon(1e-10));
        CHECK(p.norm_sq_numeric == doctest::Approx(2.0 * (1.0 + 1.0 / std::sqrt(ch))).epsilon(1e-10));
        CHECK(m.norm_sq_numeric == doctest::Approx(2.0 * (1.0 - 1.0 / std::sqrt(ch))).epsilon(1e-10));
        CHECK(p.norm_sq_overlap == doctest::Approx(p.norm_sq_numeric).epsilon(1e-10));
        CHECK(m.norm_sq_printed == doctest::Approx(2.0 * (1.0 - std::sqrt(ch))));
        CHECK(std::abs(p.psi.norm() - 1.0) < 1e-12);
        CHECK(std::abs(m.psi.norm() - 1.0) < 1e-12);
        CHECK(std::abs(p.psi.dot(m.psi)) < 1e-12);
        // fourfold rotational structure: psi+ on n = 0 mod 4, psi- on n = 2 mod 4
        double off = 0.0;
        for (int n = 0; n < N; ++n) {
            if (n % 4 != 0) off += std::norm(p.psi(n));
            if (n % 4 != 2) off += std::norm(m.psi(n));
        }
        CHECK(off < 1e-20);
    }
}

TEST_CASE("superpositions are eigenstates of the quarter-turn rotation") {
    const int N = 120;
    Matrix R = Matrix::Zero(N, N);
    for (int n = 0; n < N; ++n) R(n, n) = std::exp(qops::I * (std::numbers::pi / 2.0 * n));
    const auto p = superposition_pm({0.8, 0.1}, Parity::plus, N);
    const auto m = superposition_pm({0.8, 0.1}, Parity::minus, N);
    CHECK((R * p.psi - p.psi).norm() < 1e-12);
    CHECK((R * m.psi + m.psi).norm() < 1e-12);
}

TEST_CASE("logical codewords") {
    const auto c = logical_codewords(1.0, 120);
    CHECK(std::abs(c.zero_l.dot(c.one_l)) < 1e-12);
    CHECK(std::abs(c.zero_l.norm() - 1.0) < 1e-12);
    const auto p = superposition_pm({1.0, 0.0}, Parity::plus, 120);
    CHECK((c.zero_l - p.psi).norm() < 1e-12);
}

TEST_CASE("joint initial states") {
    const int N = 5;
    const auto o = model::joint_ops(N);
    const auto px = joint_initial_state(N, QubitInit::plus_x);
    const auto mx = joint_initial_state(N, QubitInit::minus_x);
    const auto g = joint_initial_state(N, QubitInit::plus_plus_minus);
    CHECK(std::abs(qops::expectation(o.sx, px.rho) - 1.0) < 1e-14);
    CHECK(std::abs(qops::expectation(o.sx, mx.rho) + 1.0) < 1e-14);
    CHECK(std::abs(qops::expectation(o.pg, g.rho) - 1.0) < 1e-14);
    CHECK(std::abs(qops::expectation(o.n, px.rho)) < 1e-14);
    CHECK(px.space.with_qubit);
    CHECK(px.space.fock_dim == N);
    CHECK(px.time == 0.0);
}

TEST_CASE("state CSV") {
    std::ostringstream os;
    write_state_csv(os, qops::fock_ket(3, 1));
    const std::string s = os.str();
    CHECK(s.rfind("index,re,im\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}
