#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magsq/errors.hpp"
#include "magsq/model.hpp"

#include <cmath>

using namespace magsq;
using namespace magsq::model;
using qops::I;

namespace {

DerivedParams defaults(std::optional<double> delta_mhz = std::nullopt) {
    PhysicalParams p;
    p.delta_eff_mhz = delta_mhz;
    return derive(p);
}

double mhz(double w) { return w / kTwoPi * 1e3; }

double herm_err(const Matrix& H) { return (H - H.adjoint()).cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("derived parameters at the default operating point") {
    const auto d = defaults();
    CHECK(mhz(d.delta_m) == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(mhz(d.delta_nu) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(mhz(d.g_cs) == doctest::Approx(-7.49500333).epsilon(1e-8));
    CHECK(d.g_x == doctest::Approx(d.g_z));
    CHECK(d.nbar_m == doctest::Approx(7.0e-4).epsilon(0.02));
    CHECK(d.nbar_q == doctest::Approx(5.6e-7).epsilon(0.02));
    // analytic default Delta_m - 8 g_x^2 / (3 omega_p)
    const double gx = 0.15 / std::sqrt(2.0);
    CHECK(mhz(d.delta_eff) == doctest::Approx(12.0 - 8.0 * gx * gx / (3.0 * 3.002) * 1e3).epsilon(1e-9));
    CHECK(mhz(defaults(17.3).delta_eff) == doctest::Approx(17.3));
}

TEST_CASE("Bose occupation") {
    CHECK(bose_occupation(1.0, 0.0) == 0.0);
    const double w = kTwoPi * 1.0;   // 1 GHz
    const double x = kPlanck * 1e9 / (kBoltzmann * 0.05);
    CHECK(bose_occupation(w, 0.05) == doctest::Approx(1.0 / std::expm1(x)).epsilon(1e-12));
}

TEST_CASE("dressed-basis unitary maps the lab Hamiltonian onto the dressed one") {
    const auto d = defaults();
    const int N = 8;
    const Matrix W = dressed_basis_unitary(d, N);
    CHECK((W.adjoint() * W - qops::identity(2 * N)).norm() < 1e-13);
    for (double t : {0.0, 0.123, 4.7, 31.0}) {
        const Matrix a = W.adjoint() * build_H_lab(d, N, t) * W;
        CHECK((a - build_H_tot(d, N, t)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("rotating frame equals U^dag H U - K for K = (n + sigma_z) omega_p / 2") {
    const auto d = defaults();
    const int N = 6;
    const auto o = joint_ops(N);
    const Matrix K = 0.5 * d.omega_p * (o.n + o.sz);
    const auto Hrot = hamiltonian_rot(d, N, false);
    for (double t : {0.0, 0.31, 2.9, 17.0}) {
        const Matrix U = qops::expi_hermitian(K, -t);
        const Matrix want = U.adjoint() * build_H_tot(d, N, t) * U - K;
        CHECK((Hrot.at(t) - want).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("all Hamiltonians are Hermitian") {
    const auto d = defaults(17.3);
    const int N = 10;
    for (double t : {0.0, 0.77, 13.1}) {
        CHECK(herm_err(build_H_lab(d, N, t)) < 1e-13);
        CHECK(herm_err(build_H_tot(d, N, t)) < 1e-13);
        CHECK(herm_err(hamiltonian_rot(d, N, false).at(t)) < 1e-13);
        CHECK(herm_err(build_H_rot(d, N, t)) < 1e-13);
        CHECK(herm_err(build_H_cs(d, N, t)) < 1e-13);
    }
    CHECK(herm_err(build_H_eff(d, N)) < 1e-13);
}

TEST_CASE("second-order effective Hamiltonian matches the closed form") {
    const int N = 20;
    const auto d = defaults();
    const auto J = james_effective(rotating_frame_fast_terms(d, N));
    const auto o = joint_ops(N);
    const double gx = d.g_x, gz = d.g_z, wp = d.omega_p;
    // constant energy shift carried by the commutators
    const double shift = -2.0 * gx * gx / (3.0 * wp) - 2.0 * gz * gz / wp;
    const int keep = 2 * (N - 3);
    for (double t : {0.0, 0.37, 1.91, 12.5}) {
        const qops::cplx e = std::exp(I * (wp * t));
        const Matrix eq = 8.0 * gx * gx / (3.0 * wp) * (2.0 * o.n * o.pe + o.pe - o.n)
                        + gx * gx / wp * (o.m * o.m * o.sz * std::conj(e) + o.md * o.md * o.sz * e)
                        - gx * gz / wp * (o.id + 2.0 * o.n) * (o.sp * e + o.sm * std::conj(e))
                        - 4.0 * gx * gz / wp * (o.md * o.md * o.sm + o.m * o.m * o.sp) + shift * o.id;
        CHECK((J.at(t) - eq).topLeftCorner(keep, keep).cwiseAbs().maxCoeff() < 1e-12);
    }
    // time average keeps only the static part
    const Matrix avg = J.time_averaged();
    const Matrix stat = 8.0 * gx * gx / (3.0 * wp) * (2.0 * o.n * o.pe + o.pe - o.n)
                      - 4.0 * gx * gz / wp * (o.md * o.md * o.sm + o.m * o.m * o.sp) + shift * o.id;
    CHECK((avg - stat).topLeftCorner(keep, keep).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(james_effective({}), ContractError);
}

TEST_CASE("conditional squeezing Hamiltonian commutes with sigma_x") {
    const auto d = defaults(17.3);
    const int N = 12;
    const auto o = joint_ops(N);
    for (double t : {0.0, 3.3, 21.0}) {
        const Matrix H = build_H_cs(d, N, t);
        CHECK((H * o.sx - o.sx * H).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("squeezing parameter") {
    const auto d0 = defaults(0.0);
    CHECK(std::abs(squeezing_parameter(d0, 29.0)) == doctest::Approx(1.3657).epsilon(1e-3));
    CHECK(std::abs(squeezing_parameter(d0, 29.0) - (-I * d0.g_cs * 29.0)) < 1e-12);
    for (double delta : {-20.0, 2.0, 5.0, 17.3}) {
        const auto d = defaults(delta);
        for (double t = 0.0; t <= 150.0; t += 1.7)
            CHECK(std::abs(squeezing_parameter(d, t)) <= std::abs(d.g_cs) * t + 1e-12);
        // revival at t = pi / Delta
        CHECK(std::abs(squeezing_parameter(d, std::numbers::pi / d.delta_eff)) < 1e-12);
    }
    CHECK(std::abs(squeezing_parameter(defaults(17.3), 0.0)) == 0.0);
}

TEST_CASE("squeeze operator and analytic propagator are unitary") {
    const int N = 60;
    const Matrix S = squeeze_operator({0.3, 0.2}, N);
    CHECK((S.adjoint() * S - qops::identity(N)).norm() < 1e-10);
    CHECK((squeeze_operator({-0.3, -0.2}, N) * S - qops::identity(N)).norm() < 1e-10);
    const auto d = defaults(17.3);
    const Matrix U = analytic_propagator(d, N, 11.0);
    CHECK((U.adjoint() * U - qops::identity(2 * N)).norm() < 1e-10);
    const auto o = joint_ops(N);
    CHECK((U * o.sx - o.sx * U).norm() < 1e-12);
}

TEST_CASE("frame transformations round-trip") {
    const auto d = defaults();
    const int N = 6;
    Matrix X = Matrix::Random(2 * N, 2 * N);
    qops::StateDensity s;
    s.space = {N, true};
    s.rho = X * X.adjoint();
    s.rho /= s.rho.trace();
    s.frame = qops::Frame::lab;
    s.time = 3.7;
    const auto a = frame_transform(s, qops::Frame::drive_interaction, d);
    CHECK(a.frame == qops::Frame::drive_interaction);
    CHECK(std::abs(a.rho.trace() - 1.0) < 1e-13);
    const auto b = frame_transform(a, qops::Frame::lab, d);
    CHECK((b.rho - s.rho).norm() < 1e-12);
    const auto h = frame_transform(s, qops::Frame::rotating_half_pump, d);
    const auto h2 = frame_transform(h, qops::Frame::drive_interaction, d);
    CHECK((h2.rho - a.rho).norm() < 1e-12);
    // at t = 0 all frames coincide
    s.time = 0.0;
    CHECK((frame_transform(s, qops::Frame::drive_interaction, d).rho - s.rho).norm() < 1e-13);
}
