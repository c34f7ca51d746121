#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magsq/coupling.hpp"
#include "magsq/errors.hpp"

#include <cmath>
#include <numbers>

using namespace magsq;
using namespace magsq::coupling;

TEST_CASE("long wire approaches mu0 I / (2 pi d)") {
    const Segment s{Vec3(0, 0, -1e6), Vec3(0, 0, 1e6)};
    const double d = 2.0;
    const Vec3 b = segment_field(s, 1.0, Vec3(d, 0, 0));
    const double want = kMu0 * 1e-6 / (2.0 * std::numbers::pi * d * 1e-6);
    CHECK(b.norm() == doctest::Approx(want).epsilon(1e-9));
    // right-hand rule: current along +z, point on +x, field along +y
    CHECK(b.y() > 0.0);
    CHECK(std::abs(b.x()) < 1e-20);
    CHECK(std::abs(b.z()) < 1e-20);
}

TEST_CASE("loop centre field") {
    const Loop loop{10.0};
    const double closed = center_field_closed_form(loop, 0.4);
    CHECK(closed == doctest::Approx(4.53e-8).epsilon(2e-3));
    const Vec3 b = loop_field(loop, 0.4, Vec3::Zero());
    CHECK(b.x() == doctest::Approx(closed).epsilon(1e-12));
    CHECK(std::abs(b.y()) < 1e-20);
    CHECK(std::abs(b.z()) < 1e-20);
    CHECK(loop.segments().size() == 4);
}

TEST_CASE("field symmetries and linearity in the current") {
    const Loop loop{10.0};
    const Vec3 p(1.3, 0.7, -2.1);
    const Vec3 a = loop_field(loop, 0.4, p);
    const Vec3 m = loop_field(loop, 0.4, Vec3(-p.x(), p.y(), p.z()));
    CHECK(m.x() == doctest::Approx(a.x()).epsilon(1e-12));
    const Vec3 s = loop_field(loop, 0.4, Vec3(p.x(), -p.y(), p.z()));
    CHECK(s.x() == doctest::Approx(a.x()).epsilon(1e-12));
    const Vec3 r = loop_field(loop, 0.4, Vec3(p.x(), p.z(), -p.y()));   // quarter turn about x
    CHECK(r.x() == doctest::Approx(a.x()).epsilon(1e-12));
    const Vec3 twice = loop_field(loop, 0.8, p);
    CHECK((twice - 2.0 * a).norm() < 1e-12 * a.norm());
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    CHECK(x.size() == 8);
    for (int k = 0; k <= 15; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
        const double want = k % 2 ? 0.0 : 2.0 / (k + 1);
        CHECK(std::abs(s - want) < 1e-13);
    }
}

TEST_CASE("sphere average") {
    const Loop loop{10.0};
    const double b0 = loop_field(loop, 0.4, Vec3::Zero()).x();
    const auto small = volume_avg_field(loop, 0.4, Vec3::Zero(), 0.1);
    CHECK(std::abs(small.bx - b0) / b0 < 1e-3);
    CHECK(small.rel_error < 1e-10);
    // a harmonic field's sphere average equals the centre value
    const auto big = volume_avg_field(loop, 0.4, Vec3(1.0, 0.5, 0.0), 2.0);
    CHECK(big.bx == doctest::Approx(loop_field(loop, 0.4, Vec3(1.0, 0.5, 0.0)).x()).epsilon(1e-6));
    CHECK_THROWS_AS(volume_avg_field(loop, 0.4, Vec3(0.0, 5.0, 0.0), 0.5), ContractError);
}

TEST_CASE("collective coupling scales as R^{3/2}") {
    Sphere s;
    const double n = number_of_spins(s);
    CHECK(n == doctest::Approx(4.0 / 3.0 * std::numbers::pi * std::pow(0.5e-4, 3) * 2.1e22).epsilon(1e-12));
    const auto c1 = coupling_strength(4.53e-8, s);
    s.radius_um = 1.0;
    const auto c2 = coupling_strength(4.53e-8, s);
    CHECK(c2.g_ghz / c1.g_ghz == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-12));
    CHECK(coupling_strength(2 * 4.53e-8, s).g_ghz == doctest::Approx(2.0 * c2.g_ghz).epsilon(1e-12));
    // g = g_e mu_B B sqrt(N S / 2) / h
    const double want = 2.0 * kBohrMagneton * 4.53e-8 * std::sqrt(c1.n_spins * 2.5 / 2.0) / kPlanck * 1e-9;
    CHECK(c1.g_ghz == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("coupling maps") {
    const Loop loop{10.0};
    const Sphere s;
    const auto a = coupling_map_a(loop, s, {0.2, 0.5}, {0.1, 0.4, 1.0});
    CHECK(a.g_ghz.size() == 6);
    // linear in the current along a row of fixed radius
    CHECK(a.g_ghz[2 * 2 + 1] / a.g_ghz[0 * 2 + 1] == doctest::Approx(10.0).epsilon(1e-12));
    const auto b1 = coupling_map_b(loop, s, 0.4, {0.2, 0.6}, {-2.0, 0.0, 2.0}, {8, 8, 16}, 1);
    const auto b3 = coupling_map_b(loop, s, 0.4, {0.2, 0.6}, {-2.0, 0.0, 2.0}, {8, 8, 16}, 3);
    CHECK(b1.g_ghz == b3.g_ghz);
    CHECK(b1.g_ghz.size() == 6);
}
