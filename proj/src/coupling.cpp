#include "magsq/coupling.hpp"
#include "magsq/errors.hpp"
#include "magsq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace magsq::coupling {

namespace {

constexpr double kPi = std::numbers::pi;

double distance_to_segment(const Segment& s, const Vec3& p) {
    const Vec3 ab = s.b - s.a;
    const double t = std::clamp((p - s.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (s.a + t * ab - p).norm();
}

} // namespace

std::vector<Segment> Loop::segments() const {
    const double h = side_um / 2.0;
    const Vec3 c1(0, -h, -h), c2(0, h, -h), c3(0, h, h), c4(0, -h, h);
    return {{c1, c2}, {c2, c3}, {c3, c4}, {c4, c1}};
}

Vec3 segment_field(const Segment& s, double current_ua, const Vec3& r) {
    const Vec3 r1 = r - s.a, r2 = r - s.b;
    const double n1 = r1.norm(), n2 = r2.norm();
    const double denom = n1 * n2 * (n1 * n2 + r1.dot(r2));
    if (denom <= 1e-300) throw ContractError("segment_field: field point lies on the wire");
    // mu0 I/(4 pi) with I in uA and lengths in um gives tesla directly after the 1e-6 * 1e6 cancel
    const double pref = kMu0 / (4.0 * kPi) * current_ua;
    return pref * (n1 + n2) / denom * r1.cross(r2);
}

Vec3 loop_field(const Loop& loop, double current_ua, const Vec3& r) {
    Vec3 b = Vec3::Zero();
    for (const auto& s : loop.segments()) b += segment_field(s, current_ua, r);
    return b;
}

double center_field_closed_form(const Loop& loop, double current_ua) {
    return 2.0 * std::sqrt(2.0) * kMu0 * current_ua / (kPi * loop.side_um);
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw ContractError("gauss_legendre: order must be >= 1");
    x.assign(std::size_t(n), 0.0);
    w.assign(std::size_t(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[std::size_t(i)] = -z;
        x[std::size_t(n - 1 - i)] = z;
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[std::size_t(i)] = wi;
        w[std::size_t(n - 1 - i)] = wi;
    }
}

namespace {

double sphere_average_bx(const Loop& loop, double current_ua, const Vec3& c, double R, std::array<int, 3> o) {
    std::vector<double> xr, wr, xu, wu, xp, wp;
    gauss_legendre(o[0], xr, wr);
    gauss_legendre(o[1], xu, wu);
    gauss_legendre(o[2], xp, wp);
    const auto segs = loop.segments();
    double acc = 0.0;
    for (std::size_t i = 0; i < xr.size(); ++i) {
        const double r = 0.5 * R * (xr[i] + 1.0);
        const double jr = 0.5 * R * wr[i] * r * r;
        for (std::size_t j = 0; j < xu.size(); ++j) {
            const double u = xu[j];
            const double st = std::sqrt(1.0 - u * u);
            for (std::size_t k = 0; k < xp.size(); ++k) {
                const double ph = kPi * (xp[k] + 1.0);
                const double wk = kPi * wp[k];
                const Vec3 p = c + r * Vec3(st * std::cos(ph), st * std::sin(ph), u);
                Vec3 b = Vec3::Zero();
                for (const auto& s : segs) b += segment_field(s, current_ua, p);
                acc += jr * wu[j] * wk * b.x();
            }
        }
    }
    const double volume = 4.0 * kPi * R * R * R / 3.0;
    return acc / volume;
}

} // namespace

VolumeAverage volume_avg_field(const Loop& loop, double current_ua, const Vec3& c, double R,
                               std::array<int, 3> orders) {
    if (!(R > 0.0)) throw ContractError("volume_avg_field: radius must be > 0");
    for (int o : orders)
        if (o < 1) throw ContractError("volume_avg_field: quadrature orders must be >= 1");
    for (const auto& s : loop.segments()) {
        if (distance_to_segment(s, c) <= R) {
            std::ostringstream os;
            os << "volume_avg_field: sphere of radius " << R << " um at (" << c.x() << ", " << c.y() << ", "
               << c.z() << ") intersects the loop wire";
            throw ContractError(os.str());
        }
    }
    const double lo = sphere_average_bx(loop, current_ua, c, R, orders);
    const double hi = sphere_average_bx(loop, current_ua, c, R, {2 * orders[0], 2 * orders[1], 2 * orders[2]});
    VolumeAverage v;
    v.bx = lo;
    v.rel_error = std::abs(lo - hi) / std::max(std::abs(hi), 1e-300);
    v.orders = orders;
    return v;
}

double number_of_spins(const Sphere& s) {
    if (!(s.radius_um > 0.0)) throw ContractError("sphere radius must be > 0");
    const double r_m = s.radius_um * 1e-6;
    return s.spin_density_cm3 * 1e6 * 4.0 * kPi * r_m * r_m * r_m / 3.0;
}

Coupling coupling_strength(double b_tesla, const Sphere& s) {
    const double n = number_of_spins(s);
    const double g_hz = s.g_factor * kBohrMagneton * b_tesla * std::sqrt(n * s.spin / 2.0) / kPlanck;
    return {g_hz * 1e-9, n, b_tesla};
}

CouplingMap coupling_map_a(const Loop& loop, const Sphere& base, const std::vector<double>& radii,
                           const std::vector<double>& currents, int threads) {
    CouplingMap m;
    m.x_name = "R_um";
    m.y_name = "I_p_uA";
    m.x = radii;
    m.y = currents;
    m.g_ghz.assign(radii.size() * currents.size(), 0.0);
    m.rel_error.assign(m.g_ghz.size(), 0.0);
    parallel_for(currents.size(), threads, [&](std::size_t j) {
        const double b = loop_field(loop, currents[j], Vec3::Zero()).x();
        for (std::size_t i = 0; i < radii.size(); ++i) {
            Sphere s = base;
            s.radius_um = radii[i];
            m.g_ghz[j * radii.size() + i] = coupling_strength(b, s).g_ghz;
        }
    });
    return m;
}

CouplingMap coupling_map_b(const Loop& loop, const Sphere& base, double current_ua, const std::vector<double>& radii,
                           const std::vector<double>& x0, std::array<int, 3> orders, int threads) {
    CouplingMap m;
    m.x_name = "R_um";
    m.y_name = "x0_um";
    m.x = radii;
    m.y = x0;
    m.g_ghz.assign(radii.size() * x0.size(), 0.0);
    m.rel_error.assign(m.g_ghz.size(), 0.0);
    parallel_for(x0.size(), threads, [&](std::size_t j) {
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const VolumeAverage v = volume_avg_field(loop, current_ua, Vec3(x0[j], 0, 0), radii[i], orders);
            Sphere s = base;
            s.radius_um = radii[i];
            m.g_ghz[j * radii.size() + i] = coupling_strength(v.bx, s).g_ghz;
            m.rel_error[j * radii.size() + i] = v.rel_error;
        }
    });
    return m;
}

} // namespace magsq::coupling
