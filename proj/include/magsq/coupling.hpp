// coupling.hpp: Biot-Savart field of the square flux-qubit loop and the collective
// qubit-magnon coupling of a YIG sphere
//
// Units: lengths in um, currents in uA, fields in T, couplings as linear frequency in GHz.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace magsq::coupling {

using Vec3 = Eigen::Vector3d;

// CODATA 2018
inline constexpr double kMu0 = 1.25663706212e-6;        // N/A^2
inline constexpr double kBohrMagneton = 9.2740100783e-24; // J/T
inline constexpr double kPlanck = 6.62607015e-34;        // J s

struct Segment {
    Vec3 a, b;   // current flows from a to b
};

// Square loop of side L in the y-z plane, centred at the origin, normal +x.
struct Loop {
    double side_um = 10.0;
    std::vector<Segment> segments() const;
};

// Closed-form field of a finite straight wire.
Vec3 segment_field(const Segment& s, double current_ua, const Vec3& r_um);

Vec3 loop_field(const Loop& loop, double current_ua, const Vec3& r_um);

// 2 sqrt2 mu0 I / (pi L)
double center_field_closed_form(const Loop& loop, double current_ua);

struct VolumeAverage {
    double bx;               // T
    double rel_error;        // |B(orders) - B(2 orders)| / |B(2 orders)|
    std::array<int, 3> orders;
};

// Sphere average of B_x by Gauss-Legendre quadrature in (r, cos theta, phi).
// Throws ContractError when the sphere touches a wire.
VolumeAverage volume_avg_field(const Loop& loop, double current_ua, const Vec3& center_um, double radius_um,
                               std::array<int, 3> orders = {16, 16, 32});

struct Sphere {
    double radius_um = 0.5;
    double spin_density_cm3 = 2.1e22;
    double spin = 2.5;
    double g_factor = 2.0;
};

double number_of_spins(const Sphere& s);

struct Coupling {
    double g_ghz;
    double n_spins;
    double b_tesla;
};

// g = g_e mu_B B sqrt(N S / 2) / h
Coupling coupling_strength(double b_tesla, const Sphere& s);

struct CouplingMap {
    std::string x_name, y_name;   // column names with units
    std::vector<double> x, y;
    std::vector<double> g_ghz;    // row-major: g[i_y * x.size() + i_x]
    std::vector<double> rel_error;
};

// Panel (a): g(R, I_p) with the point-sphere field at the loop centre.
CouplingMap coupling_map_a(const Loop& loop, const Sphere& base, const std::vector<double>& radii_um,
                           const std::vector<double>& currents_ua, int threads = 1);

// Panel (b): g(R, x0) from the sphere-averaged field at fixed current.
CouplingMap coupling_map_b(const Loop& loop, const Sphere& base, double current_ua,
                           const std::vector<double>& radii_um, const std::vector<double>& x0_um,
                           std::array<int, 3> orders = {16, 16, 32}, int threads = 1);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

} // namespace magsq::coupling
