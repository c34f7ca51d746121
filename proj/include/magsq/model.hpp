// model.hpp: physical parameters and the hierarchy of qubit-magnon Hamiltonians
//
// Internal units: angular frequency in rad/ns, time in ns.

#pragma once

#include "magsq/qops.hpp"

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace magsq::model {

using qops::cplx;
using qops::Matrix;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K

// Values as a user enters them: linear frequencies, angles in rad.
struct PhysicalParams {
    double omega_m_ghz = 1.513;
    double nu_ghz = 3.0;
    double omega_p_ghz = 3.002;
    double drive_ghz = 0.5;            // Omega
    double phi_rad = std::numbers::pi;
    double g_ghz = 0.15;
    double theta_rad = std::numbers::pi / 4.0;
    double kappa_mhz = 0.5;
    double gamma_khz = 3.0;
    double gamma_phi_khz = 3.0;
    double temperature_mk = 10.0;
    std::optional<double> delta_eff_mhz;   // unset: analytic default
};

struct DerivedParams {
    double omega_m, nu, omega_p, drive, phi, g, theta;
    double g_x, g_z;
    double delta_m;      // omega_m - omega_p/2
    double delta_nu;     // nu - omega_p
    double g_cs;         // -2 g_x g_z / omega_p
    double delta_eff;
    double kappa, gamma, gamma_phi;
    double nbar_m, nbar_q;
    double temperature_k;
    std::vector<std::string> warnings;
};

// Bose occupation for angular frequency w (rad/ns) at temperature T (K). T <= 0 gives 0.
double bose_occupation(double w, double temperature_k);

// Delta_m - 8 g_x^2 / (3 omega_p)
double analytic_delta_eff(const DerivedParams& d);

DerivedParams derive(const PhysicalParams& p);

// ------------------------------------------------------------ operators

// c(t) * op summed over terms; a null coefficient means 1.
struct OperatorTerm {
    Matrix op;
    std::function<cplx(double)> coeff;
};

// amp * e^{i w t}
std::function<cplx(double)> phasor(cplx amp, double w);

struct TimeDependentOperator {
    int dim = 0;
    std::vector<OperatorTerm> terms;
    Matrix at(double t) const;
};

// Joint magnon (x) qubit operators for a given truncation.
struct JointOps {
    int fock_dim;
    Matrix m, md, n, sz, sx, sy, sp, sm, id;
    Matrix pe, pg;   // |e><e|, |g><g|
};

JointOps joint_ops(int fock_dim);

// 2x2 unitary whose columns are |g>, |e> in the persistent-current basis (index 0: sigma_z = +1).
Matrix qubit_dressed_rotation(double theta);

// W = Pi (x) R with Pi = exp(i pi n); W^dag H_lab W equals the dressed-basis Hamiltonian.
Matrix dressed_basis_unitary(const DerivedParams& d, int fock_dim);

// Persistent-current basis, drive Omega cos(w_p t + phi)(sigma_x - sigma_z)/sqrt2.
TimeDependentOperator hamiltonian_lab(const DerivedParams& d, int fock_dim);
Matrix build_H_lab(const DerivedParams& d, int fock_dim, double t);

// Dressed basis, lab frame; drive Omega cos(w_p t + phi) sigma_x (= -Omega cos(w_p t) at phi = pi).
TimeDependentOperator hamiltonian_tot(const DerivedParams& d, int fock_dim);
Matrix build_H_tot(const DerivedParams& d, int fock_dim, double t);

// Frame rotating at w_p/2 on n and sigma_z. rwa = true drops the drive terms at +-2 w_p.
TimeDependentOperator hamiltonian_rot(const DerivedParams& d, int fock_dim, bool rwa);
Matrix build_H_rot(const DerivedParams& d, int fock_dim, double t);

// Static effective Hamiltonian after second-order elimination of the fast terms.
Matrix build_H_eff(const DerivedParams& d, int fock_dim);

// g_cs (m^2 e^{-2i D t} + m^dag^2 e^{2i D t}) sigma_x, D = delta_eff.
TimeDependentOperator hamiltonian_cs(const DerivedParams& d, int fock_dim);
Matrix build_H_cs(const DerivedParams& d, int fock_dim, double t);

// ------------------------------------------------------ James effective

struct JamesInput {
    Matrix h_dag;   // h_m^dag, multiplying e^{i delta_m t}
    double delta;
};

struct JamesCross {
    Matrix op;        // [h_m^dag, h_n] / mean(delta_m, delta_n)
    double freq;      // delta_m - delta_n; op e^{i freq t} + h.c.
};

struct JamesResult {
    Matrix static_part;               // sum_m [h_m^dag, h_m] / delta_m
    std::vector<JamesCross> cross;    // m < n
    // static part plus the zero-frequency cross terms (with their h.c.)
    Matrix time_averaged(double freq_tol = 1e-12) const;
    Matrix at(double t) const;
};

JamesResult james_effective(const std::vector<JamesInput>& terms);

// The three fast terms of the rotating-frame Hamiltonian.
std::vector<JamesInput> rotating_frame_fast_terms(const DerivedParams& d, int fock_dim);

// ------------------------------------------------------- squeezing

// xi(t) = -g_cs (e^{2i D t} - 1) / (2 D); -i g_cs t when |D| < 1e-9.
cplx squeezing_parameter(const DerivedParams& d, double t);

// S(xi) = exp[(xi^* m^2 - xi m^dag^2)/2] on the truncated magnon space.
Matrix squeeze_operator(cplx xi, int fock_dim);

// |+><+| (x) S(xi) + |-><-| (x) S(-xi) in magnon (x) qubit ordering.
Matrix analytic_propagator(const DerivedParams& d, int fock_dim, double t,
                           std::vector<std::string>* warnings = nullptr);

// Maps a joint state between frames; uses s.time. Supported: lab <-> rotating_half_pump,
// rotating_half_pump <-> drive_interaction, and their composition.
qops::StateDensity frame_transform(const qops::StateDensity& s, qops::Frame to, const DerivedParams& d);

} // namespace magsq::model
