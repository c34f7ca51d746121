#include "magsq/model.hpp"
#include "magsq/errors.hpp"

#include <cmath>
#include <sstream>

namespace magsq::model {

using qops::I;
using qops::kron;

double bose_occupation(double w, double temperature_k) {
    if (temperature_k <= 0.0) return 0.0;
    const double hbar = kPlanck / kTwoPi;
    const double x = hbar * w * 1e9 / (kBoltzmann * temperature_k);
    return 1.0 / std::expm1(x);
}

double analytic_delta_eff(const DerivedParams& d) {
    return d.delta_m - 8.0 * d.g_x * d.g_x / (3.0 * d.omega_p);
}

DerivedParams derive(const PhysicalParams& p) {
    if (p.omega_p_ghz <= 0.0) throw ContractError("omega_p must be positive");
    if (p.kappa_mhz < 0.0 || p.gamma_khz < 0.0 || p.gamma_phi_khz < 0.0)
        throw ContractError("dissipation rates must be non-negative");
    DerivedParams d{};
    d.omega_m = kTwoPi * p.omega_m_ghz;
    d.nu = kTwoPi * p.nu_ghz;
    d.omega_p = kTwoPi * p.omega_p_ghz;
    d.drive = kTwoPi * p.drive_ghz;
    d.phi = p.phi_rad;
    d.g = kTwoPi * p.g_ghz;
    d.theta = p.theta_rad;
    d.g_x = d.g * std::sin(d.theta);
    d.g_z = d.g * std::cos(d.theta);
    d.delta_m = d.omega_m - d.omega_p / 2.0;
    d.delta_nu = d.nu - d.omega_p;
    d.g_cs = -2.0 * d.g_x * d.g_z / d.omega_p;
    d.delta_eff = p.delta_eff_mhz ? kTwoPi * (*p.delta_eff_mhz) * 1e-3 : analytic_delta_eff(d);
    d.kappa = kTwoPi * p.kappa_mhz * 1e-3;
    d.gamma = kTwoPi * p.gamma_khz * 1e-6;
    d.gamma_phi = kTwoPi * p.gamma_phi_khz * 1e-6;
    d.temperature_k = p.temperature_mk * 1e-3;
    if (d.temperature_k <= 0.0) {
        d.warnings.push_back("temperature <= 0: thermal occupations set to 0");
    }
    d.nbar_m = bose_occupation(d.omega_m, d.temperature_k);
    d.nbar_q = bose_occupation(d.nu, d.temperature_k);
    return d;
}

Matrix TimeDependentOperator::at(double t) const {
    Matrix H = Matrix::Zero(dim, dim);
    for (const auto& term : terms) {
        if (term.coeff) H += term.coeff(t) * term.op;
        else H += term.op;
    }
    return H;
}

JointOps joint_ops(int N) {
    if (N < 2) throw ContractError("fock_dim must be >= 2");
    JointOps o;
    o.fock_dim = N;
    const Matrix a = qops::annihilation(N);
    const Matrix Im = qops::identity(N);
    const Matrix Iq = qops::identity(2);
    o.m = kron(a, Iq);
    o.md = o.m.adjoint();
    o.n = kron(qops::number_op(N), Iq);
    o.sz = kron(Im, qops::sigma_z_bar());
    o.sx = kron(Im, qops::sigma_x_bar());
    o.sy = kron(Im, qops::sigma_y_bar());
    o.sp = kron(Im, qops::sigma_plus_bar());
    o.sm = kron(Im, qops::sigma_minus_bar());
    o.id = qops::identity(2 * N);
    o.pe = kron(Im, qops::projector(qops::ket_e()));
    o.pg = kron(Im, qops::projector(qops::ket_g()));
    return o;
}

Matrix qubit_dressed_rotation(double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    Matrix R(2, 2);
    R << c, -s,
         s,  c;
    return R;
}

Matrix dressed_basis_unitary(const DerivedParams& d, int N) {
    return kron(qops::parity(N), qubit_dressed_rotation(d.theta));
}

namespace {

Matrix persistent_sigma_z() {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 0) = 1.0;
    M(1, 1) = -1.0;
    return M;
}

Matrix persistent_sigma_x() {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 1) = 1.0;
    M(1, 0) = 1.0;
    return M;
}

std::function<cplx(double)> cosine(double amp, double w, double phase) {
    return [=](double t) { return cplx(amp * std::cos(w * t + phase), 0.0); };
}

} // namespace

std::function<cplx(double)> phasor(cplx amp, double w) {
    return [=](double t) { return amp * std::exp(I * (w * t)); };
}

TimeDependentOperator hamiltonian_lab(const DerivedParams& d, int N) {
    const Matrix a = qops::annihilation(N);
    const Matrix Im = qops::identity(N);
    const Matrix sz = persistent_sigma_z(), sx = persistent_sigma_x();
    const double eps_z = d.nu * std::cos(d.theta), eps_x = d.nu * std::sin(d.theta);
    Matrix H0 = d.omega_m * kron(qops::number_op(N), qops::identity(2))
              - (eps_z / 2.0) * kron(Im, sz) - (eps_x / 2.0) * kron(Im, sx)
              + d.g * kron(a + a.adjoint(), sz);
    const Matrix drive_op = kron(Im, (sx - sz) / std::sqrt(2.0));
    TimeDependentOperator H{2 * N, {}};
    H.terms.push_back({H0, nullptr});
    H.terms.push_back({drive_op, cosine(d.drive, d.omega_p, d.phi)});
    return H;
}

Matrix build_H_lab(const DerivedParams& d, int N, double t) { return hamiltonian_lab(d, N).at(t); }

TimeDependentOperator hamiltonian_tot(const DerivedParams& d, int N) {
    const JointOps o = joint_ops(N);
    Matrix H0 = d.omega_m * o.n + (d.nu / 2.0) * o.sz
              + d.g_x * (o.m + o.md) * o.sx + d.g_z * (o.m + o.md) * o.sz;
    TimeDependentOperator H{2 * N, {}};
    H.terms.push_back({H0, nullptr});
    H.terms.push_back({o.sx, cosine(d.drive, d.omega_p, d.phi)});
    return H;
}

Matrix build_H_tot(const DerivedParams& d, int N, double t) { return hamiltonian_tot(d, N).at(t); }

TimeDependentOperator hamiltonian_rot(const DerivedParams& d, int N, bool rwa) {
    const JointOps o = joint_ops(N);
    const double wp = d.omega_p;
    const cplx e_phi = std::exp(I * d.phi);
    Matrix H0 = d.delta_m * o.n + (d.delta_nu / 2.0) * o.sz
              + (d.drive / 2.0) * (std::conj(e_phi) * o.sp + e_phi * o.sm);
    TimeDependentOperator H{2 * N, {}};
    H.terms.push_back({H0, nullptr});
    H.terms.push_back({o.m * o.sp, phasor(d.g_x, 0.5 * wp)});
    H.terms.push_back({o.md * o.sm, phasor(d.g_x, -0.5 * wp)});
    H.terms.push_back({o.m * o.sm, phasor(d.g_x, -1.5 * wp)});
    H.terms.push_back({o.md * o.sp, phasor(d.g_x, 1.5 * wp)});
    H.terms.push_back({o.m * o.sz, phasor(d.g_z, -0.5 * wp)});
    H.terms.push_back({o.md * o.sz, phasor(d.g_z, 0.5 * wp)});
    if (!rwa) {
        H.terms.push_back({o.sp, phasor(0.5 * d.drive * e_phi, 2.0 * wp)});
        H.terms.push_back({o.sm, phasor(0.5 * d.drive * std::conj(e_phi), -2.0 * wp)});
    }
    return H;
}

Matrix build_H_rot(const DerivedParams& d, int N, double t) { return hamiltonian_rot(d, N, true).at(t); }

Matrix build_H_eff(const DerivedParams& d, int N) {
    const JointOps o = joint_ops(N);
    const double c1 = 8.0 * d.g_x * d.g_x / (3.0 * d.omega_p);
    const double c2 = 4.0 * d.g_x * d.g_z / d.omega_p;
    const cplx e_phi = std::exp(I * d.phi);
    return (d.delta_m - c1) * o.n + (d.delta_nu / 2.0) * o.sz
         + c1 * (2.0 * o.n * o.pe + o.pe)
         - c2 * (o.md * o.md * o.sm + o.m * o.m * o.sp)
         + (d.drive / 2.0) * (std::conj(e_phi) * o.sp + e_phi * o.sm);
}

TimeDependentOperator hamiltonian_cs(const DerivedParams& d, int N) {
    const JointOps o = joint_ops(N);
    TimeDependentOperator H{2 * N, {}};
    H.terms.push_back({o.m * o.m * o.sx, phasor(d.g_cs, -2.0 * d.delta_eff)});
    H.terms.push_back({o.md * o.md * o.sx, phasor(d.g_cs, 2.0 * d.delta_eff)});
    return H;
}

Matrix build_H_cs(const DerivedParams& d, int N, double t) { return hamiltonian_cs(d, N).at(t); }

Matrix JamesResult::time_averaged(double freq_tol) const {
    Matrix H = static_part;
    for (const auto& c : cross)
        if (std::abs(c.freq) <= freq_tol) H += c.op + c.op.adjoint();
    return H;
}

Matrix JamesResult::at(double t) const {
    Matrix H = static_part;
    for (const auto& c : cross) {
        const Matrix term = std::exp(I * (c.freq * t)) * c.op;
        H += term + term.adjoint();
    }
    return H;
}

JamesResult james_effective(const std::vector<JamesInput>& terms) {
    if (terms.empty()) throw ContractError("james_effective: no terms");
    const auto dim = terms.front().h_dag.rows();
    for (const auto& t : terms) {
        if (t.h_dag.rows() != dim || t.h_dag.cols() != dim)
            throw ContractError("james_effective: operator dimension mismatch");
        if (t.delta == 0.0) throw ContractError("james_effective: singular (zero) detuning");
    }
    JamesResult r;
    r.static_part = Matrix::Zero(dim, dim);
    for (const auto& t : terms) {
        const Matrix h = t.h_dag.adjoint();
        r.static_part += (t.h_dag * h - h * t.h_dag) / t.delta;
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            const double mean = 0.5 * (terms[i].delta + terms[j].delta);
            if (mean == 0.0) throw ContractError("james_effective: singular mean detuning");
            const Matrix hj = terms[j].h_dag.adjoint();
            const Matrix comm = terms[i].h_dag * hj - hj * terms[i].h_dag;
            r.cross.push_back({comm / mean, terms[i].delta - terms[j].delta});
        }
    }
    return r;
}

std::vector<JamesInput> rotating_frame_fast_terms(const DerivedParams& d, int N) {
    const JointOps o = joint_ops(N);
    return {
        {d.g_x * o.m * o.sp, 0.5 * d.omega_p},
        {d.g_x * o.md * o.sp, 1.5 * d.omega_p},
        {d.g_z * o.md * o.sz, 0.5 * d.omega_p},
    };
}

cplx squeezing_parameter(const DerivedParams& d, double t) {
    const double D = d.delta_eff;
    if (std::abs(D) < 1e-9) return -I * d.g_cs * t;
    return -d.g_cs * (std::exp(I * (2.0 * D * t)) - 1.0) / (2.0 * D);
}

Matrix squeeze_operator(cplx xi, int N) {
    const Matrix a = qops::annihilation(N);
    const Matrix G = 0.5 * (std::conj(xi) * a * a - xi * a.adjoint() * a.adjoint());
    // G is anti-Hermitian: G = i K
    return qops::expi_hermitian(qops::hermitian_part(Matrix(-I * G)));
}

Matrix analytic_propagator(const DerivedParams& d, int N, double t, std::vector<std::string>* warnings) {
    const cplx xi = squeezing_parameter(d, t);
    if (warnings && std::pow(std::sinh(std::abs(xi)), 2) > N / 6.0) {
        std::ostringstream os;
        os << "analytic_propagator: sinh^2|xi| = " << std::pow(std::sinh(std::abs(xi)), 2)
           << " exceeds fock_dim/6; truncation error likely";
        warnings->push_back(os.str());
    }
    return kron(squeeze_operator(xi, N), qops::projector(qops::ket_plus()))
         + kron(squeeze_operator(-xi, N), qops::projector(qops::ket_minus()));
}

namespace {

// rho' = U^dag rho U with U = exp[-i (n + sigma_z) w_p t / 2] (diagonal)
Matrix to_rotating(const Matrix& rho, double wp, double t, double sign) {
    const auto dim = rho.rows();
    qops::Vector ph(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double n = double(k / 2);
        const double s = (k % 2 == 0) ? -1.0 : 1.0;
        ph(k) = std::exp(I * (sign * (n + s) * wp * t / 2.0));
    }
    return ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
}

// rho'' = U^dag rho U with U = exp[i (Omega/2) sigma_x t]
Matrix to_drive(const Matrix& rho, double omega, double t, double sign, int N) {
    const Matrix Ud = kron(qops::identity(N), qops::expi_hermitian(qops::sigma_x_bar(), -sign * omega * t / 2.0));
    return Ud * rho * Ud.adjoint();
}

} // namespace

qops::StateDensity frame_transform(const qops::StateDensity& s, qops::Frame to, const DerivedParams& d) {
    using qops::Frame;
    if (!s.space.with_qubit) throw ContractError("frame_transform: joint state required");
    const int N = s.space.fock_dim;
    auto rank = [](Frame f) { return f == Frame::lab ? 0 : f == Frame::rotating_half_pump ? 1 : 2; };
    qops::StateDensity out = s;
    int cur = rank(s.frame);
    const int target = rank(to);
    while (cur != target) {
        if (cur < target) {
            out.rho = cur == 0 ? to_rotating(out.rho, d.omega_p, s.time, 1.0)
                               : to_drive(out.rho, d.drive, s.time, 1.0, N);
            ++cur;
        } else {
            out.rho = cur == 1 ? to_rotating(out.rho, d.omega_p, s.time, -1.0)
                               : to_drive(out.rho, d.drive, s.time, -1.0, N);
            --cur;
        }
    }
    out.frame = to;
    return out;
}

} // namespace magsq::model
