#include "magsq/dynamics.hpp"
#include "magsq/errors.hpp"
#include "magsq/observables.hpp"
#include "magsq/ode.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace magsq::dynamics {

using qops::cplx;
using qops::I;
using qops::kron;
using qops::SparseMatrix;

LindbladSpec build_dissipators_full(const model::DerivedParams& d, int N, QubitDissipatorBasis basis) {
    const model::JointOps o = model::joint_ops(N);
    Matrix sm = o.sm, sp = o.sp, sz = o.sz;
    if (basis == QubitDissipatorBasis::persistent) {
        // persistent-current operators (index 0: sigma_z = +1) expressed in the dressed basis
        const Matrix R = model::qubit_dressed_rotation(d.theta);
        Matrix pz = Matrix::Zero(2, 2), pm = Matrix::Zero(2, 2);
        pz(0, 0) = 1.0;
        pz(1, 1) = -1.0;
        pm(1, 0) = 1.0;
        const Matrix Im = qops::identity(N);
        sz = kron(Im, R.adjoint() * pz * R);
        sm = kron(Im, R.adjoint() * pm * R);
        sp = sm.adjoint();
    }
    LindbladSpec L;
    L.dissipators.push_back({"m", o.m, d.kappa * (d.nbar_m + 1.0) / 2.0});
    L.dissipators.push_back({"m_dag", o.md, d.kappa * d.nbar_m / 2.0});
    L.dissipators.push_back({"sigma_minus", sm, d.gamma * (d.nbar_q + 1.0) / 2.0});
    L.dissipators.push_back({"sigma_plus", sp, d.gamma * d.nbar_q / 2.0});
    L.dissipators.push_back({"sigma_z", sz, d.gamma_phi / 4.0});
    return L;
}

LindbladSpec build_dissipators_effective(const model::DerivedParams& d, int N) {
    const model::JointOps o = model::joint_ops(N);
    LindbladSpec L;
    L.dissipators.push_back({"m", o.m, d.kappa * (d.nbar_m + 1.0) / 2.0});
    L.dissipators.push_back({"m_dag", o.md, d.kappa * d.nbar_m / 2.0});
    L.dissipators.push_back({"sigma_x", o.sx, d.gamma * (2.0 * d.nbar_q + 1.0) / 8.0});
    return L;
}

namespace {

// Sparse Lindblad generator. With H_nh = H - i sum c_k o_k^dag o_k and X = H_nh rho,
// d rho/dt = -i (X - X^dag) + sum 2 c_k o_k rho o_k^dag for Hermitian rho.
class Generator {
public:
    Generator(const model::TimeDependentOperator& H, const LindbladSpec& L) {
        Matrix stat = Matrix::Zero(H.dim, H.dim);
        for (const auto& term : H.terms) {
            if (term.coeff) {
                ops_.push_back(qops::to_sparse(term.op));
                coeffs_.push_back(term.coeff);
            } else {
                stat += term.op;
            }
        }
        for (const auto& dk : L.dissipators) {
            if (dk.prefactor < 0.0) throw ContractError("dissipator prefactor must be >= 0");
            if (dk.prefactor == 0.0) continue;
            if (dk.op.rows() != H.dim) throw ContractError("dissipator dimension mismatch");
            stat -= I * dk.prefactor * (dk.op.adjoint() * dk.op);
            jumps_.push_back(qops::to_sparse(dk.op));
            jumps_adj_.push_back(qops::to_sparse(dk.op.adjoint()));
            weights_.push_back(2.0 * dk.prefactor);
        }
        static_ = qops::to_sparse(stat);
    }

    void operator()(double t, const Matrix& rho, Matrix& out) {
        x_.noalias() = static_ * rho;
        for (std::size_t k = 0; k < ops_.size(); ++k) {
            tmp_.noalias() = ops_[k] * rho;
            x_ += coeffs_[k](t) * tmp_;
        }
        out = -I * x_;
        out += I * x_.adjoint();
        for (std::size_t k = 0; k < jumps_.size(); ++k) {
            tmp_.noalias() = jumps_[k] * rho;
            tmp2_.noalias() = tmp_ * jumps_adj_[k];
            out += weights_[k] * tmp2_;
        }
    }

private:
    SparseMatrix static_;
    std::vector<SparseMatrix> ops_;
    std::vector<std::function<cplx(double)>> coeffs_;
    std::vector<SparseMatrix> jumps_, jumps_adj_;
    std::vector<double> weights_;
    Matrix x_, tmp_, tmp2_;
};

} // namespace

Matrix lindblad_rhs(const model::TimeDependentOperator& H, const LindbladSpec& L, double t, const Matrix& rho) {
    Generator g(H, L);
    Matrix out;
    g(t, rho, out);
    return out;
}

TrajectoryResult evolve_master(const model::TimeDependentOperator& H, const LindbladSpec& L,
                               const StateDensity& rho0, const SolverConfig& solver,
                               const Observer& observer, bool keep_states) {
    const auto& ts = solver.sample_times;
    if (ts.empty()) throw ContractError("evolve_master: no sample times");
    for (std::size_t k = 1; k < ts.size(); ++k)
        if (!(ts[k] > ts[k - 1])) throw ContractError("evolve_master: sample_times must be strictly increasing");
    if (std::abs(ts.front() - rho0.time) > 1e-12)
        throw ContractError("evolve_master: first sample time must equal the initial state time");
    if (rho0.rho.rows() != H.dim) throw ContractError("evolve_master: state and Hamiltonian dimensions differ");

    auto gen = std::make_shared<Generator>(H, L);
    ode::Options opt;
    opt.adaptive = solver.method == Method::adaptive_rk;
    opt.rel_tol = solver.rel_tol;
    opt.abs_tol = solver.abs_tol;
    opt.max_step = solver.max_step;
    opt.max_steps = solver.max_steps;
    ode::Integrator integ([gen](double t, const ode::State& y, ode::State& dy) { (*gen)(t, y, dy); }, opt);

    TrajectoryResult res;
    res.frame = rho0.frame;
    res.fock_dim = rho0.space.fock_dim;
    res.times = ts;
    res.stats.min_eigenvalue = std::numeric_limits<double>::infinity();

    StateDensity cur = rho0;
    double t = rho0.time;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        integ.advance(t, cur.rho, ts[k]);
        cur.time = ts[k];
        const double herm = (cur.rho - cur.rho.adjoint()).cwiseAbs().maxCoeff();
        res.stats.max_hermiticity_error = std::max(res.stats.max_hermiticity_error, herm);
        cur.rho = qops::hermitian_part(cur.rho);
        const double terr = std::abs(cur.rho.trace() - 1.0);
        res.stats.max_trace_error = std::max(res.stats.max_trace_error, terr);
        if (!std::isfinite(terr)) {
            std::ostringstream os;
            os << "evolve_master: non-finite state at t=" << ts[k] << " ns";
            throw NumericError(os.str());
        }
        if (solver.check_positivity) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(cur.rho, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            res.stats.min_eigenvalue = std::min(res.stats.min_eigenvalue, lo);
            if (lo < -1e-6) {
                std::ostringstream os;
                os << "positivity violated: min eigenvalue " << lo << " at t=" << ts[k] << " ns";
                throw NumericError(os.str());
            }
        }
        if (observer) observer(k, cur);
        if (keep_states) res.states.push_back(cur);
    }
    const auto& st = integ.stats();
    res.stats.steps = st.steps;
    res.stats.rejected = st.rejected;
    res.stats.rhs_evals = st.rhs_evals;
    res.stats.smallest_step = st.smallest_step;
    if (res.stats.max_trace_error > 1e-8) {
        std::ostringstream os;
        os << "trace drift " << res.stats.max_trace_error << " exceeds 1e-8";
        res.warnings.push_back(os.str());
    }
    return res;
}

namespace {

// <v|rho|v> on the qubit factor, unnormalized
Matrix qubit_block(const StateDensity& s, Outcome outcome) {
    if (!s.space.with_qubit) throw ContractError("postselect_qubit: joint state required");
    qops::Vector v;
    switch (outcome) {
    case Outcome::plus_x: v = qops::ket_plus(); break;
    case Outcome::minus_x: v = qops::ket_minus(); break;
    case Outcome::g: v = qops::ket_g(); break;
    case Outcome::e: v = qops::ket_e(); break;
    }
    const int N = s.space.fock_dim;
    Matrix M(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            cplx acc = 0.0;
            for (int q = 0; q < 2; ++q)
                for (int qq = 0; qq < 2; ++qq)
                    acc += std::conj(v(q)) * s.rho(2 * i + q, 2 * j + qq) * v(qq);
            M(i, j) = acc;
        }
    return M;
}

} // namespace

PostSelection postselect_qubit(const StateDensity& s, Outcome outcome) {
    const Matrix M = qubit_block(s, outcome);
    const int N = s.space.fock_dim;
    const double p = M.trace().real();
    if (p <= 1e-12) throw NumericError("postselect_qubit: outcome has zero probability");
    PostSelection out;
    out.probability = p;
    out.magnon.rho = qops::hermitian_part(M / p);
    out.magnon.space = {N, false};
    out.magnon.frame = s.frame;
    out.magnon.time = s.time;
    return out;
}

std::vector<double> uniform_times(double t_end, double dt) {
    if (!(dt > 0.0) || t_end < 0.0) throw ContractError("uniform_times: invalid grid");
    const long n = long(std::floor(t_end / dt + 1e-9));
    std::vector<double> ts(std::size_t(n + 1));
    for (long k = 0; k <= n; ++k) ts[std::size_t(k)] = dt * double(k);
    return ts;
}

TrajectoryResult conditional_squeezing_run(const model::DerivedParams& d, states::QubitInit qubit_init,
                                           const SolverConfig& solver, ModelKind kind,
                                           const RunOptions& opt) {
    const int N = opt.fock_dim;
    model::DerivedParams dp = d;
    if (!opt.dissipation) {
        dp.kappa = dp.gamma = dp.gamma_phi = 0.0;
    }
    StateDensity rho0 = states::joint_initial_state(N, qubit_init);
    model::TimeDependentOperator H;
    LindbladSpec L;
    const bool sigma_x_outcome = opt.outcome == Outcome::plus_x || opt.outcome == Outcome::minus_x;
    const bool reduced = kind == ModelKind::effective && opt.reduce_branch && sigma_x_outcome;
    double branch_probability = 1.0;
    if (reduced) {
        const double s = opt.outcome == Outcome::plus_x ? 1.0 : -1.0;
        const qops::Vector v = s > 0 ? qops::ket_plus() : qops::ket_minus();
        branch_probability = 0.0;
        for (int q = 0; q < 2; ++q)
            for (int qq = 0; qq < 2; ++qq)
                branch_probability += (std::conj(v(q)) * rho0.rho(q, qq) * v(qq)).real();
        if (branch_probability <= 1e-12) throw NumericError("postselect_qubit: outcome has zero probability");
        const Matrix m = qops::annihilation(N);
        const Matrix m2 = m * m;
        H.dim = N;
        H.terms.push_back({s * m2, model::phasor(dp.g_cs, -2.0 * dp.delta_eff)});
        H.terms.push_back({s * m2.adjoint(), model::phasor(dp.g_cs, 2.0 * dp.delta_eff)});
        L.dissipators.push_back({"m", m, dp.kappa * (dp.nbar_m + 1.0) / 2.0});
        L.dissipators.push_back({"m_dag", m.adjoint(), dp.kappa * dp.nbar_m / 2.0});
        rho0.rho = Matrix::Zero(N, N);
        rho0.rho(0, 0) = 1.0;
        rho0.space = {N, false};
        rho0.frame = qops::Frame::drive_interaction;
    } else if (kind == ModelKind::effective) {
        H = model::hamiltonian_cs(dp, N);
        L = build_dissipators_effective(dp, N);
        rho0.frame = qops::Frame::drive_interaction;
    } else {
        if (opt.qubit_basis == QubitDissipatorBasis::persistent && opt.full_frame != FullFrame::lab)
            throw ContractError("persistent-basis qubit dissipators require the lab frame");
        L = build_dissipators_full(dp, N, opt.qubit_basis);
        switch (opt.full_frame) {
        case FullFrame::lab:
            H = model::hamiltonian_tot(dp, N);
            rho0.frame = qops::Frame::lab;
            break;
        case FullFrame::rotating_exact:
            H = model::hamiltonian_rot(dp, N, false);
            rho0.frame = qops::Frame::rotating_half_pump;
            break;
        case FullFrame::rotating_rwa:
            H = model::hamiltonian_rot(dp, N, true);
            rho0.frame = qops::Frame::rotating_half_pump;
            break;
        }
    }
    const std::size_t ns = solver.sample_times.size();
    std::vector<double> zeta(ns), sdb(ns), nmean(ns), prob(ns), angle(ns);
    std::vector<StateDensity> kept;
    long nonpositive = 0, empty = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto observe = [&](std::size_t k, const StateDensity& s) {
        PostSelection ps;
        if (reduced) {
            ps.probability = branch_probability;
            ps.magnon = s;
        } else {
            const StateDensity aligned = s.frame == qops::Frame::drive_interaction
                                             ? s
                                             : model::frame_transform(s, qops::Frame::drive_interaction, dp);
            const Matrix M = qubit_block(aligned, opt.outcome);
            const double p = M.trace().real();
            if (p <= 1e-12) {
                // outcome impossible at this sample (e.g. |e> at t = 0 from |g>)
                zeta[k] = sdb[k] = nmean[k] = angle[k] = nan;
                prob[k] = 0.0;
                ++empty;
                if (opt.keep_states) {
                    StateDensity blank{Matrix::Constant(N, N, nan), {N, false}, aligned.frame, aligned.time};
                    kept.push_back(blank);
                }
                return;
            }
            ps.probability = p;
            ps.magnon = {qops::hermitian_part(M / p), {N, false}, aligned.frame, aligned.time};
        }
        const auto q = observables::min_quadrature_variance(ps.magnon.rho);
        zeta[k] = q.zeta_sq;
        angle[k] = q.angle;
        prob[k] = ps.probability;
        double n = 0.0;
        for (int j = 0; j < N; ++j) n += j * ps.magnon.rho(j, j).real();
        nmean[k] = n;
        if (q.zeta_sq > 0.0) {
            sdb[k] = observables::squeezing_db(q.zeta_sq);
        } else {
            sdb[k] = std::numeric_limits<double>::quiet_NaN();
            ++nonpositive;
        }
        if (opt.keep_states) kept.push_back(ps.magnon);
    };
    TrajectoryResult res = evolve_master(H, L, rho0, solver, observe, false);
    res.series["zeta_sq"] = zeta;
    res.series["S_dB"] = sdb;
    res.series["n_mean"] = nmean;
    res.series["p_success"] = prob;
    res.series["angle"] = angle;
    res.states = std::move(kept);
    res.frame = qops::Frame::drive_interaction;
    if (nonpositive > 0) {
        std::ostringstream os;
        os << nonpositive << " samples with zeta^2 <= 0 (truncation artefact); S recorded as NaN";
        res.warnings.push_back(os.str());
    }
    if (empty > 0) {
        std::ostringstream os;
        os << empty << " samples where the outcome has zero probability; series recorded as NaN";
        res.warnings.push_back(os.str());
    }
    return res;
}

} // namespace magsq::dynamics
