// dynamics.hpp: Lindblad evolution, qubit post-selection, conditional squeezing runs

#pragma once

#include "magsq/model.hpp"
#include "magsq/qops.hpp"
#include "magsq/states.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace magsq::dynamics {

using qops::Matrix;
using qops::StateDensity;

// Contributes prefactor * (2 o rho o^dag - o^dag o rho - rho o^dag o).
struct Dissipator {
    std::string name;
    Matrix op;
    double prefactor;
};

struct LindbladSpec {
    std::vector<Dissipator> dissipators;
};

enum class QubitDissipatorBasis { dressed, persistent };

// m, m^dag, sigma_-, sigma_+, sigma_z with kappa(n_m+1)/2, kappa n_m/2, gamma(n_q+1)/2, gamma n_q/2, gamma_phi/4.
LindbladSpec build_dissipators_full(const model::DerivedParams& d, int fock_dim,
                                    QubitDissipatorBasis basis = QubitDissipatorBasis::dressed);

// m, m^dag as above plus sigma_x with gamma(2 n_q + 1)/8.
LindbladSpec build_dissipators_effective(const model::DerivedParams& d, int fock_dim);

enum class Method { adaptive_rk, fixed_rk4 };

struct SolverConfig {
    Method method = Method::adaptive_rk;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 1.0;           // ns
    std::vector<double> sample_times;
    long max_steps = 20'000'000;
    bool check_positivity = true;
};

struct SolverStats {
    long steps = 0;
    long rejected = 0;
    long rhs_evals = 0;
    double smallest_step = 0.0;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<StateDensity> states;                   // empty unless requested
    std::map<std::string, std::vector<double>> series;
    qops::Frame frame = qops::Frame::drive_interaction;
    int fock_dim = 0;
    SolverStats stats;
    std::vector<std::string> warnings;
};

// Called at every sample with the sample index and the symmetrized state.
using Observer = std::function<void(std::size_t, const StateDensity&)>;

// Integrates d rho/dt = -i[H(t), rho] + sum_k c_k L[o_k] rho and reports at solver.sample_times.
// The first sample time must equal rho0.time.
TrajectoryResult evolve_master(const model::TimeDependentOperator& H, const LindbladSpec& L,
                               const StateDensity& rho0, const SolverConfig& solver,
                               const Observer& observer = {}, bool keep_states = false);

// d rho/dt for a given state; exposed for trace-preservation checks.
Matrix lindblad_rhs(const model::TimeDependentOperator& H, const LindbladSpec& L, double t, const Matrix& rho);

enum class Outcome { plus_x, minus_x, g, e };

struct PostSelection {
    double probability;
    StateDensity magnon;
};

PostSelection postselect_qubit(const StateDensity& rho_joint, Outcome outcome);

enum class ModelKind { full, effective };

// Frame in which the full model is integrated. All three are aligned to the drive frame
// before post-selection.
enum class FullFrame { lab, rotating_exact, rotating_rwa };

struct RunOptions {
    int fock_dim = 80;
    FullFrame full_frame = FullFrame::lab;
    QubitDissipatorBasis qubit_basis = QubitDissipatorBasis::dressed;
    bool dissipation = true;
    Outcome outcome = Outcome::plus_x;
    bool keep_states = false;   // keeps the post-selected magnon states
    // Effective model with a sigma_x outcome: evolve only the selected sigma_x block
    // (H_cs and all effective dissipators commute with the sigma_x projectors). Exact.
    bool reduce_branch = true;
};

// Vacuum (x) qubit_init, Lindblad evolution, frame alignment, post-selection, and
// series zeta_sq, S_dB (NaN where zeta_sq <= 0), n_mean, p_success, angle.
TrajectoryResult conditional_squeezing_run(const model::DerivedParams& d, states::QubitInit qubit_init,
                                           const SolverConfig& solver, ModelKind model,
                                           const RunOptions& options);

std::vector<double> uniform_times(double t_end, double dt);

} // namespace magsq::dynamics
