// scenarios.hpp: named experiments, Delta_eff calibration, truncation convergence, run manifests

#pragma once

#include "magsq/config.hpp"
#include "magsq/coupling.hpp"
#include "magsq/dynamics.hpp"
#include "magsq/model.hpp"
#include "magsq/observables.hpp"
#include "magsq/states.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace magsq::scenarios {

enum class Scenario {
    coupling_map_a,
    coupling_map_b,
    squeeze_compare,
    kappa_sweep,
    temperature_sweep,
    max_squeeze_heatmap,
    superposition_wigner,
    superposition_fidelity,
    custom
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

enum class DeltaEffMode { analytic, calibrated, value };

struct CouplingSettings {
    double loop_side_um = 10.0;
    double current_ua = 0.4;
    coupling::Sphere sphere;
    std::vector<double> radii_um;      // both panels
    std::vector<double> currents_ua;   // panel (a)
    std::vector<double> x0_um;         // panel (b)
    std::array<int, 3> orders = {16, 16, 32};
};

struct ScenarioConfig {
    Scenario scenario = Scenario::squeeze_compare;
    model::PhysicalParams params;
    DeltaEffMode delta_eff_mode = DeltaEffMode::calibrated;
    int fock_dim = 80;
    int threads = 1;
    std::string output_dir = "out";

    dynamics::SolverConfig solver;   // sample_times filled per scenario
    double t_end_ns = 150.0;
    double dt_ns = 0.5;

    // full model
    dynamics::FullFrame full_frame = dynamics::FullFrame::lab;
    dynamics::QubitDissipatorBasis full_qubit_basis = dynamics::QubitDissipatorBasis::dressed;
    int full_fock_dim = 50;

    dynamics::ModelKind sweep_model = dynamics::ModelKind::effective;
    std::vector<double> sweep_kappa_mhz;
    std::vector<double> sweep_temperature_mk;
    std::vector<double> heatmap_kappa_mhz;
    std::vector<double> heatmap_gamma_khz;

    double superposition_t_ns = 29.0;
    double superposition_t_end_ns = 40.0;
    observables::WignerAxes wigner_re, wigner_im;

    CouplingSettings coupling;

    double calib_half_width_mhz = 20.0;
    double calib_coarse_mhz = 0.5;
    double calib_fine_mhz = 0.05;

    int convergence_extra = 20;
    bool convergence_full = false;

    // custom scenario
    dynamics::ModelKind custom_model = dynamics::ModelKind::effective;
    states::QubitInit custom_init = states::QubitInit::plus_x;
    dynamics::Outcome custom_outcome = dynamics::Outcome::plus_x;
    bool custom_dissipation = true;

    config::RawConfig raw;   // echo with sources

    std::vector<double> sample_times() const;
};

// All accepted keys with their dimension and default text.
struct KeySpec {
    std::string key;
    config::Dim dim;
    std::string default_value;
    bool list = false;
};
const std::vector<KeySpec>& key_registry();

// Registry defaults, then the file (if any), then MAGSQ_* environment overrides.
// Unknown keys and unit errors throw ConfigError naming the key and its source.
ScenarioConfig load_config(const std::optional<std::string>& path);
ScenarioConfig build_config(config::RawConfig raw);

// --------------------------------------------------------------- calibration

struct CalibrationPoint {
    double delta_mhz;
    double cost;   // integral |S_full - S_eff| dt in dB ns; inf when S_eff is undefined
    double max_dev_db;
};

struct Calibration {
    double delta_eff;          // rad/ns
    double analytic;           // rad/ns
    std::vector<CalibrationPoint> scan;   // coarse then fine
    std::vector<double> times;
    std::vector<double> s_full, s_eff;
    double max_dev_db = 0.0;
    int points_below_002 = 0;
    std::vector<std::string> warnings;
};

// Scans Delta_eff over analytic +- half_width (coarse, then fine around the coarse optimum) and
// returns the value minimizing the trapezoidal integral of |S_full - S_eff|.
// s_full must be sampled at cfg.sample_times().
Calibration calibrate_delta_eff(const ScenarioConfig& cfg, const std::vector<double>& s_full);

// Full-model conditional run with the config's frame, basis and full_fock_dim.
dynamics::TrajectoryResult run_full(const ScenarioConfig& cfg, const model::DerivedParams& d);

// Effective-model conditional run from |0>|+x>, post-selected on +x.
dynamics::TrajectoryResult run_effective(const ScenarioConfig& cfg, const model::DerivedParams& d,
                                         int fock_dim = 0);

// --------------------------------------------------------------- convergence

struct ConvergenceReport {
    int fock_dim = 0;
    int fock_dim_ref = 0;
    double max_dS_db = 0.0;
    double max_wigner_diff = 0.0;
    bool flagged = false;
    std::string point;   // which configuration was checked
    std::string note;
};

// Reruns the most demanding point of cfg.scenario at fock_dim and fock_dim + extra.
ConvergenceReport convergence_check(const ScenarioConfig& cfg, const model::DerivedParams& d);

// ------------------------------------------------------------------- runner

struct OutputFile {
    std::string path;
    std::string sha256;
    std::size_t bytes;
};

struct RunManifest {
    std::string scenario;
    std::vector<OutputFile> outputs;
    std::optional<ConvergenceReport> convergence;
    double wall_clock_s = 0.0;
    std::vector<std::string> warnings;
    nlohmann::json summary;
    nlohmann::json to_json(const ScenarioConfig& cfg) const;
};

using Progress = std::function<void(const std::string&)>;

// Runs cfg.scenario, writes CSVs and <scenario>.manifest.json into cfg.output_dir.
RunManifest run(const ScenarioConfig& cfg, bool with_convergence = true, const Progress& progress = {});

// Resolves Delta_eff per cfg.delta_eff_mode (calibrated runs the full model once).
model::DerivedParams resolve_params(const ScenarioConfig& cfg, std::optional<Calibration>* calib = nullptr,
                                    const Progress& progress = {});

// Analytic psi+- = (|xi> +- |-xi>)/sqrt(N+-) at superposition.t with xi from squeezing_parameter;
// reports the numeric norms next to both closed forms.
RunManifest run_superpose(const ScenarioConfig& cfg, const Progress& progress = {});

// Forces delta_eff = calibrated and writes the scan table.
RunManifest run_calibrate(const ScenarioConfig& cfg, const Progress& progress = {});

// Convergence report only.
RunManifest run_converge(const ScenarioConfig& cfg, const Progress& progress = {});

std::string sha256_file(const std::string& path);

inline constexpr const char* kVersion = "1.0.0";

} // namespace magsq::scenarios
