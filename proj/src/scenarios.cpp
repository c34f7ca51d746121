#include "magsq/scenarios.hpp"
#include "magsq/errors.hpp"
#include "magsq/format.hpp"
#include "magsq/parallel.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace magsq::scenarios {

namespace fs = std::filesystem;
using config::Dim;
using dynamics::ModelKind;
using dynamics::Outcome;
using json = nlohmann::json;
using qops::cplx;
using qops::Matrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
    static const std::vector<std::pair<Scenario, std::string>> v = {
        {Scenario::coupling_map_a, "coupling_map_a"},
        {Scenario::coupling_map_b, "coupling_map_b"},
        {Scenario::squeeze_compare, "squeeze_compare"},
        {Scenario::kappa_sweep, "kappa_sweep"},
        {Scenario::temperature_sweep, "temperature_sweep"},
        {Scenario::max_squeeze_heatmap, "max_squeeze_heatmap"},
        {Scenario::superposition_wigner, "superposition_wigner"},
        {Scenario::superposition_fidelity, "superposition_fidelity"},
        {Scenario::custom, "custom"}};
    return v;
}

template <class E>
E pick(const std::string& key, const config::Entry& e, const std::vector<std::pair<std::string, E>>& options) {
    for (const auto& [name, v] : options)
        if (e.value == name) return v;
    std::string allowed;
    for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
    throw ConfigError(e.source + ": " + key + ": unknown value \"" + e.value + "\"; allowed: " + allowed);
}

std::string model_name(ModelKind k) { return k == ModelKind::full ? "full" : "effective"; }

const std::vector<std::pair<std::string, ModelKind>> kModels = {{"effective", ModelKind::effective},
                                                                {"full", ModelKind::full}};

double mhz_to_rad(double mhz) { return model::kTwoPi * mhz * 1e-3; }
double rad_to_mhz(double w) { return w / model::kTwoPi * 1e3; }

double peak(const std::vector<double>& s, std::size_t* at = nullptr) {
    double best = -kInf;
    std::size_t k = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (std::isfinite(s[i]) && s[i] > best) {
            best = s[i];
            k = i;
        }
    if (at) *at = k;
    return best;
}

// Output file that registers itself in the manifest when closed.
class CsvFile {
public:
    CsvFile(const ScenarioConfig& cfg, RunManifest& m, const std::string& name, const std::string& header)
        : manifest_(m), name_(name), path_((fs::path(cfg.output_dir) / name).string()),
          os_(path_, std::ios::binary) {
        if (!os_) throw ConfigError("cannot write " + path_);
        os_ << header << '\n';
    }
    template <class... T>
    void row(const T&... cols) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(cols), first = false), ...);
        os_ << '\n';
    }
    std::ostream& stream() { return os_; }
    ~CsvFile() { close(); }
    void close() {
        if (!os_.is_open()) return;
        os_.close();
        manifest_.outputs.push_back({name_, sha256_file(path_), std::size_t(fs::file_size(path_))});
    }

private:
    static std::string cell(double x) { return fmt_num(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    RunManifest& manifest_;
    std::string name_, path_;
    std::ofstream os_;
};

void write_series(CsvFile& f, const std::string& label, const dynamics::TrajectoryResult& r) {
    const auto& S = r.series.at("S_dB");
    const auto& z = r.series.at("zeta_sq");
    const auto& n = r.series.at("n_mean");
    const auto& p = r.series.at("p_success");
    const auto& a = r.series.at("angle");
    for (std::size_t k = 0; k < r.times.size(); ++k) f.row(label, r.times[k], S[k], z[k], n[k], p[k], a[k]);
}

const char* kSeriesHeader = "t_ns,S_dB,zeta_sq,n_mean,p_success,angle_rad";

void add_warnings(RunManifest& m, const std::string& where, const std::vector<std::string>& w) {
    for (const auto& s : w) m.warnings.push_back(where + ": " + s);
}

json convergence_json(const ConvergenceReport& c) {
    return {{"fock_dim", c.fock_dim},
            {"fock_dim_ref", c.fock_dim_ref},
            {"max_dS_dB", std::isfinite(c.max_dS_db) ? json(c.max_dS_db) : json("nan")},
            {"max_wigner_diff", c.max_wigner_diff},
            {"flagged", c.flagged},
            {"point", c.point},
            {"note", c.note}};
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (std::isnan(a[i]) && std::isnan(b[i])) continue;   // same undefined sample in both
        const double d = std::abs(a[i] - b[i]);
        if (!std::isfinite(d)) return std::numeric_limits<double>::quiet_NaN();
        m = std::max(m, d);
    }
    return m;
}

std::vector<double> times_to(double t_end, double dt) { return dynamics::uniform_times(t_end, dt); }

} // namespace

std::string scenario_name(Scenario s) {
    for (const auto& [k, n] : scenario_names())
        if (k == s) return n;
    return "unknown";
}

Scenario parse_scenario(const std::string& name) {
    for (const auto& [k, n] : scenario_names())
        if (n == name) return k;
    throw ConfigError("unknown scenario \"" + name + "\"");
}

std::vector<double> ScenarioConfig::sample_times() const { return times_to(t_end_ns, dt_ns); }

// ------------------------------------------------------------------ config

const std::vector<KeySpec>& key_registry() {
    static const std::vector<KeySpec> keys = {
        {"scenario", Dim::text, "squeeze_compare"},
        {"fock_dim", Dim::integer, "80"},
        {"threads", Dim::integer, "1"},
        {"output_dir", Dim::text, "out"},
        {"params.omega_m", Dim::frequency, "1.513 GHz"},
        {"params.nu", Dim::frequency, "3 GHz"},
        {"params.omega_p", Dim::frequency, "3.002 GHz"},
        {"params.drive", Dim::frequency, "0.5 GHz"},
        {"params.phi", Dim::angle, "1 pi"},
        {"params.g", Dim::frequency, "0.15 GHz"},
        {"params.theta", Dim::angle, "0.25 pi"},
        {"params.kappa", Dim::frequency, "0.5 MHz"},
        {"params.gamma", Dim::frequency, "3 kHz"},
        {"params.gamma_phi", Dim::frequency, "3 kHz"},
        {"params.temperature", Dim::temperature, "10 mK"},
        {"params.delta_eff", Dim::text, "calibrated"},
        {"solver.method", Dim::text, "adaptive"},
        {"solver.rel_tol", Dim::number, "1e-8"},
        {"solver.abs_tol", Dim::number, "1e-10"},
        {"solver.max_step", Dim::time, "1 ns"},
        {"solver.check_positivity", Dim::boolean, "true"},
        {"time.t_end", Dim::time, "150 ns"},
        {"time.dt", Dim::time, "0.5 ns"},
        {"full.frame", Dim::text, "lab"},
        {"full.qubit_dissipators", Dim::text, "dressed"},
        {"full.fock_dim", Dim::integer, "50"},
        {"model", Dim::text, "effective"},
        {"sweep.kappa", Dim::frequency, "0.5 MHz, 1 MHz, 2 MHz, 4 MHz", true},
        {"sweep.temperature", Dim::temperature, "10 mK, 100 mK, 200 mK, 300 mK", true},
        {"heatmap.kappa", Dim::frequency, "0 MHz .. 4 MHz : 21", true},
        {"heatmap.gamma", Dim::frequency, "0 MHz .. 1 MHz : 21", true},
        {"superposition.t", Dim::time, "29 ns"},
        {"superposition.t_end", Dim::time, "40 ns"},
        {"wigner.re_min", Dim::number, "-5"},
        {"wigner.re_max", Dim::number, "5"},
        {"wigner.re_points", Dim::integer, "201"},
        {"wigner.im_min", Dim::number, "-5"},
        {"wigner.im_max", Dim::number, "5"},
        {"wigner.im_points", Dim::integer, "201"},
        {"coupling.loop_side", Dim::length, "10 um"},
        {"coupling.current", Dim::current, "0.4 uA"},
        {"coupling.spin_density", Dim::density, "2.1e22 cm^-3"},
        {"coupling.spin", Dim::number, "2.5"},
        {"coupling.g_factor", Dim::number, "2"},
        {"coupling.radii", Dim::length, "0.1 um .. 1 um : 19", true},
        {"coupling.currents", Dim::current, "0.1 uA .. 1 uA : 19", true},
        {"coupling.x0", Dim::length, "-3 um .. 3 um : 13", true},
        {"coupling.orders", Dim::text, "16, 16, 32"},
        {"calibration.half_width", Dim::frequency, "20 MHz"},
        {"calibration.coarse_step", Dim::frequency, "0.5 MHz"},
        {"calibration.fine_step", Dim::frequency, "0.05 MHz"},
        {"convergence.extra", Dim::integer, "20"},
        {"convergence.full", Dim::boolean, "false"},
        {"custom.model", Dim::text, "effective"},
        {"custom.qubit_init", Dim::text, "plus_x"},
        {"custom.outcome", Dim::text, "plus_x"},
        {"custom.dissipation", Dim::boolean, "true"},
    };
    return keys;
}

namespace {

struct Reader {
    const config::RawConfig& raw;
    const config::Entry& entry(const std::string& key) const { return raw.get(key); }
    std::string where(const std::string& key) const { return entry(key).source + ": " + key; }
    double q(const std::string& key, Dim d) const {
        try {
            return config::parse_quantity(entry(key).value, d, key);
        } catch (const ConfigError& e) {
            throw ConfigError(entry(key).source + ": " + e.what());
        }
    }
    std::vector<double> list(const std::string& key, Dim d) const {
        try {
            return config::parse_list(entry(key).value, d, key);
        } catch (const ConfigError& e) {
            throw ConfigError(entry(key).source + ": " + e.what());
        }
    }
    int integer(const std::string& key) const { return int(q(key, Dim::integer)); }
    const std::string& text(const std::string& key) const { return entry(key).value; }
    bool boolean(const std::string& key) const {
        const std::string& v = text(key);
        if (v == "true" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "no" || v == "off") return false;
        throw ConfigError(where(key) + ": expected true or false (got \"" + v + "\")");
    }
};

} // namespace

ScenarioConfig build_config(config::RawConfig raw) {
    for (const auto& [k, e] : raw.entries()) {
        const bool known = std::any_of(key_registry().begin(), key_registry().end(),
                                       [&](const KeySpec& s) { return s.key == k; });
        if (!known) throw ConfigError(e.source + ": unknown config key \"" + k + "\"");
    }
    for (const auto& s : key_registry())
        if (!raw.has(s.key)) raw.set(s.key, s.default_value, "default");

    const Reader r{raw};
    ScenarioConfig c;
    c.scenario = [&] {
        try {
            return parse_scenario(r.text("scenario"));
        } catch (const ConfigError& e) {
            throw ConfigError(r.where("scenario") + ": " + e.what());
        }
    }();
    c.fock_dim = r.integer("fock_dim");
    if (c.fock_dim < 40) throw ConfigError(r.where("fock_dim") + ": must be >= 40");
    c.threads = r.integer("threads");
    if (c.threads < 1) throw ConfigError(r.where("threads") + ": must be >= 1");
    c.output_dir = r.text("output_dir");

    auto& p = c.params;
    p.omega_m_ghz = r.q("params.omega_m", Dim::frequency);
    p.nu_ghz = r.q("params.nu", Dim::frequency);
    p.omega_p_ghz = r.q("params.omega_p", Dim::frequency);
    p.drive_ghz = r.q("params.drive", Dim::frequency);
    p.phi_rad = r.q("params.phi", Dim::angle);
    p.g_ghz = r.q("params.g", Dim::frequency);
    p.theta_rad = r.q("params.theta", Dim::angle);
    p.kappa_mhz = r.q("params.kappa", Dim::frequency) * 1e3;
    p.gamma_khz = r.q("params.gamma", Dim::frequency) * 1e6;
    p.gamma_phi_khz = r.q("params.gamma_phi", Dim::frequency) * 1e6;
    p.temperature_mk = r.q("params.temperature", Dim::temperature);
    const std::string de = r.text("params.delta_eff");
    if (de == "analytic") {
        c.delta_eff_mode = DeltaEffMode::analytic;
    } else if (de == "calibrated") {
        c.delta_eff_mode = DeltaEffMode::calibrated;
    } else {
        c.delta_eff_mode = DeltaEffMode::value;
        p.delta_eff_mhz = r.q("params.delta_eff", Dim::frequency) * 1e3;
    }
    for (double v : {p.kappa_mhz, p.gamma_khz, p.gamma_phi_khz, p.temperature_mk})
        if (v < 0.0) throw ConfigError("params: rates and temperature must be >= 0");

    c.solver.method = r.text("solver.method") == "rk4" ? dynamics::Method::fixed_rk4
                      : r.text("solver.method") == "adaptive"
                          ? dynamics::Method::adaptive_rk
                          : throw ConfigError(r.where("solver.method") + ": expected adaptive or rk4");
    c.solver.rel_tol = r.q("solver.rel_tol", Dim::number);
    c.solver.abs_tol = r.q("solver.abs_tol", Dim::number);
    c.solver.max_step = r.q("solver.max_step", Dim::time);
    c.solver.check_positivity = r.boolean("solver.check_positivity");
    if (!(c.solver.rel_tol > 0.0) || !(c.solver.abs_tol > 0.0) || !(c.solver.max_step > 0.0))
        throw ConfigError("solver: tolerances and max_step must be > 0");
    c.t_end_ns = r.q("time.t_end", Dim::time);
    c.dt_ns = r.q("time.dt", Dim::time);
    if (!(c.dt_ns > 0.0) || !(c.t_end_ns > 0.0)) throw ConfigError(r.where("time.dt") + ": grid must be positive");

    c.full_frame = pick<dynamics::FullFrame>("full.frame", r.entry("full.frame"),
                                            {{"lab", dynamics::FullFrame::lab},
                                             {"rotating_exact", dynamics::FullFrame::rotating_exact},
                                             {"rotating_rwa", dynamics::FullFrame::rotating_rwa}});
    c.full_qubit_basis = pick<dynamics::QubitDissipatorBasis>(
        "full.qubit_dissipators", r.entry("full.qubit_dissipators"),
        {{"dressed", dynamics::QubitDissipatorBasis::dressed},
         {"persistent", dynamics::QubitDissipatorBasis::persistent}});
    if (c.full_qubit_basis == dynamics::QubitDissipatorBasis::persistent && c.full_frame != dynamics::FullFrame::lab)
        throw ConfigError(r.where("full.qubit_dissipators") + ": persistent requires full.frame = lab");
    c.full_fock_dim = r.integer("full.fock_dim");
    if (c.full_fock_dim < 10) throw ConfigError(r.where("full.fock_dim") + ": must be >= 10");
    c.sweep_model = pick<ModelKind>("model", r.entry("model"), kModels);

    for (double v : r.list("sweep.kappa", Dim::frequency)) c.sweep_kappa_mhz.push_back(v * 1e3);
    c.sweep_temperature_mk = r.list("sweep.temperature", Dim::temperature);
    for (double v : r.list("heatmap.kappa", Dim::frequency)) c.heatmap_kappa_mhz.push_back(v * 1e3);
    for (double v : r.list("heatmap.gamma", Dim::frequency)) c.heatmap_gamma_khz.push_back(v * 1e6);

    c.superposition_t_ns = r.q("superposition.t", Dim::time);
    c.superposition_t_end_ns = r.q("superposition.t_end", Dim::time);
    c.wigner_re = {r.q("wigner.re_min", Dim::number), r.q("wigner.re_max", Dim::number), r.integer("wigner.re_points")};
    c.wigner_im = {r.q("wigner.im_min", Dim::number), r.q("wigner.im_max", Dim::number), r.integer("wigner.im_points")};
    if (c.wigner_re.points < 2 || c.wigner_im.points < 2) throw ConfigError("wigner: at least 2 points per axis");

    auto& cp = c.coupling;
    cp.loop_side_um = r.q("coupling.loop_side", Dim::length);
    cp.current_ua = r.q("coupling.current", Dim::current);
    cp.sphere.spin_density_cm3 = r.q("coupling.spin_density", Dim::density);
    cp.sphere.spin = r.q("coupling.spin", Dim::number);
    cp.sphere.g_factor = r.q("coupling.g_factor", Dim::number);
    cp.radii_um = r.list("coupling.radii", Dim::length);
    cp.currents_ua = r.list("coupling.currents", Dim::current);
    cp.x0_um = r.list("coupling.x0", Dim::length);
    {
        const auto o = r.list("coupling.orders", Dim::integer);
        if (o.size() != 3) throw ConfigError(r.where("coupling.orders") + ": expected three orders");
        cp.orders = {int(o[0]), int(o[1]), int(o[2])};
    }

    c.calib_half_width_mhz = r.q("calibration.half_width", Dim::frequency) * 1e3;
    c.calib_coarse_mhz = r.q("calibration.coarse_step", Dim::frequency) * 1e3;
    c.calib_fine_mhz = r.q("calibration.fine_step", Dim::frequency) * 1e3;
    if (!(c.calib_coarse_mhz > 0.0) || !(c.calib_fine_mhz > 0.0) || !(c.calib_half_width_mhz > 0.0))
        throw ConfigError("calibration: window and steps must be > 0");

    c.convergence_extra = r.integer("convergence.extra");
    c.convergence_full = r.boolean("convergence.full");

    c.custom_model = pick<ModelKind>("custom.model", r.entry("custom.model"), kModels);
    c.custom_init = pick<states::QubitInit>("custom.qubit_init", r.entry("custom.qubit_init"),
                                            {{"plus_x", states::QubitInit::plus_x},
                                             {"minus_x", states::QubitInit::minus_x},
                                             {"plus_plus_minus", states::QubitInit::plus_plus_minus}});
    c.custom_outcome = pick<Outcome>("custom.outcome", r.entry("custom.outcome"),
                                     {{"plus_x", Outcome::plus_x}, {"minus_x", Outcome::minus_x},
                                      {"g", Outcome::g}, {"e", Outcome::e}});
    c.custom_dissipation = r.boolean("custom.dissipation");
    c.raw = std::move(raw);
    return c;
}

ScenarioConfig load_config(const std::optional<std::string>& path) {
    config::RawConfig raw = path ? config::RawConfig::load(*path) : config::RawConfig{};
    std::vector<std::string> keys;
    for (const auto& s : key_registry()) keys.push_back(s.key);
    raw.apply_env(keys);
    return build_config(std::move(raw));
}

// ------------------------------------------------------------- model runs

dynamics::TrajectoryResult run_full(const ScenarioConfig& cfg, const model::DerivedParams& d) {
    dynamics::SolverConfig s = cfg.solver;
    s.sample_times = cfg.sample_times();
    dynamics::RunOptions o;
    o.fock_dim = cfg.full_fock_dim;
    o.full_frame = cfg.full_frame;
    o.qubit_basis = cfg.full_qubit_basis;
    return dynamics::conditional_squeezing_run(d, states::QubitInit::plus_x, s, ModelKind::full, o);
}

dynamics::TrajectoryResult run_effective(const ScenarioConfig& cfg, const model::DerivedParams& d, int fock_dim) {
    dynamics::SolverConfig s = cfg.solver;
    s.sample_times = cfg.sample_times();
    dynamics::RunOptions o;
    o.fock_dim = fock_dim > 0 ? fock_dim : cfg.fock_dim;
    return dynamics::conditional_squeezing_run(d, states::QubitInit::plus_x, s, ModelKind::effective, o);
}

namespace {

dynamics::TrajectoryResult run_model(const ScenarioConfig& cfg, const model::DerivedParams& d, ModelKind k) {
    return k == ModelKind::full ? run_full(cfg, d) : run_effective(cfg, d);
}

double integrated_deviation(const std::vector<double>& t, const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double d0 = std::abs(a[k - 1] - b[k - 1]), d1 = std::abs(a[k] - b[k]);
        if (!std::isfinite(d0) || !std::isfinite(d1)) return kInf;
        acc += 0.5 * (d0 + d1) * (t[k] - t[k - 1]);
    }
    return acc;
}

} // namespace

Calibration calibrate_delta_eff(const ScenarioConfig& cfg, const std::vector<double>& s_full) {
    const auto times = cfg.sample_times();
    if (s_full.size() != times.size()) throw ContractError("calibrate_delta_eff: S_full does not match the time grid");
    model::PhysicalParams p = cfg.params;
    p.delta_eff_mhz.reset();
    const model::DerivedParams d0 = model::derive(p);

    Calibration cal;
    cal.analytic = model::analytic_delta_eff(d0);
    cal.times = times;
    cal.s_full = s_full;
    const double centre = rad_to_mhz(cal.analytic);

    auto evaluate = [&](const std::vector<double>& deltas) {
        std::vector<CalibrationPoint> pts(deltas.size());
        std::vector<std::vector<double>> series(deltas.size());
        parallel_for(deltas.size(), cfg.threads, [&](std::size_t i) {
            model::DerivedParams d = d0;
            d.delta_eff = mhz_to_rad(deltas[i]);
            pts[i] = {deltas[i], kInf, kInf};
            try {
                const auto r = run_effective(cfg, d);
                series[i] = r.series.at("S_dB");
                pts[i].cost = integrated_deviation(times, s_full, series[i]);
                pts[i].max_dev_db = max_abs_diff(s_full, series[i]);
                if (!std::isfinite(pts[i].max_dev_db)) pts[i].max_dev_db = kInf;
            } catch (const NumericError&) {
                // unstable detuning or truncation failure: excluded from the minimum
            }
        });
        return std::make_pair(pts, series);
    };
    // Lowest cost; near-ties resolved towards the analytic default.
    auto best_of = [&](const std::vector<CalibrationPoint>& pts) {
        std::size_t b = 0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double ci = pts[i].cost, cb = pts[b].cost;
            const bool tie = std::isfinite(ci) && std::isfinite(cb) && std::abs(ci - cb) <= 1e-6 * std::max(cb, 1e-12);
            if ((!tie && ci < cb) ||
                (tie && std::abs(pts[i].delta_mhz - centre) < std::abs(pts[b].delta_mhz - centre)))
                b = i;
        }
        return b;
    };

    std::vector<double> coarse;
    const long nc = long(std::floor(cfg.calib_half_width_mhz / cfg.calib_coarse_mhz + 1e-9));
    for (long k = -nc; k <= nc; ++k) coarse.push_back(centre + double(k) * cfg.calib_coarse_mhz);
    auto [cpts, cser] = evaluate(coarse);
    const std::size_t cb = best_of(cpts);
    if (!std::isfinite(cpts[cb].cost)) throw NumericError("calibrate_delta_eff: no stable detuning in the scan window");

    int minima = 0;
    for (std::size_t i = 1; i + 1 < cpts.size(); ++i)
        if (std::isfinite(cpts[i].cost) && cpts[i].cost < cpts[i - 1].cost && cpts[i].cost < cpts[i + 1].cost) ++minima;
    if (minima > 1) {
        std::ostringstream os;
        os << "non-convex calibration scan: " << minima << " local minima (see scan table)";
        cal.warnings.push_back(os.str());
    }
    if (cb == 0 || cb + 1 == cpts.size()) cal.warnings.push_back("calibration optimum lies on the scan window edge");

    std::vector<double> fine;
    const long nf = long(std::floor(cfg.calib_coarse_mhz / cfg.calib_fine_mhz + 1e-9));
    for (long k = -nf; k <= nf; ++k) fine.push_back(cpts[cb].delta_mhz + double(k) * cfg.calib_fine_mhz);
    // S_eff is even in Delta_eff, so the mirror of the coarse optimum is refined as well
    const double mirror =
        centre + std::round((-cpts[cb].delta_mhz - centre) / cfg.calib_coarse_mhz) * cfg.calib_coarse_mhz;
    if (std::abs(mirror - centre) <= cfg.calib_half_width_mhz && std::abs(mirror - cpts[cb].delta_mhz) > cfg.calib_coarse_mhz)
        for (long k = -nf; k <= nf; ++k) fine.push_back(mirror + double(k) * cfg.calib_fine_mhz);
    auto [fpts, fser] = evaluate(fine);
    const std::size_t fb = best_of(fpts);

    cal.scan = cpts;
    cal.scan.insert(cal.scan.end(), fpts.begin(), fpts.end());
    const bool fine_wins = fpts[fb].cost <= cpts[cb].cost;
    const CalibrationPoint best = fine_wins ? fpts[fb] : cpts[cb];
    cal.s_eff = fine_wins ? fser[fb] : cser[cb];
    cal.delta_eff = mhz_to_rad(best.delta_mhz);
    cal.max_dev_db = best.max_dev_db;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(cal.s_full[k] - cal.s_eff[k]) < 0.02) ++cal.points_below_002;
    return cal;
}

model::DerivedParams resolve_params(const ScenarioConfig& cfg, std::optional<Calibration>* calib,
                                    const Progress& progress) {
    model::PhysicalParams p = cfg.params;
    if (cfg.delta_eff_mode == DeltaEffMode::analytic) p.delta_eff_mhz.reset();
    if (cfg.delta_eff_mode != DeltaEffMode::calibrated) return model::derive(p);
    p.delta_eff_mhz.reset();
    if (progress) progress("full-model reference run for Delta_eff calibration");
    const auto full = run_full(cfg, model::derive(p));
    if (progress) progress("scanning Delta_eff");
    Calibration c = calibrate_delta_eff(cfg, full.series.at("S_dB"));
    p.delta_eff_mhz = rad_to_mhz(c.delta_eff);
    if (calib) *calib = std::move(c);
    return model::derive(p);
}

// ------------------------------------------------------------ convergence

namespace {

struct SuperpositionRuns {
    dynamics::TrajectoryResult plus, minus;
};

SuperpositionRuns superposition_runs(const model::DerivedParams& d, int N, const std::vector<double>& times,
                                     const dynamics::SolverConfig& base, bool dissipation) {
    dynamics::SolverConfig s = base;
    s.sample_times = times;
    dynamics::RunOptions o;
    o.fock_dim = N;
    o.dissipation = dissipation;
    o.keep_states = true;
    o.outcome = Outcome::g;
    SuperpositionRuns r;
    r.plus = dynamics::conditional_squeezing_run(d, states::QubitInit::plus_plus_minus, s, ModelKind::effective, o);
    o.outcome = Outcome::e;
    r.minus = dynamics::conditional_squeezing_run(d, states::QubitInit::plus_plus_minus, s, ModelKind::effective, o);
    return r;
}

double wigner_diff(const Matrix& a, const Matrix& b, const ScenarioConfig& cfg) {
    const auto wa = observables::wigner(a, cfg.wigner_re, cfg.wigner_im, cfg.threads);
    const auto wb = observables::wigner(b, cfg.wigner_re, cfg.wigner_im, cfg.threads);
    return max_abs_diff(wa.w, wb.w);
}

} // namespace

ConvergenceReport convergence_check(const ScenarioConfig& cfg, const model::DerivedParams& d) {
    ConvergenceReport rep;
    const int N = cfg.fock_dim, N2 = cfg.fock_dim + cfg.convergence_extra;
    rep.fock_dim = N;
    rep.fock_dim_ref = N2;
    auto with = [&](double kappa_mhz, double gamma_khz, double temp_mk) {
        model::PhysicalParams p = cfg.params;
        p.delta_eff_mhz = rad_to_mhz(d.delta_eff);
        p.kappa_mhz = kappa_mhz;
        p.gamma_khz = gamma_khz;
        p.temperature_mk = temp_mk;
        return model::derive(p);
    };
    auto compare_effective = [&](const model::DerivedParams& dd) {
        const auto a = run_effective(cfg, dd, N);
        const auto b = run_effective(cfg, dd, N2);
        rep.max_dS_db = max_abs_diff(a.series.at("S_dB"), b.series.at("S_dB"));
    };
    switch (cfg.scenario) {
    case Scenario::coupling_map_a:
    case Scenario::coupling_map_b:
        rep.point = "none";
        rep.note = "no Fock truncation in this scenario";
        return rep;
    case Scenario::squeeze_compare:
        rep.point = "effective model at the resolved parameters";
        compare_effective(d);
        if (cfg.convergence_full) {
            ScenarioConfig c2 = cfg;
            const auto a = run_full(c2, d);
            c2.full_fock_dim += cfg.convergence_extra;
            const auto b = run_full(c2, d);
            rep.max_dS_db = std::max(rep.max_dS_db, max_abs_diff(a.series.at("S_dB"), b.series.at("S_dB")));
            rep.point += "; full model at full.fock_dim and +extra";
        } else {
            rep.note = "full model not rechecked (convergence.full = false)";
        }
        break;
    case Scenario::kappa_sweep: {
        const double k = *std::min_element(cfg.sweep_kappa_mhz.begin(), cfg.sweep_kappa_mhz.end());
        rep.point = "kappa = " + fmt_num(k) + " MHz";
        compare_effective(with(k, cfg.params.gamma_khz, cfg.params.temperature_mk));
        break;
    }
    case Scenario::temperature_sweep: {
        const double t = *std::max_element(cfg.sweep_temperature_mk.begin(), cfg.sweep_temperature_mk.end());
        rep.point = "T = " + fmt_num(t) + " mK";
        compare_effective(with(cfg.params.kappa_mhz, cfg.params.gamma_khz, t));
        break;
    }
    case Scenario::max_squeeze_heatmap: {
        const double k = *std::min_element(cfg.heatmap_kappa_mhz.begin(), cfg.heatmap_kappa_mhz.end());
        const double g = *std::min_element(cfg.heatmap_gamma_khz.begin(), cfg.heatmap_gamma_khz.end());
        rep.point = "kappa = " + fmt_num(k) + " MHz, gamma = " + fmt_num(g) + " kHz";
        compare_effective(with(k, g, cfg.params.temperature_mk));
        break;
    }
    case Scenario::superposition_wigner:
    case Scenario::superposition_fidelity: {
        rep.point = "dissipative psi+- up to t_end";
        const auto times = times_to(cfg.superposition_t_end_ns, cfg.dt_ns);
        const auto a = superposition_runs(d, N, times, cfg.solver, true);
        const auto b = superposition_runs(d, N2, times, cfg.solver, true);
        rep.max_dS_db = std::max(max_abs_diff(a.plus.series.at("S_dB"), b.plus.series.at("S_dB")),
                                 max_abs_diff(a.minus.series.at("S_dB"), b.minus.series.at("S_dB")));
        auto pad = [&](const Matrix& m) {
            Matrix out = Matrix::Zero(N2, N2);
            out.topLeftCorner(m.rows(), m.cols()) = m;
            return out;
        };
        const std::size_t k = std::size_t(std::lround(cfg.superposition_t_ns / cfg.dt_ns));
        const std::size_t kk = std::min(k, times.size() - 1);
        rep.max_wigner_diff = std::max(wigner_diff(pad(a.plus.states[kk].rho), b.plus.states[kk].rho, cfg),
                                       wigner_diff(pad(a.minus.states[kk].rho), b.minus.states[kk].rho, cfg));
        break;
    }
    case Scenario::custom: {
        rep.point = "custom run";
        dynamics::SolverConfig s = cfg.solver;
        s.sample_times = cfg.sample_times();
        dynamics::RunOptions o;
        o.dissipation = cfg.custom_dissipation;
        o.outcome = cfg.custom_outcome;
        o.full_frame = cfg.full_frame;
        o.qubit_basis = cfg.full_qubit_basis;
        o.fock_dim = N;
        const auto a = dynamics::conditional_squeezing_run(d, cfg.custom_init, s, cfg.custom_model, o);
        o.fock_dim = N2;
        const auto b = dynamics::conditional_squeezing_run(d, cfg.custom_init, s, cfg.custom_model, o);
        rep.max_dS_db = max_abs_diff(a.series.at("S_dB"), b.series.at("S_dB"));
        break;
    }
    }
    rep.flagged = !(rep.max_dS_db <= 0.02) || !(rep.max_wigner_diff <= 1e-3);
    return rep;
}

// ------------------------------------------------------------------ runner

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof buf);
        if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf, std::size_t(f.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

json RunManifest::to_json(const ScenarioConfig& cfg) const {
    json j;
    j["scenario"] = scenario;
    j["version"] = kVersion;
    json echo = json::object();
    for (const auto& [k, e] : cfg.raw.entries()) echo[k] = {{"value", e.value}, {"source", e.source}};
    j["config"] = echo;
    j["conventions"] = {{"ordering", "magnon (x) qubit, index 2n + q, q = 0 g, q = 1 e"},
                        {"qubit_x_states", "|+-> = (|g> +- |e>)/sqrt2"},
                        {"frequencies", "linear (GHz, MHz, kHz) in files; internal rad/ns"}};
    j["convergence"] = convergence ? convergence_json(*convergence) : json(nullptr);
    j["wall_clock_s"] = wall_clock_s;
    json outs = json::array();
    for (const auto& o : outputs) outs.push_back({{"file", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    j["outputs"] = outs;
    j["warnings"] = warnings;
    j["summary"] = summary;
    return j;
}

namespace {

void run_coupling(const ScenarioConfig& cfg, RunManifest& m) {
    const coupling::Loop loop{cfg.coupling.loop_side_um};
    coupling::Sphere s = cfg.coupling.sphere;
    const double b0 = coupling::center_field_closed_form(loop, cfg.coupling.current_ua);
    s.radius_um = 0.5;
    const auto point = coupling::coupling_strength(b0, s);
    m.summary["point_estimate"] = {{"R_um", 0.5}, {"I_p_uA", cfg.coupling.current_ua}, {"B_T", b0},
                                   {"N_spins", point.n_spins}, {"g_GHz", point.g_ghz}};
    if (cfg.scenario == Scenario::coupling_map_a) {
        const auto map = coupling::coupling_map_a(loop, s, cfg.coupling.radii_um, cfg.coupling.currents_ua, cfg.threads);
        CsvFile f(cfg, m, "coupling_map_a.csv", "R_um,I_p_uA,g_GHz");
        for (std::size_t j = 0; j < map.y.size(); ++j)
            for (std::size_t i = 0; i < map.x.size(); ++i) f.row(map.x[i], map.y[j], map.g_ghz[j * map.x.size() + i]);
    } else {
        const auto map = coupling::coupling_map_b(loop, s, cfg.coupling.current_ua, cfg.coupling.radii_um,
                                                  cfg.coupling.x0_um, cfg.coupling.orders, cfg.threads);
        CsvFile f(cfg, m, "coupling_map_b.csv", "R_um,x0_um,g_GHz,quad_rel_error");
        double worst = 0.0;
        for (std::size_t j = 0; j < map.y.size(); ++j)
            for (std::size_t i = 0; i < map.x.size(); ++i) {
                const std::size_t k = j * map.x.size() + i;
                f.row(map.x[i], map.y[j], map.g_ghz[k], map.rel_error[k]);
                worst = std::max(worst, map.rel_error[k]);
            }
        m.summary["max_quadrature_rel_error"] = worst;
    }
}

void write_calibration(const ScenarioConfig& cfg, RunManifest& m, const Calibration& c) {
    CsvFile f(cfg, m, "calibration_scan.csv", "delta_eff_MHz,cost_dB_ns,max_dev_dB");
    for (const auto& p : c.scan) f.row(p.delta_mhz, p.cost, p.max_dev_db);
    m.summary["calibration"] = {{"delta_eff_MHz", rad_to_mhz(c.delta_eff)},
                                {"analytic_MHz", rad_to_mhz(c.analytic)},
                                {"max_dev_dB", c.max_dev_db},
                                {"points_below_0.02dB", c.points_below_002}};
    add_warnings(m, "calibration", c.warnings);
}

void run_squeeze_compare(const ScenarioConfig& cfg, RunManifest& m, model::DerivedParams& d, const Progress& progress) {
    model::PhysicalParams p = cfg.params;
    if (cfg.delta_eff_mode != DeltaEffMode::value) p.delta_eff_mhz.reset();
    d = model::derive(p);
    if (progress) progress("full model");
    const auto full = run_full(cfg, d);
    add_warnings(m, "full", full.warnings);
    if (cfg.delta_eff_mode == DeltaEffMode::calibrated) {
        if (progress) progress("calibrating Delta_eff");
        const Calibration c = calibrate_delta_eff(cfg, full.series.at("S_dB"));
        write_calibration(cfg, m, c);
        p.delta_eff_mhz = rad_to_mhz(c.delta_eff);
        d = model::derive(p);
    }
    if (progress) progress("effective model");
    const auto eff = run_effective(cfg, d);
    add_warnings(m, "effective", eff.warnings);
    {
        CsvFile f(cfg, m, "squeeze_compare.csv", std::string("model,") + kSeriesHeader);
        write_series(f, "full", full);
        write_series(f, "effective", eff);
    }
    const auto& sf = full.series.at("S_dB");
    const auto& se = eff.series.at("S_dB");
    int below = 0;
    for (std::size_t k = 0; k < sf.size(); ++k)
        if (std::abs(sf[k] - se[k]) < 0.02) ++below;
    m.summary["peak_S_full_dB"] = peak(sf);
    m.summary["peak_S_effective_dB"] = peak(se);
    m.summary["max_abs_dS_dB"] = max_abs_diff(sf, se);
    m.summary["points_below_0.02dB"] = below;
}

void run_sweep(const ScenarioConfig& cfg, RunManifest& m, const model::DerivedParams& d) {
    const bool kappa = cfg.scenario == Scenario::kappa_sweep;
    const auto& axis = kappa ? cfg.sweep_kappa_mhz : cfg.sweep_temperature_mk;
    const std::string col = kappa ? "kappa_MHz" : "T_mK";
    std::vector<dynamics::TrajectoryResult> res(axis.size());
    parallel_for(axis.size(), cfg.threads, [&](std::size_t i) {
        model::PhysicalParams p = cfg.params;
        p.delta_eff_mhz = rad_to_mhz(d.delta_eff);
        (kappa ? p.kappa_mhz : p.temperature_mk) = axis[i];
        try {
            res[i] = run_model(cfg, model::derive(p), cfg.sweep_model);
        } catch (const NumericError& e) {
            throw NumericError(col + " = " + fmt_num(axis[i]) + ": " + e.what());
        }
    });
    const std::string name = scenario_name(cfg.scenario);
    {
        CsvFile f(cfg, m, name + ".csv", col + "," + kSeriesHeader);
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const auto& r = res[i];
            for (std::size_t k = 0; k < r.times.size(); ++k)
                f.row(axis[i], r.times[k], r.series.at("S_dB")[k], r.series.at("zeta_sq")[k],
                      r.series.at("n_mean")[k], r.series.at("p_success")[k], r.series.at("angle")[k]);
            add_warnings(m, col + "=" + fmt_num(axis[i]), r.warnings);
        }
    }
    CsvFile f(cfg, m, name + "_peaks.csv", col + ",S_peak_dB,t_peak_ns");
    json peaks = json::array();
    for (std::size_t i = 0; i < axis.size(); ++i) {
        std::size_t at = 0;
        const double s = peak(res[i].series.at("S_dB"), &at);
        f.row(axis[i], s, res[i].times[at]);
        peaks.push_back({{col, axis[i]}, {"S_peak_dB", s}});
    }
    m.summary["peaks"] = peaks;
    m.summary["model"] = model_name(cfg.sweep_model);
}

void run_heatmap(const ScenarioConfig& cfg, RunManifest& m, const model::DerivedParams& d) {
    const auto& ks = cfg.heatmap_kappa_mhz;
    const auto& gs = cfg.heatmap_gamma_khz;
    const std::size_t n = ks.size() * gs.size();
    std::vector<double> smax(n), tmax(n);
    parallel_for(n, cfg.threads, [&](std::size_t idx) {
        const std::size_t ik = idx / gs.size(), ig = idx % gs.size();
        model::PhysicalParams p = cfg.params;
        p.delta_eff_mhz = rad_to_mhz(d.delta_eff);
        p.kappa_mhz = ks[ik];
        p.gamma_khz = gs[ig];
        p.gamma_phi_khz = gs[ig];
        try {
            const auto r = run_model(cfg, model::derive(p), cfg.sweep_model);
            std::size_t at = 0;
            smax[idx] = peak(r.series.at("S_dB"), &at);
            tmax[idx] = r.times[at];
        } catch (const NumericError& e) {
            throw NumericError("kappa = " + fmt_num(ks[ik]) + " MHz, gamma = " + fmt_num(gs[ig]) + " kHz: " + e.what());
        }
    });
    CsvFile f(cfg, m, "max_squeeze_heatmap.csv", "kappa_MHz,gamma_kHz,S_max_dB,t_at_max_ns");
    for (std::size_t idx = 0; idx < n; ++idx) f.row(ks[idx / gs.size()], gs[idx % gs.size()], smax[idx], tmax[idx]);
    m.summary["model"] = model_name(cfg.sweep_model);
    m.summary["gamma_phi"] = "tracks gamma";
    m.summary["S_max_overall_dB"] = peak(smax);
}

json wigner_summary(const observables::WignerGrid& g) {
    const std::size_t i0 = std::size_t(std::lround((0.0 - g.re.front()) / (g.re[1] - g.re[0])));
    const std::size_t j0 = std::size_t(std::lround((0.0 - g.im.front()) / (g.im[1] - g.im[0])));
    return {{"W_origin", g.at(std::min(i0, g.re.size() - 1), std::min(j0, g.im.size() - 1))},
            {"normalization", g.normalization()},
            {"negativity_volume", observables::wigner_negativity_volume(g)},
            {"boundary_max", g.boundary_max()}};
}

void run_superposition_wigner(const ScenarioConfig& cfg, RunManifest& m, const model::DerivedParams& d) {
    const std::vector<double> times = {0.0, cfg.superposition_t_ns};
    const auto ideal = superposition_runs(d, cfg.fock_dim, times, cfg.solver, false);
    const auto diss = superposition_runs(d, cfg.fock_dim, times, cfg.solver, true);
    struct Item {
        std::string label;
        const dynamics::TrajectoryResult* r;
    };
    const std::vector<Item> items = {{"psi_plus_ideal", &ideal.plus},
                                     {"psi_minus_ideal", &ideal.minus},
                                     {"psi_plus_dissipative", &diss.plus},
                                     {"psi_minus_dissipative", &diss.minus}};
    std::vector<observables::WignerGrid> grids;
    for (const auto& it : items) grids.push_back(observables::wigner(it.r->states.back().rho, cfg.wigner_re, cfg.wigner_im, cfg.threads));
    CsvFile f(cfg, m, "superposition_wigner.csv", "state,re_alpha,im_alpha,W");
    json js = json::object();
    for (std::size_t s = 0; s < items.size(); ++s) {
        const auto& g = grids[s];
        for (std::size_t j = 0; j < g.im.size(); ++j)
            for (std::size_t i = 0; i < g.re.size(); ++i) f.row(items[s].label, g.re[i], g.im[j], g.at(i, j));
        json w = wigner_summary(g);
        w["p_success"] = items[s].r->series.at("p_success").back();
        w["S_dB"] = items[s].r->series.at("S_dB").back();
        js[items[s].label] = w;
        add_warnings(m, items[s].label, g.warnings);
    }
    m.summary["t_ns"] = cfg.superposition_t_ns;
    m.summary["states"] = js;
    m.summary["outcomes"] = "psi_plus <- qubit g, psi_minus <- qubit e, initial |0>(|+x>+|-x>)/sqrt2";
}

void run_superposition_fidelity(const ScenarioConfig& cfg, RunManifest& m, const model::DerivedParams& d) {
    const auto times = times_to(cfg.superposition_t_end_ns, cfg.dt_ns);
    const auto ideal = superposition_runs(d, cfg.fock_dim, times, cfg.solver, false);
    const auto diss = superposition_runs(d, cfg.fock_dim, times, cfg.solver, true);
    CsvFile f(cfg, m, "superposition_fidelity.csv", "state,t_ns,F");
    double fp_min = 1.0, fm_min = 1.0;
    std::vector<double> fp(times.size()), fm(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        auto fid = [&](const dynamics::TrajectoryResult& a, const dynamics::TrajectoryResult& b) {
            if (!(a.series.at("p_success")[k] > 1e-12 && b.series.at("p_success")[k] > 1e-12))
                return std::numeric_limits<double>::quiet_NaN();
            return observables::uhlmann_fidelity(a.states[k].rho, b.states[k].rho);
        };
        fp[k] = fid(ideal.plus, diss.plus);
        fm[k] = fid(ideal.minus, diss.minus);
        fp_min = std::min(fp_min, fp[k]);
        fm_min = std::min(fm_min, fm[k]);
    }
    for (std::size_t k = 0; k < times.size(); ++k) f.row("psi_plus", times[k], fp[k]);
    for (std::size_t k = 0; k < times.size(); ++k) f.row("psi_minus", times[k], fm[k]);
    m.summary["min_F_plus"] = fp_min;
    m.summary["min_F_minus"] = fm_min;
}

void run_custom(const ScenarioConfig& cfg, RunManifest& m, const model::DerivedParams& d) {
    dynamics::SolverConfig s = cfg.solver;
    s.sample_times = cfg.sample_times();
    dynamics::RunOptions o;
    o.fock_dim = cfg.custom_model == ModelKind::full ? cfg.full_fock_dim : cfg.fock_dim;
    o.full_frame = cfg.full_frame;
    o.qubit_basis = cfg.full_qubit_basis;
    o.dissipation = cfg.custom_dissipation;
    o.outcome = cfg.custom_outcome;
    const auto r = dynamics::conditional_squeezing_run(d, cfg.custom_init, s, cfg.custom_model, o);
    add_warnings(m, "custom", r.warnings);
    CsvFile f(cfg, m, "custom.csv", std::string("model,") + kSeriesHeader);
    write_series(f, model_name(cfg.custom_model), r);
    m.summary["peak_S_dB"] = peak(r.series.at("S_dB"));
}

} // namespace

RunManifest run(const ScenarioConfig& cfg, bool with_convergence, const Progress& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.output_dir);
    RunManifest m;
    m.scenario = scenario_name(cfg.scenario);
    model::DerivedParams d;
    const bool coupling_only = cfg.scenario == Scenario::coupling_map_a || cfg.scenario == Scenario::coupling_map_b;
    if (cfg.scenario == Scenario::squeeze_compare) {
        run_squeeze_compare(cfg, m, d, progress);
    } else {
        if (!coupling_only) {
            std::optional<Calibration> cal;
            d = resolve_params(cfg, &cal, progress);
            if (cal) write_calibration(cfg, m, *cal);
        }
        if (progress) progress("running " + m.scenario);
        switch (cfg.scenario) {
        case Scenario::coupling_map_a:
        case Scenario::coupling_map_b: run_coupling(cfg, m); break;
        case Scenario::kappa_sweep:
        case Scenario::temperature_sweep: run_sweep(cfg, m, d); break;
        case Scenario::max_squeeze_heatmap: run_heatmap(cfg, m, d); break;
        case Scenario::superposition_wigner: run_superposition_wigner(cfg, m, d); break;
        case Scenario::superposition_fidelity: run_superposition_fidelity(cfg, m, d); break;
        case Scenario::custom: run_custom(cfg, m, d); break;
        case Scenario::squeeze_compare: break;
        }
    }
    if (!coupling_only) {
        m.summary["delta_eff_MHz"] = rad_to_mhz(d.delta_eff);
        m.summary["g_cs_MHz"] = rad_to_mhz(d.g_cs);
        add_warnings(m, "params", d.warnings);
    }
    if (with_convergence) {
        if (progress) progress("convergence check");
        m.convergence = convergence_check(cfg, d);
        if (m.convergence->flagged)
            m.warnings.push_back("truncation convergence flagged at " + m.convergence->point);
    }
    m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream mf(fs::path(cfg.output_dir) / (m.scenario + ".manifest.json"), std::ios::binary);
    mf << m.to_json(cfg).dump(2) << '\n';
    return m;
}

namespace {

void finish(const ScenarioConfig& cfg, RunManifest& m, std::chrono::steady_clock::time_point t0) {
    m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream mf(fs::path(cfg.output_dir) / (m.scenario + ".manifest.json"), std::ios::binary);
    mf << m.to_json(cfg).dump(2) << '\n';
}

} // namespace

RunManifest run_superpose(const ScenarioConfig& cfg, const Progress& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.output_dir);
    RunManifest m;
    m.scenario = "superpose";
    std::optional<Calibration> cal;
    const auto d = resolve_params(cfg, &cal, progress);
    if (cal) write_calibration(cfg, m, *cal);
    const cplx xi = model::squeezing_parameter(d, cfg.superposition_t_ns);
    json js = json::object();
    CsvFile f(cfg, m, "superposition_states.csv", "state,index,re,im");
    for (auto [sign, label] : {std::pair{states::Parity::plus, "psi_plus"}, std::pair{states::Parity::minus, "psi_minus"}}) {
        const auto sp = states::superposition_pm(xi, sign, cfg.fock_dim);
        for (int n = 0; n < sp.psi.size(); ++n) f.row(label, n, sp.psi(n).real(), sp.psi(n).imag());
        js[label] = {{"norm_sq_numeric", sp.norm_sq_numeric},
                     {"norm_sq_cosh_plus_half", sp.norm_sq_printed},
                     {"norm_sq_cosh_minus_half", sp.norm_sq_overlap},
                     {"overlap_numeric", sp.overlap_numeric}};
    }
    f.close();
    m.summary["t_ns"] = cfg.superposition_t_ns;
    m.summary["xi"] = {{"re", xi.real()}, {"im", xi.imag()}, {"r", std::abs(xi)}};
    m.summary["states"] = js;
    m.summary["delta_eff_MHz"] = rad_to_mhz(d.delta_eff);
    finish(cfg, m, t0);
    return m;
}

RunManifest run_calibrate(const ScenarioConfig& cfg, const Progress& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.output_dir);
    ScenarioConfig c = cfg;
    c.delta_eff_mode = DeltaEffMode::calibrated;
    RunManifest m;
    m.scenario = "calibrate";
    std::optional<Calibration> cal;
    resolve_params(c, &cal, progress);
    write_calibration(c, m, *cal);
    CsvFile f(c, m, "calibration_series.csv", "t_ns,S_full_dB,S_eff_dB");
    for (std::size_t k = 0; k < cal->times.size(); ++k) f.row(cal->times[k], cal->s_full[k], cal->s_eff[k]);
    f.close();
    finish(c, m, t0);
    return m;
}

RunManifest run_converge(const ScenarioConfig& cfg, const Progress& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.output_dir);
    RunManifest m;
    m.scenario = "converge_" + scenario_name(cfg.scenario);
    model::DerivedParams d;
    if (cfg.scenario != Scenario::coupling_map_a && cfg.scenario != Scenario::coupling_map_b) {
        std::optional<Calibration> cal;
        d = resolve_params(cfg, &cal, progress);
        if (cal) write_calibration(cfg, m, *cal);
    }
    if (progress) progress("convergence check");
    m.convergence = convergence_check(cfg, d);
    finish(cfg, m, t0);
    return m;
}

} // namespace magsq::scenarios
