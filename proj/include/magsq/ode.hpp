// ode.hpp: Dormand-Prince 5(4) with PI step control, and classical fixed-step RK4,
// for complex matrix-valued ODEs

#pragma once

#include <Eigen/Dense>

#include <functional>

namespace magsq::ode {

using State = Eigen::MatrixXcd;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

struct Options {
    bool adaptive = true;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 1.0;
    long max_steps = 20'000'000;
};

struct Stats {
    long steps = 0;
    long rejected = 0;
    long rhs_evals = 0;
    double smallest_step = 0.0;
};

class Integrator {
public:
    Integrator(Rhs f, Options opt);

    // Advances (t, y) to exactly t_end. Throws NumericError on step-size underflow.
    void advance(double& t, State& y, double t_end);

    const Stats& stats() const { return stats_; }

private:
    void advance_dp5(double& t, State& y, double t_end);
    void advance_rk4(double& t, State& y, double t_end);
    double initial_step(double t, const State& y, const State& f0) const;
    double error_norm(const State& err, const State& y0, const State& y1) const;

    Rhs f_;
    Options opt_;
    Stats stats_;
    double h_ = 0.0;        // proposed step carried between calls
    double err_old_ = 1e-4;
    bool have_k1_ = false;
    double t_k1_ = 0.0;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
};

} // namespace magsq::ode
