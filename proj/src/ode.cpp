#include "magsq/ode.hpp"
#include "magsq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magsq::ode {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9, kMinFac = 0.2, kMaxFac = 5.0;
constexpr double kAlpha = 0.17, kBeta = 0.04;   // PI controller exponents

} // namespace

Integrator::Integrator(Rhs f, Options opt) : f_(std::move(f)), opt_(opt) {
    if (!(opt_.rel_tol > 0.0) || !(opt_.abs_tol > 0.0)) throw ContractError("ode: tolerances must be > 0");
    if (!(opt_.max_step > 0.0)) throw ContractError("ode: max_step must be > 0");
}

void Integrator::advance(double& t, State& y, double t_end) {
    if (t_end < t) throw ContractError("ode: cannot integrate backwards");
    if (t_end == t) return;
    if (opt_.adaptive) advance_dp5(t, y, t_end);
    else advance_rk4(t, y, t_end);
}

double Integrator::error_norm(const State& err, const State& y0, const State& y1) const {
    double s = 0.0;
    const Eigen::Index n = err.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double sc = opt_.abs_tol + opt_.rel_tol * std::max(std::abs(y0(k)), std::abs(y1(k)));
        const double q = std::abs(err(k)) / sc;
        s += q * q;
    }
    return std::sqrt(s / double(n));
}

double Integrator::initial_step(double t, const State& y, const State& f0) const {
    auto rms = [&](const State& v) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            const double sc = opt_.abs_tol + opt_.rel_tol * std::abs(y(k));
            s += std::norm(v(k)) / (sc * sc);
        }
        return std::sqrt(s / double(v.size()));
    };
    const double d0 = rms(y), d1 = rms(f0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, opt_.max_step);
    State y1 = y + h0 * f0;
    State f1(y.rows(), y.cols());
    f_(t + h0, y1, f1);
    const double d2 = rms(f1 - f0) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, opt_.max_step});
}

void Integrator::advance_dp5(double& t, State& y, double t_end) {
    const auto rows = y.rows(), cols = y.cols();
    for (State* s : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_})
        if (s->rows() != rows || s->cols() != cols) s->resize(rows, cols);
    if (!have_k1_ || t_k1_ != t) {
        f_(t, y, k1_);
        ++stats_.rhs_evals;
        have_k1_ = true;
        t_k1_ = t;
    }
    if (h_ <= 0.0) {
        h_ = initial_step(t, y, k1_);
        stats_.rhs_evals += 1;
    }
    while (t < t_end) {
        if (stats_.steps + stats_.rejected >= opt_.max_steps) {
            std::ostringstream os;
            os << "ode: exceeded max_steps=" << opt_.max_steps << " at t=" << t;
            throw NumericError(os.str());
        }
        const double remaining = t_end - t;
        double h = std::min(h_, opt_.max_step);
        bool last = false;
        if (h >= remaining * (1.0 - 1e-12)) {
            h = remaining;
            last = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "stiffness: step size underflow (h=" << h << " ns) at t=" << t << " ns after "
               << stats_.steps << " steps, " << stats_.rejected << " rejected";
            throw NumericError(os.str());
        }
        ytmp_ = y + h * a21 * k1_;
        f_(t + c2 * h, ytmp_, k2_);
        ytmp_ = y + h * (a31 * k1_ + a32 * k2_);
        f_(t + c3 * h, ytmp_, k3_);
        ytmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        f_(t + c4 * h, ytmp_, k4_);
        ytmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f_(t + c5 * h, ytmp_, k5_);
        ytmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f_(t + h, ytmp_, k6_);
        ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        f_(t + h, ynew_, k7_);
        stats_.rhs_evals += 6;
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        const double err = error_norm(err_, y, ynew_);
        if (!std::isfinite(err)) {
            h_ = h * kMinFac;
            ++stats_.rejected;
            continue;
        }
        if (err <= 1.0) {
            double fac = kSafety * std::pow(std::max(err, 1e-10), -kAlpha) * std::pow(err_old_, kBeta);
            fac = std::clamp(fac, kMinFac, kMaxFac);
            err_old_ = std::max(err, 1e-4);
            t = last ? t_end : t + h;
            y.swap(ynew_);
            k1_.swap(k7_);
            t_k1_ = t;
            ++stats_.steps;
            if (stats_.smallest_step == 0.0 || h < stats_.smallest_step) stats_.smallest_step = h;
            // A step clipped to land on t_end does not shrink the controller's proposal.
            h_ = last ? std::max(h_, h * fac) : h * fac;
        } else {
            h_ = h * std::max(kMinFac, kSafety * std::pow(err, -0.2));
            ++stats_.rejected;
        }
    }
}

void Integrator::advance_rk4(double& t, State& y, double t_end) {
    const auto rows = y.rows(), cols = y.cols();
    for (State* s : {&k1_, &k2_, &k3_, &k4_, &ytmp_})
        if (s->rows() != rows || s->cols() != cols) s->resize(rows, cols);
    const double span = t_end - t;
    const long n = std::max(1L, long(std::ceil(span / opt_.max_step - 1e-9)));
    const double h = span / double(n);
    const double t0 = t;
    for (long k = 0; k < n; ++k) {
        const double tk = t0 + h * double(k);
        f_(tk, y, k1_);
        ytmp_ = y + 0.5 * h * k1_;
        f_(tk + 0.5 * h, ytmp_, k2_);
        ytmp_ = y + 0.5 * h * k2_;
        f_(tk + 0.5 * h, ytmp_, k3_);
        ytmp_ = y + h * k3_;
        f_(tk + h, ytmp_, k4_);
        y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        stats_.rhs_evals += 4;
        ++stats_.steps;
    }
    stats_.smallest_step = stats_.smallest_step == 0.0 ? h : std::min(stats_.smallest_step, h);
    t = t_end;
}

} // namespace magsq::ode
