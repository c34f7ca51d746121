#include "magsq/observables.hpp"
#include "magsq/errors.hpp"
#include "magsq/format.hpp"
#include "magsq/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace magsq::observables {

QuadratureVariance min_quadrature_variance(const Matrix& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 2)
        throw ContractError("min_quadrature_variance: expected square magnon density matrix");
    const int N = int(rho.rows());
    cplx m1 = 0.0, m2 = 0.0;
    double n = 0.0;
    for (int k = 0; k < N; ++k) {
        n += k * rho(k, k).real();
        if (k + 1 < N) m1 += std::sqrt(double(k + 1)) * rho(k + 1, k);
        if (k + 2 < N) m2 += std::sqrt(double(k + 1) * (k + 2)) * rho(k + 2, k);
    }
    const cplx c = m2 - m1 * m1;
    QuadratureVariance q;
    q.zeta_sq = 1.0 + 2.0 * (n - std::norm(m1)) - 2.0 * std::abs(c);
    q.angle = 0.5 * std::arg(c) + std::numbers::pi / 2.0;
    q.raw = q.zeta_sq / 4.0;
    return q;
}

double squeezing_db(double zeta_sq) {
    if (!(zeta_sq > 0.0)) {
        std::ostringstream os;
        os << "squeezing_db: non-positive variance " << zeta_sq << " (truncation artefact)";
        throw NumericError(os.str());
    }
    return -10.0 * std::log10(zeta_sq);
}

double WignerGrid::cell_area() const {
    const double dre = re.size() > 1 ? (re.back() - re.front()) / double(re.size() - 1) : 1.0;
    const double dim = im.size() > 1 ? (im.back() - im.front()) / double(im.size() - 1) : 1.0;
    return dre * dim;
}

double WignerGrid::normalization() const {
    double s = 0.0;
    for (double v : w) s += v;
    return s * cell_area();
}

double WignerGrid::boundary_max() const {
    const std::size_t nr = re.size(), ni = im.size();
    double b = 0.0;
    for (std::size_t i = 0; i < nr; ++i) b = std::max({b, std::abs(at(i, 0)), std::abs(at(i, ni - 1))});
    for (std::size_t j = 0; j < ni; ++j) b = std::max({b, std::abs(at(0, j)), std::abs(at(nr - 1, j))});
    return b;
}

namespace {

std::vector<double> axis(const WignerAxes& a) {
    if (a.points < 2 || !(a.max > a.min)) throw ContractError("wigner: invalid grid axis");
    std::vector<double> v(std::size_t(a.points));
    const double h = (a.max - a.min) / double(a.points - 1);
    for (int k = 0; k < a.points; ++k) v[std::size_t(k)] = a.min + h * k;
    return v;
}

// Sum over rho_{mn} of the displaced-parity matrix elements
//   (2/pi) (-1)^m e^{i k arg A} l_m^k(4|A|^2),  n = m + k,
// with normalized Laguerre functions l_m^k(x) = sqrt(m!/(m+k)!) e^{-x/2} x^{k/2} L_m^k(x)
// run up in m along each diagonal, so nothing overflows at large truncations.
double wigner_value(const Matrix& rho, cplx A, std::vector<double>& l) {
    const int M = int(rho.rows());
    const double x = 4.0 * std::norm(A);
    const double theta = std::arg(A);
    l.assign(std::size_t(M), 0.0);
    double W = 0.0;
    for (int k = 0; k < M; ++k) {
        const int len = M - k;
        if (k == 0)
            l[0] = std::exp(-0.5 * x);
        else
            l[0] = x > 0.0 ? std::exp(-0.5 * x + 0.5 * k * std::log(x) - 0.5 * std::lgamma(k + 1.0)) : 0.0;
        if (len > 1) l[1] = (1.0 + k - x) * l[0] / std::sqrt(1.0 + k);
        for (int m = 1; m + 1 < len; ++m)
            l[m + 1] = ((2.0 * m + 1.0 + k - x) * l[m] - std::sqrt(double(m) * (m + k)) * l[m - 1]) /
                       std::sqrt((m + 1.0) * (m + 1.0 + k));
        const cplx phase = std::polar(1.0, k * theta);
        double acc = 0.0;
        for (int m = 0; m < len; ++m) {
            const double term = (rho(m, m + k) * phase).real() * l[m];
            acc += (m % 2 ? -term : term);
        }
        W += (k == 0 ? 1.0 : 2.0) * acc;
    }
    return (2.0 / std::numbers::pi) * W;
}

} // namespace

WignerGrid wigner(const Matrix& rho, const WignerAxes& re_axis, const WignerAxes& im_axis, int threads) {
    if (rho.rows() != rho.cols()) throw ContractError("wigner: density matrix not square");
    if (std::abs(rho.trace() - 1.0) > 1e-6) throw ContractError("wigner: density matrix not normalized");
    WignerGrid g;
    g.re = axis(re_axis);
    g.im = axis(im_axis);
    g.w.assign(g.re.size() * g.im.size(), 0.0);
    const Matrix r = qops::hermitian_part(rho);
    parallel_for(g.im.size(), threads, [&](std::size_t j) {
        std::vector<double> wl;
        for (std::size_t i = 0; i < g.re.size(); ++i)
            g.w[j * g.re.size() + i] = wigner_value(r, cplx(g.re[i], g.im[j]), wl);
    });
    const double b = g.boundary_max();
    if (b > 1e-4) {
        std::ostringstream os;
        os << "wigner: boundary |W| = " << b << " exceeds 1e-4; grid may not capture the support";
        g.warnings.push_back(os.str());
    }
    return g;
}

double wigner_point_direct(const Matrix& rho, cplx alpha, int pad) {
    const int N = int(rho.rows());
    const int M = N + pad;
    Matrix big = Matrix::Zero(M, M);
    big.topLeftCorner(N, N) = rho;
    const Matrix D = qops::displacement_operator(alpha, M);
    const Matrix P = qops::parity(M);
    return (2.0 / std::numbers::pi) * qops::expectation(P, D.adjoint() * big * D).real();
}

void write_wigner_csv(std::ostream& os, const WignerGrid& g) {
    os << "re_alpha,im_alpha,W\n";
    for (std::size_t j = 0; j < g.im.size(); ++j)
        for (std::size_t i = 0; i < g.re.size(); ++i)
            os << fmt_num(g.re[i]) << ',' << fmt_num(g.im[j]) << ',' << fmt_num(g.at(i, j)) << '\n';
}

double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw ContractError("uhlmann_fidelity: dimension mismatch");
    const Matrix s = qops::matrix_sqrt_psd(qops::hermitian_part(rho));
    const Matrix M = qops::hermitian_part(s * qops::hermitian_part(sigma) * s);
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    double f = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double v = es.eigenvalues()(k);
        if (v < -1e-6) throw NumericError("uhlmann_fidelity: input is not positive semidefinite");
        if (v > 0.0) f += std::sqrt(v);
    }
    return f;
}

std::vector<double> fock_populations(const Matrix& rho) {
    std::vector<double> p(std::size_t(rho.rows()));
    for (Eigen::Index k = 0; k < rho.rows(); ++k) p[std::size_t(k)] = rho(k, k).real();
    return p;
}

double wigner_negativity_volume(const WignerGrid& g) {
    double s = 0.0;
    for (double v : g.w)
        if (v < 0.0) s -= v;
    return s * g.cell_area();
}

} // namespace magsq::observables
