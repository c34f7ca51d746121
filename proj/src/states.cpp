#include "magsq/states.hpp"
#include "magsq/errors.hpp"
#include "magsq/format.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace magsq::states {

using qops::I;

Vector squeezed_vacuum_fock(cplx xi, int N) {
    if (N < 1) throw ContractError("squeezed_vacuum_fock: fock_dim must be >= 1");
    const double r = std::abs(xi);
    const double phi = std::arg(xi);
    const cplx ratio = -std::exp(I * phi) * std::tanh(r);
    Vector c = Vector::Zero(N);
    cplx ck = 1.0 / std::sqrt(std::cosh(r));
    double mass = 0.0;
    for (int m = 0; 2 * m < N; ++m) {
        c(2 * m) = ck;
        mass += std::norm(ck);
        ck *= ratio * std::sqrt((2.0 * m + 1.0) / (2.0 * m + 2.0));
    }
    if (1.0 - mass > 1e-10) {
        std::ostringstream os;
        os << "squeezed_vacuum_fock: truncation tail " << 1.0 - mass << " exceeds 1e-10 at r=" << r
           << " with fock_dim=" << N;
        throw NumericError(os.str());
    }
    return c / c.norm();
}

Superposition superposition_pm(cplx xi, Parity sign, int N) {
    const Vector a = squeezed_vacuum_fock(xi, N);
    const Vector b = squeezed_vacuum_fock(-xi, N);
    const double s = sign == Parity::plus ? 1.0 : -1.0;
    const Vector v = a + s * b;
    Superposition out;
    out.norm_sq_numeric = v.squaredNorm();
    if (out.norm_sq_numeric < 1e-300) throw NumericError("superposition_pm: zero-norm superposition");
    out.psi = v / std::sqrt(out.norm_sq_numeric);
    const double r = std::abs(xi);
    out.norm_sq_printed = 2.0 * (1.0 + s * std::sqrt(std::cosh(2.0 * r)));
    out.norm_sq_overlap = 2.0 * (1.0 + s / std::sqrt(std::cosh(2.0 * r)));
    out.overlap_numeric = a.dot(b).real();
    return out;
}

Codewords logical_codewords(double r, int N) {
    return {superposition_pm(r, Parity::plus, N).psi, superposition_pm(r, Parity::minus, N).psi};
}

qops::StateDensity joint_initial_state(int N, QubitInit q) {
    Vector qb;
    switch (q) {
    case QubitInit::plus_x: qb = qops::ket_plus(); break;
    case QubitInit::minus_x: qb = qops::ket_minus(); break;
    case QubitInit::plus_plus_minus: qb = (qops::ket_plus() + qops::ket_minus()) / std::sqrt(2.0); break;
    }
    const Vector psi = qops::kron(qops::fock_ket(N, 0), qb);
    qops::StateDensity s;
    s.rho = qops::projector(psi);
    s.space = {N, true};
    s.time = 0.0;
    return s;
}

void write_state_csv(std::ostream& os, const Vector& psi) {
    os << "index,re,im\n";
    for (Eigen::Index k = 0; k < psi.size(); ++k)
        os << k << ',' << fmt_num(psi(k).real()) << ',' << fmt_num(psi(k).imag()) << '\n';
}

} // namespace magsq::states
