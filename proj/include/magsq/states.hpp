// states.hpp: squeezed vacua, their even/odd superpositions, and the logical codewords

#pragma once

#include "magsq/qops.hpp"

#include <iosfwd>
#include <string>

namespace magsq::states {

using qops::cplx;
using qops::Matrix;
using qops::Vector;

// S(xi)|0> from the Fock recurrence c_{2m+2}/c_{2m} = -e^{i phi} tanh r sqrt((2m+1)/(2m+2)),
// c_0 = cosh(r)^{-1/2}. Throws NumericError when the mass beyond fock_dim exceeds 1e-10.
Vector squeezed_vacuum_fock(cplx xi, int fock_dim);

enum class Parity { plus, minus };

struct Superposition {
    Vector psi;                 // normalized
    double norm_sq_numeric;     // || |xi> +- |-xi> ||^2 from the Fock sum
    double norm_sq_printed;     // 2[1 +- cosh(2r)^{+1/2}]
    double norm_sq_overlap;     // 2[1 +- cosh(2r)^{-1/2}]
    double overlap_numeric;     // <xi|-xi> from the Fock sum
};

// (|xi> +- |-xi>) / sqrt(N+-)
Superposition superposition_pm(cplx xi, Parity sign, int fock_dim);

struct Codewords {
    Vector zero_l;
    Vector one_l;
};

// |0_L> = psi_+ and |1_L> = psi_- at real squeezing r.
Codewords logical_codewords(double r, int fock_dim);

enum class QubitInit { plus_x, minus_x, plus_plus_minus };

// |0><0| (x) qubit state; plus_plus_minus = (|+> + |->)/sqrt2 = |g>.
qops::StateDensity joint_initial_state(int fock_dim, QubitInit q);

// CSV rows "index,re,im" with a header.
void write_state_csv(std::ostream& os, const Vector& psi);

} // namespace magsq::states
