// observables.hpp: quadrature squeezing, Wigner function, fidelity, Fock populations

#pragma once

#include "magsq/qops.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace magsq::observables {

using qops::cplx;
using qops::Matrix;

struct QuadratureVariance {
    double zeta_sq;    // vacuum-normalized minimum variance (vacuum = 1)
    double angle;      // squeezing angle theta* (rad)
    double raw;        // unnormalized minimum variance; vacuum = 1/4
};

// zeta^2 = 1 + 2(<n> - |<m>|^2) - 2|<m^2> - <m>^2| for a magnon density matrix.
QuadratureVariance min_quadrature_variance(const Matrix& rho);

// -10 log10(zeta^2); NumericError if zeta^2 <= 0.
double squeezing_db(double zeta_sq);

struct WignerGrid {
    std::vector<double> re;    // Re(alpha) axis
    std::vector<double> im;    // Im(alpha) axis
    std::vector<double> w;     // row-major: w[i_im * re.size() + i_re]
    double cell_area() const;
    double at(std::size_t i_re, std::size_t i_im) const { return w[i_im * re.size() + i_re]; }
    double normalization() const;
    double boundary_max() const;
    std::vector<std::string> warnings;
};

struct WignerAxes {
    double min = -5.0, max = 5.0;
    int points = 201;
};

// W(alpha) = (2/pi) Tr[P D^dag(alpha) rho D(alpha)] with exact Fock matrix elements of D.
// Rows are independent; threads > 1 splits them across workers with identical results.
WignerGrid wigner(const Matrix& rho, const WignerAxes& re_axis = {}, const WignerAxes& im_axis = {},
                  int threads = 1);

// Single point using the truncated D(alpha) from qops on a padded space.
double wigner_point_direct(const Matrix& rho, cplx alpha, int pad = 120);

void write_wigner_csv(std::ostream& os, const WignerGrid& g);

// F = Tr sqrt( sqrt(rho) sigma sqrt(rho) )
double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma);

std::vector<double> fock_populations(const Matrix& rho);

// sum max(-W, 0) dA
double wigner_negativity_volume(const WignerGrid& g);

} // namespace magsq::observables
