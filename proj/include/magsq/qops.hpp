// qops.hpp: truncated Fock space, qubit operators, and small linear-algebra helpers
//
// Joint states use magnon (x) qubit ordering: index = 2*n + q, q = 0 for |g>, q = 1 for |e>.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <string>
#include <vector>

namespace magsq::qops {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr cplx I{0.0, 1.0};

struct HilbertSpace {
    int fock_dim = 80;
    bool with_qubit = true;
    int dim() const { return with_qubit ? 2 * fock_dim : fock_dim; }
};

enum class Frame { lab, rotating_half_pump, drive_interaction };

std::string frame_name(Frame f);

struct StateDensity {
    Matrix rho;
    HilbertSpace space;
    Frame frame = Frame::drive_interaction;
    double time = 0.0;
};

// Checks trace, Hermiticity and positivity; throws NumericError past the given tolerances.
void validate_state(const StateDensity& s, double trace_tol = 1e-8, double herm_tol = 1e-10,
                    double eig_tol = 1e-7);

// ---------------------------------------------------------------- Fock space

Matrix annihilation(int fock_dim);
Matrix number_op(int fock_dim);
Matrix identity(int dim);
Matrix parity(int fock_dim);   // exp(i pi n)
Vector fock_ket(int fock_dim, int n);

// ------------------------------------------------------------------- qubit
// Dressed basis, index 0 = |g>, index 1 = |e>.

Matrix sigma_z_bar();      // |e><e| - |g><g|
Matrix sigma_x_bar();
Matrix sigma_y_bar();
Matrix sigma_plus_bar();   // |e><g|
Matrix sigma_minus_bar();  // |g><e|
Vector ket_g();
Vector ket_e();
Vector ket_plus();         // (|g> + |e>)/sqrt2
Vector ket_minus();        // (|g> - |e>)/sqrt2

// ----------------------------------------------------------- linear algebra

Matrix kron(const Matrix& A, const Matrix& B);

struct HermEig {
    RealVector values;   // ascending
    Matrix vectors;      // columns
};

// Hermitian eigendecomposition. Throws ContractError if A is not Hermitian within 1e-12 relative.
HermEig herm_eig(const Matrix& A);

// PSD square root; eigenvalues in [-1e-6, 0) are clamped, below that NumericError.
Matrix matrix_sqrt_psd(const Matrix& A);

// exp(i s K) for Hermitian K.
Matrix expi_hermitian(const Matrix& K, double s = 1.0);

// D(alpha) = exp(alpha m^dag - alpha^* m) on the truncated space.
// Appends a warning when |alpha|^2 > fock_dim/4.
Matrix displacement_operator(cplx alpha, int fock_dim, std::vector<std::string>* warnings = nullptr);

// Tr(op rho)
cplx expectation(const Matrix& op, const Matrix& rho);

// Magnon reduced state of a joint magnon (x) qubit density matrix.
Matrix partial_trace_qubit(const Matrix& rho_joint);

// Projector |v><v|.
Matrix projector(const Vector& v);

// Hermitian part (A + A^dag)/2.
Matrix hermitian_part(const Matrix& A);

SparseMatrix to_sparse(const Matrix& A, double drop_tol = 0.0);

} // namespace magsq::qops
