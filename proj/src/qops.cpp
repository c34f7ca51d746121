#include "magsq/qops.hpp"
#include "magsq/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <sstream>

namespace magsq::qops {

std::string frame_name(Frame f) {
    switch (f) {
    case Frame::lab: return "lab";
    case Frame::rotating_half_pump: return "rotating_half_pump";
    case Frame::drive_interaction: return "drive_interaction";
    }
    return "unknown";
}

void validate_state(const StateDensity& s, double trace_tol, double herm_tol, double eig_tol) {
    const Matrix& r = s.rho;
    if (r.rows() != s.space.dim() || r.cols() != s.space.dim())
        throw ContractError("validate_state: matrix size does not match Hilbert space");
    const cplx tr = r.trace();
    if (std::abs(tr - 1.0) > trace_tol) {
        std::ostringstream os;
        os << "state trace " << tr.real() << " deviates from 1 at t=" << s.time;
        throw NumericError(os.str());
    }
    const double herm = (r - r.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) {
        std::ostringstream os;
        os << "state not Hermitian (max |rho - rho^dag| = " << herm << ") at t=" << s.time;
        throw NumericError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(r), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eig_tol) {
        std::ostringstream os;
        os << "state lost positivity (min eigenvalue " << es.eigenvalues().minCoeff() << ") at t=" << s.time;
        throw NumericError(os.str());
    }
}

Matrix annihilation(int N) {
    if (N < 1) throw ContractError("annihilation: fock_dim must be >= 1");
    Matrix a = Matrix::Zero(N, N);
    for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

Matrix number_op(int N) {
    Matrix n = Matrix::Zero(N, N);
    for (int k = 0; k < N; ++k) n(k, k) = double(k);
    return n;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

Matrix parity(int N) {
    Matrix p = Matrix::Zero(N, N);
    for (int k = 0; k < N; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

Vector fock_ket(int N, int n) {
    if (n < 0 || n >= N) throw ContractError("fock_ket: index out of range");
    Vector v = Vector::Zero(N);
    v(n) = 1.0;
    return v;
}

Matrix sigma_z_bar() {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 0) = -1.0;
    M(1, 1) = 1.0;
    return M;
}

Matrix sigma_x_bar() {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 1) = 1.0;
    M(1, 0) = 1.0;
    return M;
}

Matrix sigma_y_bar() {
    // sigma_y = -i sigma_+ + i sigma_- with sigma_+ = |e><g|
    Matrix M = Matrix::Zero(2, 2);
    M(1, 0) = -I;
    M(0, 1) = I;
    return M;
}

Matrix sigma_plus_bar() {
    Matrix M = Matrix::Zero(2, 2);
    M(1, 0) = 1.0;
    return M;
}

Matrix sigma_minus_bar() {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 1) = 1.0;
    return M;
}

Vector ket_g() { Vector v(2); v << 1.0, 0.0; return v; }
Vector ket_e() { Vector v(2); v << 0.0, 1.0; return v; }
Vector ket_plus() { return (ket_g() + ket_e()) / std::sqrt(2.0); }
Vector ket_minus() { return (ket_g() - ket_e()) / std::sqrt(2.0); }

Matrix kron(const Matrix& A, const Matrix& B) {
    return Eigen::kroneckerProduct(A, B).eval();
}

HermEig herm_eig(const Matrix& A) {
    if (A.rows() != A.cols()) throw ContractError("herm_eig: matrix not square");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ContractError("herm_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(A));
    if (es.info() != Eigen::Success) throw NumericError("herm_eig: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

Matrix matrix_sqrt_psd(const Matrix& A) {
    HermEig e = herm_eig(A);
    RealVector s(e.values.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double v = e.values(k);
        if (v < -1e-6) throw NumericError("matrix_sqrt_psd: matrix is not positive semidefinite");
        s(k) = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    return e.vectors * s.asDiagonal() * e.vectors.adjoint();
}

Matrix expi_hermitian(const Matrix& K, double s) {
    HermEig e = herm_eig(K);
    Vector ph(e.values.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(I * (s * e.values(k)));
    return e.vectors * ph.asDiagonal() * e.vectors.adjoint();
}

Matrix displacement_operator(cplx alpha, int N, std::vector<std::string>* warnings) {
    if (warnings && std::norm(alpha) > N / 4.0) {
        std::ostringstream os;
        os << "displacement |alpha|^2=" << std::norm(alpha) << " exceeds fock_dim/4; truncation error likely";
        warnings->push_back(os.str());
    }
    const Matrix a = annihilation(N);
    // alpha a^dag - alpha^* a = i K with K Hermitian
    const Matrix K = -I * (alpha * a.adjoint() - std::conj(alpha) * a);
    return expi_hermitian(hermitian_part(K));
}

cplx expectation(const Matrix& op, const Matrix& rho) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols())
        throw ContractError("expectation: dimension mismatch");
    // Tr(op rho) = sum_ij op_ij rho_ji
    return (op.transpose().cwiseProduct(rho)).sum();
}

Matrix partial_trace_qubit(const Matrix& rho) {
    if (rho.rows() % 2 != 0 || rho.rows() != rho.cols())
        throw ContractError("partial_trace_qubit: expected square joint matrix of even size");
    const Eigen::Index N = rho.rows() / 2;
    Matrix out(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            out(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
    return out;
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

Matrix hermitian_part(const Matrix& A) { return 0.5 * (A + A.adjoint()); }

SparseMatrix to_sparse(const Matrix& A, double drop_tol) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (std::abs(A(i, j)) > drop_tol) t.emplace_back(i, j, A(i, j));
    SparseMatrix S(A.rows(), A.cols());
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

} // namespace magsq::qops
