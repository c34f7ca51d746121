#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magsq/errors.hpp"
#include "magsq/qops.hpp"

#include <cmath>

using namespace magsq;
using namespace magsq::qops;

TEST_CASE("ladder operators on the truncated space") {
    const int N = 12;
    const Matrix a = annihilation(N);
    for (int n = 1; n < N; ++n) {
        const Vector v = a * fock_ket(N, n);
        CHECK(std::abs(v(n - 1) - std::sqrt(double(n))) < 1e-14);
        CHECK(std::abs(v.norm() - std::sqrt(double(n))) < 1e-14);
    }
    CHECK((a * fock_ket(N, 0)).norm() == 0.0);
    const Matrix comm = a * a.adjoint() - a.adjoint() * a;
    for (int n = 0; n < N - 1; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
    // boundary artefact of the truncation
    CHECK(std::abs(comm(N - 1, N - 1) - double(1 - N)) < 1e-12);
    CHECK((a.adjoint() * a - number_op(N)).norm() < 1e-13);
}

TEST_CASE("parity is (-1)^n") {
    const Matrix P = parity(7);
    for (int n = 0; n < 7; ++n) CHECK(std::abs(P(n, n) - (n % 2 ? -1.0 : 1.0)) < 1e-15);
    CHECK((P * P - identity(7)).norm() < 1e-14);
}

TEST_CASE("qubit operators in the dressed basis") {
    CHECK(std::abs(sigma_z_bar()(0, 0) + 1.0) < 1e-15);
    CHECK(std::abs(sigma_z_bar()(1, 1) - 1.0) < 1e-15);
    CHECK((sigma_plus_bar() * ket_g() - ket_e()).norm() < 1e-15);
    CHECK((sigma_minus_bar() * ket_e() - ket_g()).norm() < 1e-15);
    CHECK((sigma_x_bar() * ket_plus() - ket_plus()).norm() < 1e-15);
    CHECK((sigma_x_bar() * ket_minus() + ket_minus()).norm() < 1e-15);
    const Matrix c = sigma_x_bar() * sigma_y_bar() - sigma_y_bar() * sigma_x_bar();
    CHECK((c - 2.0 * I * sigma_z_bar()).norm() < 1e-14);
}

TEST_CASE("kron uses magnon-major ordering") {
    const Vector v = kron(Matrix(fock_ket(4, 2)), Matrix(ket_e()));
    CHECK(v.size() == 8);
    CHECK(std::abs(v(2 * 2 + 1) - 1.0) < 1e-15);
    CHECK(std::abs(v.norm() - 1.0) < 1e-15);
    Matrix A = Matrix::Random(3, 3), B = Matrix::Random(2, 2);
    const Matrix K = kron(A, B);
    CHECK(std::abs(K(2 * 1 + 0, 2 * 2 + 1) - A(1, 2) * B(0, 1)) < 1e-15);
}

TEST_CASE("herm_eig reconstructs and rejects non-Hermitian input") {
    Matrix A = Matrix::Random(6, 6);
    A = hermitian_part(A);
    const auto e = herm_eig(A);
    for (int i = 1; i < 6; ++i) CHECK(e.values(i) >= e.values(i - 1));
    const Matrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    CHECK((back - A).norm() < 1e-12);
    Matrix B = A;
    B(0, 1) += 0.5;
    CHECK_THROWS_AS(herm_eig(B), ContractError);
}

TEST_CASE("PSD square root and exponential") {
    Matrix X = Matrix::Random(5, 5);
    const Matrix A = X * X.adjoint();
    const Matrix s = matrix_sqrt_psd(A);
    CHECK((s * s - A).norm() < 1e-10 * A.norm());
    Matrix neg = -identity(3);
    CHECK_THROWS_AS(matrix_sqrt_psd(neg), NumericError);

    const Matrix K = hermitian_part(Matrix::Random(5, 5));
    const Matrix U = expi_hermitian(K, 0.7);
    CHECK((U * U.adjoint() - identity(5)).norm() < 1e-12);
    CHECK((expi_hermitian(K, -0.7) * U - identity(5)).norm() < 1e-12);
}

TEST_CASE("displaced vacuum has Poisson statistics") {
    const cplx alpha(1.1, -0.6);
    const int N = 40;
    const Vector v = displacement_operator(alpha, N) * fock_ket(N, 0);
    const double mu = std::norm(alpha);
    for (int n = 0; n < 15; ++n) {
        const double poisson = std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
        CHECK(std::abs(std::norm(v(n)) - poisson) < 1e-12);
    }
    const Matrix a = annihilation(N);
    CHECK(std::abs(v.dot(a * v) - alpha) < 1e-12);

    std::vector<std::string> w;
    displacement_operator(cplx(3.0, 0.0), 20, &w);
    CHECK(!w.empty());
}

TEST_CASE("expectation and partial trace") {
    const int N = 5;
    Matrix rm = Matrix::Zero(N, N);
    rm(0, 0) = 0.25;
    rm(3, 3) = 0.75;
    rm(0, 3) = rm(3, 0) = 0.1;
    const Matrix rq = projector(ket_plus());
    const Matrix joint = kron(rm, rq);
    CHECK((partial_trace_qubit(joint) - rm).norm() < 1e-15);
    CHECK(std::abs(expectation(number_op(N), rm) - 2.25) < 1e-14);
    CHECK(std::abs(expectation(kron(identity(N), sigma_x_bar()), joint) - 1.0) < 1e-14);
}

TEST_CASE("validate_state") {
    StateDensity s;
    s.space = {3, false};
    s.rho = projector(fock_ket(3, 1));
    CHECK_NOTHROW(validate_state(s));
    s.rho(0, 0) = -0.1;
    s.rho(1, 1) = 1.1;
    CHECK_THROWS_AS(validate_state(s), NumericError);
    s.rho = 2.0 * projector(fock_ket(3, 1));
    CHECK_THROWS_AS(validate_state(s), NumericError);
}

TEST_CASE("sparse conversion drops small entries") {
    Matrix A = Matrix::Zero(4, 4);
    A(0, 1) = 1.0;
    A(2, 3) = 1e-20;
    CHECK(to_sparse(A).nonZeros() == 2);
    CHECK(to_sparse(A, 1e-15).nonZeros() == 1);
}
