#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace knotloop {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

using BigInt = boost::multiprecision::cpp_int;
using BigVec = std::vector<BigInt>;
using BigMatrix = std::vector<BigVec>;

// Principal branch of the dilogarithm. Throws BranchCut for real z > 1.
cplx li2(cplx z);

// D(z) = Im Li2(z) + arg(1 - z) log|z|. Throws Degenerate at 0 and 1.
double bloch_wigner(cplx z);

// Throws if any entry is NaN or infinite.
void require_finite(const CVec& v, const char* what);
void require_finite(const CMat& m, const char* what);

struct NewtonOptions {
    int max_iterations = 100;
    int max_halvings = 20;
    double tolerance = 1e-12;
};

// Evaluates residual F(x) and Jacobian J(x) in closed form.
using NewtonSystem = std::function<void(const CVec& x, CVec& F, CMat& J)>;

struct NewtonResult {
    CVec x;
    double residual = 0.0;  // max-norm of F at x
    int iterations = 0;
};

// Damped Newton with step halving. Throws Diverged or SingularJacobian.
NewtonResult newton_solve(const NewtonSystem& F, const CVec& seed,
                          const NewtonOptions& opts = {});

// Determinant by LU with partial pivoting.
cplx det_complex(const CMat& m);

// Some integer x with A x = b, from a Hermite-type column echelon form.
// Throws Infeasible when no integer solution exists.
BigVec solve_integer_affine(const BigMatrix& A, const BigVec& b);

}  // namespace knotloop
