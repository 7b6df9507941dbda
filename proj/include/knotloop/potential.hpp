#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "knotloop/knot_diagram.hpp"
#include "knotloop/numerics.hpp"

namespace knotloop {

cplx monomial(const std::vector<int>& exps, const CVec& x);

struct PotentialTerm {
    int sign = 1;
    std::vector<int> exponents;        // argument u = x^exponents
    std::vector<int> shape_exponents;  // tetrahedron shape z = u^sign
    int crossing = 0, pos = 0;
};

struct Potential {
    int n_vars = 0;
    std::vector<PotentialTerm> terms;

    cplx value(const CVec& x) const;                 // sum s Li2(u)
    CVec log_derivatives(const CVec& x) const;       // x_j dV/dx_j, principal logs
    CMat hessian(const CVec& x) const;               // x_i d/dx_i (x_j dV/dx_j)
    std::string to_string() const;
};

// One term per corner; throws EmptyPotential when there is none.
Potential build_potential(const std::vector<Corner>& corners, int n_vars);

// E_i(x) = prod_c (1 - u_c)^(-s_c e_i^c); the critical points are E = 1.
struct CriticalSystem {
    Potential V;
    CVec evaluate(const CVec& x) const;
    // F = E - 1 and its Jacobian dE_i/dx_j = E_i H_ij / x_j.
    void residual(const CVec& x, CVec& F, CMat& J) const;
    std::string to_string() const;
};

CriticalSystem critical_system(const Potential& V);

struct SeedPolicy {
    std::uint64_t seed = 0;
    int grid_budget = 256;
    int random_restarts = 200;
    double dedup_tolerance = 1e-8;
};

struct GeometricSolution {
    CVec x;
    double volume = 0.0;
    double residual = 0.0;
    int roots_found = 0;
};

// Total volume -sum_c s_c D(u_c); throws Degenerate on a degenerate shape.
double potential_volume(const Potential& V, const CVec& x);

// Newton from the seed grid and random restarts; the root of largest volume.
GeometricSolution solve_geometric(const CriticalSystem& sys, const SeedPolicy& policy = {});

struct Omega1Factor {
    std::vector<int> shape_exponents;
    bool inverted = false;  // 1 - 1/z instead of 1 - z
    int crossing = 0, pos = 0;
};

struct NormalizerPair {
    std::vector<Omega1Factor> omega1;
    std::vector<int> omega2_exponents;  // Omega2 is a monomial in x
    int orientation = 1;
    cplx omega1_at(const CVec& x) const;
    cplx omega2_at(const CVec& x) const;
};

// orientation +1 runs from the infinity endpoint to the zero endpoint.
NormalizerPair normalizers(const OpenDiagram& d, int orientation = 1);

// (Omega1 Omega2 / 2) det H at x. Throws SingularHessian if |det H| < 1e-12.
cplx ot_invariant(const Potential& V, const NormalizerPair& norms, const CVec& x);

// The sign representative with nonnegative imaginary part.
cplx canonical_sign(cplx v);

}  // namespace knotloop
