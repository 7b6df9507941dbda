#pragma once

#include <map>
#include <string>
#include <vector>

#include "knotloop/numerics.hpp"
#include "knotloop/potential.hpp"
#include "knotloop/triangulation.hpp"

namespace knotloop {

struct ShapeSolution {
    std::vector<cplx> z, zeta, zetap, zetapp;
    static ShapeSolution from_shapes(const std::vector<cplx>& z);  // DegenerateShape on z near 0 or 1
    int N() const { return int(z.size()); }
};

// z_j is the corner monomial of tetrahedron j at x.
ShapeSolution shapes_from_x(const IdealTriangulation& T, const CVec& x);

// prod zeta^f zeta'^f' zeta''^f''
cplx zeta_power(const Flattening& fl, const ShapeSolution& zs);

// min(|a - b|, |a + b|) / |a|
double up_to_sign(cplx a, cplx b);

// max |prod z^G z'^G' z''^G'' - 1| over the edge rows and the meridian row.
double gluing_residual(const GluingData& gd, const ShapeSolution& zs);

// Newton on the product-form gluing equations (the replaced row swapped for
// the meridian) from random seeds; the root of largest -sum D(z_j).
// Throws NoGeometricSolution.
ShapeSolution solve_gluing_shapes(const GluingData& gd, std::uint64_t seed = 0, int restarts = 200);

struct OneLoopResult {
    cplx tau, determinant, flattening_weight;
    int replaced_row = -1;
};

// Throws SingularMatrix if |det| < 1e-14.
OneLoopResult one_loop(const GluingData& gd, const Flattening& fl, const ShapeSolution& zs);
OneLoopResult one_loop(const GluingData& gd, const Flattening& fl, const ShapeSolution& zs, int replaced_row);

// Cyclically re-tags the quad types of tetrahedron j (z -> z' -> z''),
// rebuilding the matrix columns, the flattening and the shape.
void rotate_quad(GluingData& gd, Flattening& fl, std::vector<cplx>& z, int j);

struct EliminationStep {
    int equation;  // edge row, or -1 for the meridian
    int tet;       // eliminated shape
    char kind;     // 'C', 'R' or 'M'
    double ratio_residual = 0.0;       // det before vs det after / z, at the solution
    double perturbed_residual = 0.0;   // worst over perturbed points
};

struct Reduction {
    std::vector<EliminationStep> steps;
    std::vector<int> free_tets;            // remaining shapes, n of them
    std::vector<std::vector<int>> exponents;  // z_j as a monomial in the free shapes
    cplx full_det, reduced_det, eliminated_product, free_product;
    double chain_residual = 0.0;  // |det full -+ det reduced / prod z_elim| relative
};

// Requires typed edges (collapsed data) with a two-entry meridian.
// Throws EliminationCycle if a pivot exponent is not +-1.
Reduction reduce_variables(const IdealTriangulation& T, const GluingData& gd, const ShapeSolution& zs,
                           int perturbations = 10, std::uint64_t seed = 0);

struct HessianCheck {
    cplx det_h, rhs;
    double residual = 0.0;
    double change_of_variables = 0.0;  // | |det E| - 1 | for the free shapes as monomials in x
    double equation_residual = 0.0;    // reduced equations at the mapped solution
};

HessianCheck verify_hessian_identity(const Potential& V, const CVec& x, const IdealTriangulation& T,
                                     const GluingData& gd, const ShapeSolution& zs, const Reduction& red);

struct NormalizerCheck {
    double residual = 0.0;          // |O1 O2 -+ prod zeta / zeta^(f+g)| relative
    double zeta_product = 0.0;      // |prod zeta * z_1 z_N - 1|
    double three_zeta = 0.0;        // worst |prod of three zetas at a crossing - 1|
    int three_zeta_crossings = 0;
    cplx omega_zeta_f;              // O1 O2 zeta^f for the pre-transfer f, diagnostic
};

NormalizerCheck verify_normalizer_identity(const NormalizerPair& norms, const CVec& x, const IdealTriangulation& T,
                                           const ExplicitFlattening& ef, const ShapeSolution& zs);

struct ComparisonReport {
    cplx tau, omega;
    int sign = 1;
    double discrepancy = 0.0;
    double relative = 0.0;
    bool pass = false;
    double volume = 0.0;
    std::map<std::string, double> residuals;
};

ComparisonReport compare(cplx tau, cplx omega, double tolerance = 1e-9);

}  // namespace knotloop
