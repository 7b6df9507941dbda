#include "knotloop/oneloop.hpp"

#include <algorithm>
#include <random>

#include "knotloop/errors.hpp"

namespace knotloop {

ShapeSolution ShapeSolution::from_shapes(const std::vector<cplx>& z) {
    ShapeSolution s;
    s.z = z;
    for (size_t j = 0; j < z.size(); ++j) {
        if (!std::isfinite(z[j].real()) || !std::isfinite(z[j].imag()) || std::abs(z[j]) < 1e-10 ||
            std::abs(1.0 - z[j]) < 1e-10)
            throw DegenerateShape("shape " + std::to_string(j + 1) + " is degenerate");
        s.zeta.push_back(1.0 / z[j]);
        s.zetap.push_back(1.0 / (1.0 - z[j]));
        s.zetapp.push_back(1.0 / (z[j] * (z[j] - 1.0)));
    }
    return s;
}

ShapeSolution shapes_from_x(const IdealTriangulation& T, const CVec& x) {
    std::vector<cplx> z;
    for (const auto& t : T.tets) z.push_back(monomial(t.shape_exponents, x));
    return ShapeSolution::from_shapes(z);
}

namespace {

cplx row_product(const std::vector<int>& g, const std::vector<int>& gp, const std::vector<int>& gpp,
                 const ShapeSolution& zs) {
    cplx p = 1.0;
    for (int j = 0; j < zs.N(); ++j) {
        cplx z = zs.z[j];
        if (g[j]) p *= std::pow(z, g[j]);
        if (gp[j]) p *= std::pow(1.0 / (1.0 - z), gp[j]);
        if (gpp[j]) p *= std::pow(1.0 - 1.0 / z, gpp[j]);
    }
    return p;
}

}  // namespace

double up_to_sign(cplx a, cplx b) {
    double scale = std::max(std::abs(a), 1e-300);
    return std::min(std::abs(a - b), std::abs(a + b)) / scale;
}

cplx zeta_power(const Flattening& fl, const ShapeSolution& zs) {
    cplx w = 1.0;
    for (int j = 0; j < zs.N(); ++j)
        w *= std::pow(zs.zeta[j], fl.f[j]) * std::pow(zs.zetap[j], fl.fp[j]) * std::pow(zs.zetapp[j], fl.fpp[j]);
    return w;
}

double gluing_residual(const GluingData& gd, const ShapeSolution& zs) {
    double r = 0.0;
    for (int i = 0; i < gd.N; ++i) r = std::max(r, std::abs(row_product(gd.G[i], gd.Gp[i], gd.Gpp[i], zs) - 1.0));
    return std::max(r, std::abs(row_product(gd.C, gd.Cp, gd.Cpp, zs) - 1.0));
}

ShapeSolution solve_gluing_shapes(const GluingData& gd, std::uint64_t seed, int restarts) {
    const int N = gd.N;
    auto row = [&](int i, int which) -> const std::vector<int>& {
        bool mu = i == gd.replaced_row;
        if (which == 0) return mu ? gd.C : gd.G[i];
        if (which == 1) return mu ? gd.Cp : gd.Gp[i];
        return mu ? gd.Cpp : gd.Gpp[i];
    };
    NewtonSystem F = [&](const CVec& z, CVec& f, CMat& J) {
        f.resize(N);
        J.resize(N, N);
        for (int i = 0; i < N; ++i) {
            const auto &g = row(i, 0), &gp = row(i, 1), &gpp = row(i, 2);
            cplx p = 1.0;
            for (int j = 0; j < N; ++j) {
                if (g[j]) p *= std::pow(z[j], g[j]);
                if (gp[j]) p *= std::pow(1.0 / (1.0 - z[j]), gp[j]);
                if (gpp[j]) p *= std::pow(1.0 - 1.0 / z[j], gpp[j]);
            }
            f[i] = p - 1.0;
            for (int j = 0; j < N; ++j)
                J(i, j) = p * (double(g[j]) / z[j] + double(gp[j]) / (1.0 - z[j]) +
                               double(gpp[j]) / (z[j] * (z[j] - 1.0)));
        }
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    bool have = false;
    double best_score = 0.0;
    std::vector<cplx> best;
    for (int k = 0; k < restarts; ++k) {
        CVec s(N);
        for (int j = 0; j < N; ++j) {
            double re = unif(rng);
            double im = unif(rng);
            s[j] = cplx(re, im);
        }
        std::vector<cplx> z(N);
        try {
            NewtonResult r = newton_solve(F, s);
            for (int j = 0; j < N; ++j) z[j] = r.x[j];
            ShapeSolution::from_shapes(z);
            double score = 0.0;
            for (cplx v : z) score -= bloch_wigner(v);
            if (score > 1e-8 && (!have || score > best_score + 1e-10)) {
                best = z;
                best_score = score;
                have = true;
            }
        } catch (const Error&) {
            continue;
        }
    }
    if (!have) throw NoGeometricSolution("no solution of the gluing equations with positive volume");
    return ShapeSolution::from_shapes(best);
}

OneLoopResult one_loop(const GluingData& gd, const Flattening& fl, const ShapeSolution& zs) {
    return one_loop(gd, fl, zs, gd.replaced_row);
}

OneLoopResult one_loop(const GluingData& gd, const Flattening& fl, const ShapeSolution& zs, int replaced_row) {
    const int N = gd.N;
    if (zs.N() != N) throw SchemaError("shape count differs from N");
    if (replaced_row < 0 || replaced_row >= N) throw SchemaError("replaced row out of range");
    CMat M(N, N);
    for (int i = 0; i < N; ++i) {
        bool mu = i == replaced_row;
        const auto& g = mu ? gd.C : gd.G[i];
        const auto& gp = mu ? gd.Cp : gd.Gp[i];
        const auto& gpp = mu ? gd.Cpp : gd.Gpp[i];
        for (int j = 0; j < N; ++j)
            M(i, j) = double(g[j]) * zs.zeta[j] + double(gp[j]) * zs.zetap[j] + double(gpp[j]) * zs.zetapp[j];
    }
    OneLoopResult r;
    r.replaced_row = replaced_row;
    r.determinant = det_complex(M);
    if (std::abs(r.determinant) < 1e-14) throw SingularMatrix("1-loop matrix is singular");
    r.flattening_weight = zeta_power(fl, zs);
    r.tau = r.determinant / (2.0 * r.flattening_weight);
    return r;
}

void rotate_quad(GluingData& gd, Flattening& fl, std::vector<cplx>& z, int j) {
    auto cyc = [j](int& a, int& b, int& c) {
        int t = a;
        a = b;
        b = c;
        c = t;
    };
    for (int i = 0; i < gd.N; ++i) cyc(gd.G[i][j], gd.Gp[i][j], gd.Gpp[i][j]);
    cyc(gd.C[j], gd.Cp[j], gd.Cpp[j]);
    cyc(fl.f[j], fl.fp[j], fl.fpp[j]);
    z[j] = 1.0 / (1.0 - z[j]);
}

namespace {

using ExpMatrix = std::vector<std::vector<long long>>;

struct RowVecs {
    std::vector<int> g, gp, gpp;
};

cplx chain_det(const std::vector<RowVecs>& rows, const std::vector<int>& alive, const std::vector<int>& free,
               const ExpMatrix& A, const std::vector<cplx>& z) {
    const int N = int(z.size());
    CMat W(alive.size(), N);
    for (size_t a = 0; a < alive.size(); ++a) {
        const RowVecs& r = rows[alive[a]];
        for (int j = 0; j < N; ++j)
            W(a, j) = double(r.g[j]) / z[j] + double(r.gp[j]) / (1.0 - z[j]) + double(r.gpp[j]) / (z[j] * (z[j] - 1.0));
    }
    CMat D(N, free.size());
    for (int j = 0; j < N; ++j)
        for (size_t c = 0; c < free.size(); ++c) D(j, c) = double(A[j][free[c]]) * z[j] / z[free[c]];
    return det_complex(W * D);
}

}  // namespace

Reduction reduce_variables(const IdealTriangulation& T, const GluingData& gd, const ShapeSolution& zs,
                           int perturbations, std::uint64_t seed) {
    const int N = gd.N;
    if (int(gd.edge_type.size()) != N) throw Degenerate("reduction needs typed edges");
    int i1 = -1, i2 = -1, nz = 0;
    for (int j = 0; j < N; ++j) {
        if (gd.Cp[j] || gd.Cpp[j]) throw Degenerate("meridian is not a monomial in z");
        if (gd.C[j]) ++nz;
        if (gd.C[j] == -1) i1 = j;
        if (gd.C[j] == 1) i2 = j;
    }
    if (nz != 2 || i1 < 0 || i2 < 0) throw Degenerate("meridian must have the form z_i1^-1 z_i2 = 1");

    std::vector<int> ou, cs, rs;
    for (int i = 0; i < N; ++i) {
        EdgeType t = gd.edge_type[i];
        (t == EdgeType::C ? cs : t == EdgeType::R ? rs : ou).push_back(i);
    }
    if (ou.empty()) throw Degenerate("no O/U edges");
    // Equations: O/U rows but the last, the meridian, then C rows, then R rows.
    std::vector<RowVecs> rows;
    std::vector<int> edge_of_eq;
    for (size_t k = 0; k + 1 < ou.size(); ++k) {
        rows.push_back({gd.G[ou[k]], gd.Gp[ou[k]], gd.Gpp[ou[k]]});
        edge_of_eq.push_back(ou[k]);
    }
    const int mu_eq = int(rows.size());
    rows.push_back({gd.C, gd.Cp, gd.Cpp});
    edge_of_eq.push_back(-1);
    for (int c : cs) {
        rows.push_back({gd.G[c], gd.Gp[c], gd.Gpp[c]});
        edge_of_eq.push_back(c);
    }
    for (int r : rs) {
        rows.push_back({gd.G[r], gd.Gp[r], gd.Gpp[r]});
        edge_of_eq.push_back(r);
    }
    auto eq_of_edge = [&](int e) { return int(std::find(edge_of_eq.begin(), edge_of_eq.end(), e) - edge_of_eq.begin()); };

    Reduction red;
    const CREliminations el = cr_eliminations(T, gd);
    for (size_t k = 0; k < el.c_edges.size(); ++k) red.steps.push_back({eq_of_edge(el.c_edges[k]), el.c_tets[k], 'C'});
    for (size_t k = 0; k < el.r_edges.size(); ++k) red.steps.push_back({eq_of_edge(el.r_edges[k]), el.r_tets[k], 'R'});
    // The meridian pivots on whichever of its shapes is still free.
    bool i2_taken = false, i1_taken = false;
    for (const auto& st : red.steps) {
        i2_taken = i2_taken || st.tet == i2;
        i1_taken = i1_taken || st.tet == i1;
    }
    if (i1_taken && i2_taken) throw EliminationCycle("both meridian shapes are already eliminated");
    red.steps.push_back({mu_eq, i2_taken ? i1 : i2, 'M'});

    ExpMatrix A(N, std::vector<long long>(N, 0));
    for (int j = 0; j < N; ++j) A[j][j] = 1;
    std::vector<ExpMatrix> snapshots{A};
    std::vector<bool> gone(N, false);
    for (const auto& st : red.steps) {
        const RowVecs& r = rows[st.equation];
        for (int j = 0; j < N; ++j)
            if (r.gp[j] || r.gpp[j]) throw EliminationCycle("eliminated equation is not monomial in z");
        if (gone[st.tet]) throw EliminationCycle("shape eliminated twice");
        std::vector<long long> e(N, 0);
        for (int j = 0; j < N; ++j)
            if (r.g[j])
                for (int c = 0; c < N; ++c) e[c] += r.g[j] * A[j][c];
        long long k = e[st.tet];
        if (k != 1 && k != -1) throw EliminationCycle("pivot exponent is not +-1");
        std::vector<long long> sub(N, 0);
        for (int c = 0; c < N; ++c)
            if (c != st.tet) sub[c] = -e[c] * k;
        for (int j = 0; j < N; ++j) {
            long long a = A[j][st.tet];
            if (!a) continue;
            for (int c = 0; c < N; ++c) A[j][c] += a * sub[c];
            A[j][st.tet] = 0;
        }
        gone[st.tet] = true;
        snapshots.push_back(A);
    }
    for (int j = 0; j < N; ++j)
        if (!gone[j]) red.free_tets.push_back(j);
    for (const auto& row : A) red.exponents.emplace_back(row.begin(), row.end());

    // Step k removes equation steps[k].equation and shape steps[k].tet.
    auto run_chain = [&](const std::vector<cplx>& z, std::vector<double>& step_res, cplx* full, cplx* reduced,
                         cplx* elim) {
        std::vector<int> alive(rows.size()), free(N);
        for (size_t i = 0; i < rows.size(); ++i) alive[i] = int(i);
        for (int j = 0; j < N; ++j) free[j] = j;
        cplx prev = chain_det(rows, alive, free, snapshots[0], z);
        if (full) *full = prev;
        cplx prod = 1.0;
        step_res.clear();
        for (size_t k = 0; k < red.steps.size(); ++k) {
            const auto& st = red.steps[k];
            alive.erase(std::find(alive.begin(), alive.end(), st.equation));
            free.erase(std::find(free.begin(), free.end(), st.tet));
            cplx next = chain_det(rows, alive, free, snapshots[k + 1], z);
            step_res.push_back(up_to_sign(prev, next / z[st.tet]));
            prod *= z[st.tet];
            prev = next;
        }
        if (reduced) *reduced = prev;
        if (elim) *elim = prod;
    };

    std::vector<double> res;
    run_chain(zs.z, res, &red.full_det, &red.reduced_det, &red.eliminated_product);
    for (size_t k = 0; k < res.size(); ++k) red.steps[k].ratio_residual = res[k];
    red.chain_residual = up_to_sign(red.full_det, red.reduced_det / red.eliminated_product);
    red.free_product = 1.0;
    for (int j : red.free_tets) red.free_product *= zs.z[j];

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int p = 0; p < perturbations; ++p) {
        std::vector<cplx> zf(N);
        for (int j : red.free_tets) zf[j] = zs.z[j] * (1.0 + 0.05 * cplx(unif(rng), unif(rng)));
        std::vector<cplx> z(N);
        for (int j = 0; j < N; ++j) {
            cplx v = 1.0;
            for (int c : red.free_tets)
                if (A[j][c]) v *= std::pow(zf[c], int(A[j][c]));
            z[j] = v;
        }
        run_chain(z, res, nullptr, nullptr, nullptr);
        for (size_t k = 0; k < res.size(); ++k) red.steps[k].perturbed_residual = std::max(red.steps[k].perturbed_residual, res[k]);
    }
    for (auto& st : red.steps) st.equation = edge_of_eq[st.equation];
    return red;
}

HessianCheck verify_hessian_identity(const Potential& V, const CVec& x, const IdealTriangulation& T,
                                     const GluingData& gd, const ShapeSolution& zs, const Reduction& red) {
    HessianCheck h;
    h.det_h = det_complex(V.hessian(x));
    h.rhs = red.free_product * red.reduced_det;
    h.residual = up_to_sign(h.det_h, h.rhs);

    const int n = V.n_vars;
    if (int(red.free_tets.size()) != n) {
        h.change_of_variables = 1.0;
    } else {
        CMat E(n, n);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < n; ++i) E(a, i) = double(T.tets[red.free_tets[a]].shape_exponents[i]);
        h.change_of_variables = std::abs(std::abs(det_complex(E)) - 1.0);
    }
    std::vector<int> ou;
    for (int i = 0; i < gd.N; ++i)
        if (gd.edge_type[i] == EdgeType::O || gd.edge_type[i] == EdgeType::U) ou.push_back(i);
    for (size_t k = 0; k + 1 < ou.size(); ++k)
        h.equation_residual = std::max(h.equation_residual, std::abs(row_product(gd.G[ou[k]], gd.Gp[ou[k]], gd.Gpp[ou[k]], zs) - 1.0));
    return h;
}

NormalizerCheck verify_normalizer_identity(const NormalizerPair& norms, const CVec& x, const IdealTriangulation& T,
                                           const ExplicitFlattening& ef, const ShapeSolution& zs) {
    NormalizerCheck c;
    cplx omega = norms.omega1_at(x) * norms.omega2_at(x);
    cplx prod_zeta = 1.0;
    for (cplx v : zs.zeta) prod_zeta *= v;
    c.residual = up_to_sign(omega, prod_zeta / zeta_power(ef.total, zs));

    std::vector<int> order(T.N());
    for (int j = 0; j < T.N(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::pair{T.tets[a].row, T.tets[a].pos} < std::pair{T.tets[b].row, T.tets[b].pos};
    });
    c.zeta_product = std::abs(prod_zeta * zs.z[order.front()] * zs.z[order.back()] - 1.0);

    std::map<int, std::vector<int>> at;
    for (int j = 0; j < T.N(); ++j) at[T.tets[j].crossing].push_back(j);
    for (const auto& [t, js] : at) {
        if (js.size() != 3) continue;
        cplx p = 1.0;
        for (int j : js) p *= zs.zeta[j];
        c.three_zeta = std::max(c.three_zeta, std::abs(p - 1.0));
        ++c.three_zeta_crossings;
    }
    c.omega_zeta_f = omega * zeta_power(ef.pre, zs);
    return c;
}

ComparisonReport compare(cplx tau, cplx omega, double tolerance) {
    ComparisonReport r;
    r.tau = tau;
    r.omega = omega;
    double dm = std::abs(tau - omega), dp = std::abs(tau + omega);
    r.sign = dm <= dp ? 1 : -1;
    r.discrepancy = std::min(dm, dp);
    r.relative = std::abs(tau) > 0 ? r.discrepancy / std::abs(tau) : r.discrepancy;
    r.pass = r.relative <= tolerance;
    return r;
}

}  // namespace knotloop
