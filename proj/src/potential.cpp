#include "knotloop/potential.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "knotloop/errors.hpp"

namespace knotloop {

cplx monomial(const std::vector<int>& exps, const CVec& x) {
    cplx r = 1.0;
    for (size_t i = 0; i < exps.size(); ++i)
        if (exps[i]) r *= std::pow(x[Eigen::Index(i)], exps[i]);
    return r;
}

namespace {

std::string monomial_string(const std::vector<int>& e) {
    std::string num, den;
    for (size_t i = 0; i < e.size(); ++i) {
        if (!e[i]) continue;
        std::string v = "x" + std::to_string(i + 1);
        if (std::abs(e[i]) > 1) v += "^" + std::to_string(std::abs(e[i]));
        std::string& s = e[i] > 0 ? num : den;
        if (!s.empty()) s += "*";
        s += v;
    }
    if (num.empty()) num = "1";
    return den.empty() ? num : num + "/" + den;
}

}  // namespace

cplx Potential::value(const CVec& x) const {
    cplx v = 0.0;
    for (const auto& t : terms) v += double(t.sign) * li2(monomial(t.exponents, x));
    return v;
}

CVec Potential::log_derivatives(const CVec& x) const {
    CVec g = CVec::Zero(n_vars);
    for (const auto& t : terms) {
        cplx l = std::log(1.0 - monomial(t.exponents, x));
        for (int j = 0; j < n_vars; ++j) g[j] -= double(t.sign * t.exponents[j]) * l;
    }
    return g;
}

CMat Potential::hessian(const CVec& x) const {
    CMat H = CMat::Zero(n_vars, n_vars);
    for (const auto& t : terms) {
        cplx u = monomial(t.exponents, x);
        cplx w = double(t.sign) * u / (1.0 - u);
        for (int i = 0; i < n_vars; ++i)
            for (int j = 0; j < n_vars; ++j)
                H(i, j) += double(t.exponents[i] * t.exponents[j]) * w;
    }
    return H;
}

std::string Potential::to_string() const {
    std::string s;
    for (const auto& t : terms) {
        s += (t.sign > 0 ? (s.empty() ? "" : " + ") : (s.empty() ? "-" : " - "));
        s += "Li2(" + monomial_string(t.exponents) + ")";
    }
    return s;
}

Potential build_potential(const std::vector<Corner>& corners, int n_vars) {
    Potential V;
    V.n_vars = n_vars;
    for (const auto& c : corners) {
        if (!c.essential) continue;
        V.terms.push_back({c.sign, c.potential_exponents, c.shape_exponents, c.crossing, c.pos});
    }
    if (V.terms.empty()) throw EmptyPotential("no essential corners");
    return V;
}

CVec CriticalSystem::evaluate(const CVec& x) const {
    CVec E = CVec::Ones(V.n_vars);
    for (const auto& t : V.terms) {
        cplx f = 1.0 - monomial(t.exponents, x);
        for (int i = 0; i < V.n_vars; ++i)
            if (t.exponents[i]) E[i] *= std::pow(f, -t.sign * t.exponents[i]);
    }
    return E;
}

void CriticalSystem::residual(const CVec& x, CVec& F, CMat& J) const {
    CVec E = evaluate(x);
    CMat H = V.hessian(x);
    F = E - CVec::Ones(V.n_vars);
    J.resize(V.n_vars, V.n_vars);
    for (int i = 0; i < V.n_vars; ++i)
        for (int j = 0; j < V.n_vars; ++j) J(i, j) = E[i] * H(i, j) / x[j];
}

std::string CriticalSystem::to_string() const {
    std::ostringstream os;
    for (int i = 0; i < V.n_vars; ++i) {
        os << "E" << i + 1 << " =";
        for (const auto& t : V.terms) {
            int p = -t.sign * t.exponents[i];
            if (!p) continue;
            os << " (1 - " << monomial_string(t.exponents) << ")^" << p;
        }
        os << " = 1\n";
    }
    return os.str();
}

CriticalSystem critical_system(const Potential& V) { return CriticalSystem{V}; }

double potential_volume(const Potential& V, const CVec& x) {
    double vol = 0.0;
    for (const auto& t : V.terms) vol -= t.sign * bloch_wigner(monomial(t.exponents, x));
    return vol;
}

namespace {

bool shapes_ok(const Potential& V, const CVec& x) {
    if (!x.allFinite()) return false;
    for (int i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) < 1e-10) return false;
    for (const auto& t : V.terms) {
        cplx u = monomial(t.exponents, x);
        if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) return false;
        if (std::abs(u) < 1e-10 || std::abs(1.0 - u) < 1e-10) return false;
    }
    return true;
}

}  // namespace

GeometricSolution solve_geometric(const CriticalSystem& sys, const SeedPolicy& policy) {
    const int n = sys.V.n_vars;
    std::vector<CVec> seeds;

    // Grid {a + b i : a, b in {-2, -1, 0.5, 1.5}}^n, sampled with a stride
    // when it exceeds the budget.
    const double vals[4] = {-2.0, -1.0, 0.5, 1.5};
    double total = std::pow(16.0, n);
    long long count = std::min<long long>(policy.grid_budget, (long long)total);
    for (long long k = 0; k < count; ++k) {
        long long idx = (long long)((double)k * total / (double)count);
        CVec s(n);
        for (int i = 0; i < n; ++i) {
            int digit = int(idx % 16);
            idx /= 16;
            s[i] = cplx(vals[digit % 4], vals[digit / 4]);
        }
        seeds.push_back(s);
    }
    std::mt19937_64 rng(policy.seed);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int k = 0; k < policy.random_restarts; ++k) {
        CVec s(n);
        for (int i = 0; i < n; ++i) {
            double re = unif(rng);
            double im = unif(rng);
            s[i] = cplx(re, im);
        }
        seeds.push_back(s);
    }

    // Iterate in y = log x on the logarithmic residual x_j dV/dx_j, whose
    // Jacobian is exactly H; then certify on the rational residual E - 1.
    NewtonSystem G = [&](const CVec& y, CVec& f, CMat& J) {
        CVec x = y.array().exp();
        f = sys.V.log_derivatives(x);
        J = sys.V.hessian(x);
    };
    NewtonSystem F = [&](const CVec& x, CVec& f, CMat& J) { sys.residual(x, f, J); };
    NewtonOptions log_opts;
    log_opts.tolerance = 1e-13;
    std::vector<CVec> roots;
    GeometricSolution best;
    bool have = false;
    for (const CVec& s : seeds) {
        NewtonResult r;
        try {
            NewtonResult l = newton_solve(G, CVec(s.array().log()), log_opts);
            r = newton_solve(F, CVec(l.x.array().exp()));
        } catch (const Error&) {
            continue;
        }
        if (!shapes_ok(sys.V, r.x)) continue;
        bool dup = false;
        for (const CVec& q : roots)
            if ((q - r.x).cwiseAbs().maxCoeff() < policy.dedup_tolerance) {
                dup = true;
                break;
            }
        if (dup) continue;
        roots.push_back(r.x);
        double vol;
        try {
            vol = potential_volume(sys.V, r.x);
        } catch (const Error&) {
            continue;
        }
        if (vol > 1e-8 && (!have || vol > best.volume + 1e-10)) {
            best.x = r.x;
            best.volume = vol;
            best.residual = r.residual;
            have = true;
        }
    }
    if (!have) throw NoGeometricSolution("no root with positive volume was found");
    best.roots_found = int(roots.size());
    return best;
}

cplx NormalizerPair::omega1_at(const CVec& x) const {
    cplx r = 1.0;
    for (const auto& f : omega1) {
        cplx z = monomial(f.shape_exponents, x);
        r *= f.inverted ? 1.0 - 1.0 / z : 1.0 - z;
    }
    return r;
}

cplx NormalizerPair::omega2_at(const CVec& x) const { return monomial(omega2_exponents, x); }

NormalizerPair normalizers(const OpenDiagram& d, int orientation) {
    if (orientation != 1 && orientation != -1) throw InvalidTwist("orientation must be +1 or -1");
    NormalizerPair np;
    np.orientation = orientation;
    np.omega2_exponents.assign(d.n_vars, 0);
    const auto corners = all_corners(d);

    // Cap and cup contributions only involve their own segments, which carry
    // constant labels on standard diagrams.
    auto constant = [&](int e) {
        return d.labels[e] && d.labels[e]->kind != LabelKind::Var;
    };
    for (const Edge& e : d.edges) {
        if (e.end_edge || e.a.crossing < 0 || e.b.crossing < 0) continue;
        bool both_up = e.a.half <= NW && e.b.half <= NW;
        bool both_down = e.a.half >= SW && e.b.half >= SW;
        if (both_up || both_down) {
            int id = d.crossings[e.a.crossing].edge[e.a.half];
            if (!constant(id)) throw Degenerate("cap or cup segment carries a variable");
        }
    }

    for (const auto& c : corners) {
        if (!c.essential || (c.pos != W && c.pos != E)) continue;
        np.omega1.push_back({c.shape_exponents, d.crossings[c.crossing].type < 0, c.crossing, c.pos});
    }

    std::vector<int> under_in(d.n()), over_out(d.n());
    for (const Visit& v : d.visits) {
        int in = orientation > 0 ? v.in_half : v.out_half;
        int out = orientation > 0 ? v.out_half : v.in_half;
        if (v.over)
            over_out[v.crossing] = out;
        else
            under_in[v.crossing] = in;
    }
    for (int t = 0; t < d.n(); ++t) {
        int ui = under_in[t], oo = over_out[t];
        int pos = (ui + 1) % 4 == oo ? ui : oo;
        const Corner& c = corners[4 * t + pos];
        if (!c.essential) continue;
        auto exps = [&](int half) {
            std::vector<int> v(d.n_vars, 0);
            const auto& l = d.labels[d.crossings[t].edge[half]];
            if (l && l->kind == LabelKind::Var) v[l->var] = 1;
            return v;
        };
        auto a = exps(ui), b = exps(oo);
        for (int i = 0; i < d.n_vars; ++i) np.omega2_exponents[i] += 2 * (a[i] - b[i]);
    }
    return np;
}

cplx ot_invariant(const Potential& V, const NormalizerPair& norms, const CVec& x) {
    cplx det = det_complex(V.hessian(x));
    if (std::abs(det) < 1e-12) throw SingularHessian("Hessian determinant vanishes");
    return norms.omega1_at(x) * norms.omega2_at(x) / 2.0 * det;
}

cplx canonical_sign(cplx v) {
    if (v.imag() < 0 || (v.imag() == 0 && v.real() < 0)) return -v;
    return v;
}

}  // namespace knotloop
