#include "knotloop/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "knotloop/oneloop.hpp"
#include "knotloop/potential.hpp"
#include "knotloop/triangulation.hpp"

namespace knotloop {

using nlohmann::json;

void validate(const RunConfig& c) {
    int sources = int(c.twists.has_value()) + int(c.fraction.has_value()) + int(c.gluing.has_value());
    if (sources != 1) throw InvalidTwist("exactly one of --twists, --fraction, --gluing is required");
    if (!(c.tolerance > 0)) throw InvalidTwist("tolerance must be positive");
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::Input: return 2;
        case ErrorCategory::Solver: return 3;
        case ErrorCategory::Io: return 4;
    }
    return 3;
}

namespace {

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(std::string(what) + ": expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

const json& field_of(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("report is missing '") + key + "'");
    return j.at(key);
}

template <class T>
T get_field(const json& j, const char* key) {
    const json& v = field_of(j, key);
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("report field '") + key + "': " + e.what());
    }
}

class Stopwatch {
public:
    explicit Stopwatch(bool on) : on_(on), t0_(std::chrono::steady_clock::now()) {}
    void lap(std::map<std::string, double>& out, const std::string& name) {
        auto now = std::chrono::steady_clock::now();
        if (on_) out[name] = std::chrono::duration<double>(now - t0_).count();
        t0_ = now;
    }

private:
    bool on_;
    std::chrono::steady_clock::time_point t0_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt(cplx z) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.10f %c %.10fi", z.real(), z.imag() < 0 ? '-' : '+', std::abs(z.imag()));
    return buf;
}

}  // namespace

json report_to_json(const Report& r) {
    json j;
    j["knot"] = r.knot;
    j["twists"] = r.twists;
    j["tau"] = cplx_json(r.tau);
    j["omega"] = r.omega ? cplx_json(*r.omega) : json(nullptr);
    j["sign"] = r.sign;
    j["discrepancy"] = r.discrepancy;
    j["relative"] = r.relative;
    j["pass"] = r.pass;
    j["volume"] = r.volume;
    j["counts"] = {{"crossings", r.counts.crossings},
                   {"variables", r.counts.variables},
                   {"tetrahedra", r.counts.tetrahedra},
                   {"edges", r.counts.edges}};
    j["residuals"] = r.residuals;
    j["timings"] = r.timings;
    j["error"] = r.error;
    j["exit_code"] = r.exit_code;
    return j;
}

Report report_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("report must be an object");
    Report r;
    r.knot = get_field<std::string>(j, "knot");
    r.twists = get_field<std::vector<int>>(j, "twists");
    r.tau = cplx_from(field_of(j, "tau"), "tau");
    const json& omega = field_of(j, "omega");
    if (!omega.is_null()) r.omega = cplx_from(omega, "omega");
    r.sign = get_field<int>(j, "sign");
    r.discrepancy = get_field<double>(j, "discrepancy");
    r.relative = get_field<double>(j, "relative");
    r.pass = get_field<bool>(j, "pass");
    r.volume = get_field<double>(j, "volume");
    const json& c = field_of(j, "counts");
    r.counts.crossings = get_field<int>(c, "crossings");
    r.counts.variables = get_field<int>(c, "variables");
    r.counts.tetrahedra = get_field<int>(c, "tetrahedra");
    r.counts.edges = get_field<int>(c, "edges");
    r.residuals = get_field<std::map<std::string, double>>(j, "residuals");
    r.timings = get_field<std::map<std::string, double>>(j, "timings");
    r.error = get_field<std::string>(j, "error");
    r.exit_code = get_field<int>(j, "exit_code");
    return r;
}

std::string format_text(const Report& r) {
    std::ostringstream os;
    os << "knot " << r.knot << "\n";
    if (!r.error.empty()) {
        os << "error: " << r.error << "\n";
        return os.str();
    }
    os << "crossings " << r.counts.crossings << ", variables " << r.counts.variables << ", tetrahedra "
       << r.counts.tetrahedra << ", edges " << r.counts.edges << "\n";
    os << "volume " << fmt(r.volume) << "\n";
    os << "tau   = " << fmt(r.tau) << "   or   " << fmt(-r.tau) << "\n";
    if (r.omega) {
        os << "omega = " << fmt(*r.omega) << "   or   " << fmt(-*r.omega) << "\n";
        os << "tau = " << (r.sign > 0 ? "+" : "-") << "omega, discrepancy " << fmt(r.discrepancy) << " (relative "
           << fmt(r.relative) << ") " << (r.pass ? "PASS" : "FAIL") << "\n";
    }
    if (!r.residuals.empty()) {
        os << "checks:\n";
        for (const auto& [k, v] : r.residuals) os << "  " << k << " " << fmt(v) << "\n";
    }
    for (const auto& [k, v] : r.timings) os << "time " << k << " " << fmt(v) << " s\n";
    return os.str();
}

namespace {

struct Pipeline {
    OpenDiagram d;
    Potential V;
    GeometricSolution sol;
    NormalizerPair norms;
    cplx omega;
    OctahedralComplex O;
    IdealTriangulation T;
    GluingData gd;
    ShapeSolution zs;
    ExplicitFlattening ef;
    OneLoopResult one;
};

// Tries the meridian candidates in order until the 1-loop matrix is regular.
OneLoopResult tau_with_meridian(const IdealTriangulation& T, GluingData& gd, const Flattening& fl,
                                const ShapeSolution& zs) {
    try {
        return one_loop(gd, fl, zs);
    } catch (const SingularMatrix&) {
    }
    for (const auto& m : meridian_candidates(T, gd)) {
        GluingData alt = with_meridian(gd, m);
        try {
            OneLoopResult r = one_loop(alt, fl, zs);
            gd = alt;
            return r;
        } catch (const SingularMatrix&) {
        }
    }
    throw SingularMatrix("every meridian candidate gives a singular matrix");
}

void verify(const Pipeline& p, const RunConfig& c, Report& r) {
    auto& res = r.residuals;
    int failures = 0;
    auto check = [&](const std::string& key, double v, double limit) {
        res[key] = v;
        if (!(v <= limit)) ++failures;
    };

    Reduction red = reduce_variables(p.T, p.gd, p.zs, 10, c.seed);
    double step = 0.0, pert = 0.0;
    for (const auto& s : red.steps) {
        step = std::max(step, s.ratio_residual);
        pert = std::max(pert, s.perturbed_residual);
    }
    check("reduction_chain", red.chain_residual, 1e-9);
    check("reduction_step", step, 1e-9);
    check("reduction_perturbed", pert, 1e-9);
    check("reduced_size", std::abs(double(red.free_tets.size()) - p.d.n_vars), 0.0);
    HessianCheck hc = verify_hessian_identity(p.V, p.sol.x, p.T, p.gd, p.zs, red);
    check("hessian_identity", hc.residual, 1e-9);
    check("change_of_variables", hc.change_of_variables, 1e-9);
    check("reduced_equations", hc.equation_residual, 1e-12);
    NormalizerCheck nc = verify_normalizer_identity(p.norms, p.sol.x, p.T, p.ef, p.zs);
    check("normalizer_identity", nc.residual, 1e-9);
    check("zeta_product", nc.zeta_product, 1e-9);
    check("three_zeta", nc.three_zeta, 1e-9);

    const CollapseCounts& k = p.T.counts;
    const int nuo = k.n_u + k.n_o;
    double counting = std::abs(p.T.N() - k.formula_tets()) + std::abs(p.T.N() - int(p.T.edge_type.size())) +
                      std::abs(p.T.N() - int(essential_corners(p.d).size()));
    double tallies = std::abs(k.removed_c - nuo) + std::abs(k.removed_r - (nuo + 2)) +
                     std::abs(k.removed_o - (nuo - 3)) + std::abs(k.removed_u - (nuo - 3)) +
                     std::abs(k.ou_merges - (k.n_r1 + k.n_r2 - 2)) +
                     std::abs(k.removed_tets - (k.n_r1 + k.n_r2 + 4 * nuo - 8));
    check("counting", counting, 0.0);
    check("tallies", tallies, 0.0);
    check("pre_transfer_pattern", p.ef.pre_pattern_ok ? 0.0 : 1.0, 0.0);

    double choice = 0.0;
    for (const auto& st : p.ef.steps) {
        cplx first = zeta_power(st.options.front(), p.zs);
        for (const auto& o : st.options) choice = std::max(choice, up_to_sign(first, zeta_power(o, p.zs)));
    }
    check("transfer_choice", choice, 1e-12);

    Flattening solved = solve_flattening(p.gd);
    check("flattening_independence", up_to_sign(p.one.tau, one_loop(p.gd, solved, p.zs).tau), 1e-9);
    double rows = 0.0;
    for (int i = 0; i < p.gd.N; ++i) {
        try {
            rows = std::max(rows, up_to_sign(p.one.tau, one_loop(p.gd, p.ef.total, p.zs, i).tau));
        } catch (const SingularMatrix&) {
        }
    }
    check("replaced_row", rows, 1e-9);
    res["verify_failures"] = failures;
    if (failures) r.exit_code = std::max(r.exit_code, 1);
}

}  // namespace

Report cmd_compute(const RunConfig& c) {
    validate(c);
    if (c.gluing) throw InvalidTwist("compute needs --twists or --fraction");
    TwistVector tv = c.twists ? *c.twists : twists_from_fraction(c.fraction->first, c.fraction->second);
    Report r;
    r.knot = to_string(tv);
    r.twists = tv.entries;
    Stopwatch sw(c.timings);

    Pipeline p;
    p.d = label_segments(build_two_bridge(tv));
    sw.lap(r.timings, "diagram");
    p.V = build_potential(all_corners(p.d), p.d.n_vars);
    SeedPolicy policy;
    policy.seed = c.seed;
    p.sol = solve_geometric(critical_system(p.V), policy);
    p.norms = normalizers(p.d, 1);
    p.omega = ot_invariant(p.V, p.norms, p.sol.x);
    sw.lap(r.timings, "potential");
    p.O = octahedral_decomposition(p.d);
    p.T = collapse(p.O);
    p.gd = gluing_data(p.T);
    p.zs = shapes_from_x(p.T, p.sol.x);
    p.ef = explicit_flattening(p.T, p.gd);
    p.one = tau_with_meridian(p.T, p.gd, p.ef.total, p.zs);
    sw.lap(r.timings, "triangulation");

    ComparisonReport cmp = compare(p.one.tau, p.omega, c.tolerance);
    r.tau = p.one.tau;
    r.omega = p.omega;
    r.sign = cmp.sign;
    r.discrepancy = cmp.discrepancy;
    r.relative = cmp.relative;
    r.pass = cmp.pass;
    r.volume = p.sol.volume;
    r.counts = {p.d.n(), p.d.n_vars, p.T.N(), int(p.T.edge_type.size())};
    r.residuals["critical_point"] = p.sol.residual;
    r.residuals["gluing"] = gluing_residual(p.gd, p.zs);
    r.exit_code = cmp.pass ? 0 : 1;
    if (c.verify) {
        verify(p, c, r);
        sw.lap(r.timings, "verify");
    }
    return r;
}

Report cmd_from_gluing(const RunConfig& c) {
    validate(c);
    if (!c.gluing) throw InvalidTwist("gluing needs --gluing FILE");
    Stopwatch sw(c.timings);
    GluingFile g = read_gluing_file(*c.gluing);
    const GluingData& gd = g.data;
    ShapeSolution zs = g.shapes.empty() ? solve_gluing_shapes(gd, c.seed) : ShapeSolution::from_shapes(g.shapes);
    Flattening fl;
    if (g.has_flattening) {
        if (!is_flattening(gd, g.flattening)) throw SchemaError("flattening does not satisfy the flattening conditions");
        fl = g.flattening;
    } else {
        fl = solve_flattening(gd);
    }
    OneLoopResult one = one_loop(gd, fl, zs);

    Report r;
    r.knot = *c.gluing;
    r.tau = one.tau;
    r.pass = true;
    for (cplx z : zs.z) r.volume -= bloch_wigner(z);
    r.counts = {0, 0, gd.N, gd.N};
    r.residuals["gluing"] = gluing_residual(gd, zs);
    sw.lap(r.timings, "gluing");
    return r;
}

std::vector<TwistVector> sweep_vectors(int max_crossings) {
    std::vector<TwistVector> out;
    for (int total = 2; total <= max_crossings; ++total) {
        std::vector<std::vector<int>> level;
        std::vector<int> cur;
        auto rec = [&](auto&& self, int left) -> void {
            if (left == 0) {
                if (cur.size() >= 2) {
                    std::vector<int> rev(cur.rbegin(), cur.rend());
                    if (cur >= rev) level.push_back(cur);
                }
                return;
            }
            for (int a = 1; a <= left; ++a) {
                cur.push_back(a);
                self(self, left - a);
                cur.pop_back();
            }
        };
        rec(rec, total);
        std::sort(level.begin(), level.end());
        for (auto& v : level) out.push_back(TwistVector{v});
    }
    return out;
}

SweepResult cmd_sweep(const RunConfig& c) {
    if (c.max_crossings < 4) throw InvalidTwist("sweep needs max crossings >= 4");
    SweepResult s;
    std::vector<TwistVector> todo;
    for (const auto& tv : sweep_vectors(c.max_crossings)) {
        auto [p, q] = fraction_of(tv);
        if (p % 2 == 0)
            ++s.skipped_links;
        else if (is_torus_fraction(p, q))
            ++s.skipped_torus;
        else
            todo.push_back(tv);
    }
    s.rows.resize(todo.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < todo.size();) {
            RunConfig rc = c;
            rc.twists = todo[i];
            rc.fraction.reset();
            rc.gluing.reset();
            try {
                s.rows[i] = cmd_compute(rc);
            } catch (const Error& e) {
                Report r;
                r.knot = to_string(todo[i]);
                r.twists = todo[i].entries;
                r.error = e.what();
                r.exit_code = exit_code_for(e);
                s.rows[i] = r;
            }
        }
    };
    unsigned n = c.threads > 0 ? unsigned(c.threads) : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, std::max<size_t>(todo.size(), 1));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& r : s.rows) {
        s.max_relative = std::max(s.max_relative, r.relative);
        if (!r.error.empty() || !r.pass || r.exit_code != 0) s.all_pass = false;
    }
    return s;
}

json sweep_to_json(const SweepResult& s) {
    json rows = json::array();
    for (const auto& r : s.rows) rows.push_back(report_to_json(r));
    return {{"rows", rows},
            {"skipped_links", s.skipped_links},
            {"skipped_torus", s.skipped_torus},
            {"max_relative", s.max_relative},
            {"all_pass", s.all_pass}};
}

}  // namespace knotloop
