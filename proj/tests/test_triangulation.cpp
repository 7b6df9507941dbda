#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"
#include "knotloop/errors.hpp"
#include "knotloop/oneloop.hpp"
#include "knotloop/report.hpp"

using namespace knotloop;

namespace {

OpenDiagram labeled(const std::string& s) { return label_segments(build_two_bridge(parse_twists(s))); }

std::vector<OpenDiagram> sweep_diagrams(int k) {
    std::vector<OpenDiagram> out;
    for (const TwistVector& t : sweep_vectors(k)) {
        try {
            out.push_back(label_segments(build_two_bridge(t)));
        } catch (const Error&) {
        }
    }
    return out;
}

void check_tallies(const IdealTriangulation& T, int n) {
    const CollapseCounts& k = T.counts;
    const int nuo = k.n_u + k.n_o;
    CHECK(k.n == n);
    CHECK(T.N() == 4 * n - k.n_r1 - k.n_r2 - 4 * k.n_u - 4 * k.n_o + 8);
    CHECK(T.N() == k.formula_tets());
    CHECK(int(T.edge_type.size()) == T.N());
    CHECK(k.removed_c == nuo);
    CHECK(k.removed_r == nuo + 2);
    CHECK(k.removed_o == nuo - 3);
    CHECK(k.removed_u == nuo - 3);
    CHECK(k.ou_merges == k.n_r1 + k.n_r2 - 2);
    CHECK(k.removed_tets == k.n_r1 + k.n_r2 + 4 * nuo - 8);
    CHECK(k.removed_tets + T.N() == 4 * n);
}

std::string fixture_path() { return std::string(KNOTLOOP_DATA_DIR) + "/six_one_gluing.json"; }

}  // namespace

TEST_CASE("vertex pair slots") {
    for (int s = 0; s < 6; ++s) {
        CHECK(pair_slot(kPairs[s][0], kPairs[s][1]) == s);
        CHECK(pair_slot(kPairs[s][1], kPairs[s][0]) == s);
    }
    // Opposite edges share a quad type.
    for (int q = 0; q < 3; ++q) {
        std::set<int> v = {kPairs[2 * q][0], kPairs[2 * q][1], kPairs[2 * q + 1][0], kPairs[2 * q + 1][1]};
        CHECK(v.size() == 4);
        CHECK(slot_quad(2 * q) == q);
        CHECK(slot_quad(2 * q + 1) == q);
    }
    CHECK(to_string(EdgeLabel{EdgeType::O, 3}) == "O3");
    CHECK(type_char(EdgeType::R) == 'R');
}

TEST_CASE("6_1 octahedral decomposition") {
    OctahedralComplex O = octahedral_decomposition(labeled("4,2"));
    CHECK(O.tets.size() == 24);
    CHECK(O.regions.size() == 8);
    CHECK(face_pairing_class_count(O) == 26);
    std::map<EdgeType, std::set<int>> labels;
    for (const auto& t : O.tets)
        for (const auto& e : t.edges) labels[e.type].insert(e.index);
    CHECK(labels[EdgeType::C].size() == 6);
    CHECK(labels[EdgeType::R].size() == 8);
    CHECK(labels[EdgeType::O].size() == 6);
    CHECK(labels[EdgeType::U].size() == 6);
    // The top-bottom edge of every tetrahedron is the C edge of its crossing.
    for (const auto& t : O.tets) CHECK(t.edges[0] == EdgeLabel{EdgeType::C, t.crossing});
}

TEST_CASE("octahedral decomposition over the sweep") {
    for (const OpenDiagram& d : sweep_diagrams(9)) {
        CAPTURE(to_string(d.twists));
        OctahedralComplex O = octahedral_decomposition(d);
        const int n = d.n();
        CHECK(int(O.tets.size()) == 4 * n);
        CHECK(face_pairing_class_count(O) == 4 * n + 2);
        CHECK(int(O.regions.size()) == n + 2);
        // Every face of every tetrahedron is glued exactly once.
        std::map<std::pair<int, std::set<int>>, int> seen;
        for (const auto& p : O.pairings) {
            ++seen[{p.tet1, {p.verts1.begin(), p.verts1.end()}}];
            ++seen[{p.tet2, {p.verts2.begin(), p.verts2.end()}}];
        }
        CHECK(int(seen.size()) == 16 * n);
        for (auto& [k, v] : seen) CHECK(v == 1);
        CHECK(int(O.pairings.size()) == 8 * n);
        std::map<EdgeType, std::set<int>> labels;
        for (const auto& t : O.tets)
            for (const auto& e : t.edges) labels[e.type].insert(e.index);
        CHECK(int(labels[EdgeType::C].size()) == n);
        CHECK(int(labels[EdgeType::R].size()) == n + 2);
        CHECK(int(labels[EdgeType::O].size()) == n);
        CHECK(int(labels[EdgeType::U].size()) == n);
    }
}

TEST_CASE("6_1 collapse") {
    OpenDiagram d = labeled("4,2");
    IdealTriangulation T = collapse(octahedral_decomposition(d));
    CHECK(T.N() == 8);
    CHECK(T.edge_type.size() == 8);
    CHECK(int(essential_corners(d).size()) == T.N());
    std::map<EdgeType, int> by_type;
    for (auto t : T.edge_type) by_type[t]++;
    CHECK(by_type[EdgeType::C] == 2);
    CHECK(by_type[EdgeType::R] == 2);
    CHECK(by_type[EdgeType::O] + by_type[EdgeType::U] == 4);
    // Four merged O/U classes with (O, U) member counts (2,1), (1,1), (1,2), (1,1).
    std::multiset<std::pair<int, int>> comp;
    for (size_t e = 0; e < T.members.size(); ++e) {
        if (T.edge_type[e] != EdgeType::O && T.edge_type[e] != EdgeType::U) continue;
        int o = 0, u = 0;
        for (const auto& l : T.members[e]) {
            o += l.type == EdgeType::O;
            u += l.type == EdgeType::U;
        }
        comp.insert({o, u});
    }
    CHECK(comp == std::multiset<std::pair<int, int>>{{2, 1}, {1, 1}, {1, 2}, {1, 1}});
    // O/U edges come first.
    for (int e = 0; e < 4; ++e) CHECK((T.edge_type[e] == EdgeType::O || T.edge_type[e] == EdgeType::U));
    check_tallies(T, 6);
    // Every surviving tetrahedron is an essential corner with the same shape.
    for (const auto& c : essential_corners(d)) {
        int j = T.tet_at(c.crossing, c.pos);
        REQUIRE(j >= 0);
        CHECK(T.tets[j].shape_exponents == c.shape_exponents);
    }
}

TEST_CASE("collapse counts over the sweep and every segment") {
    int accepted = 0, rejected = 0;
    for (const OpenDiagram& d : sweep_diagrams(9)) {
        CAPTURE(to_string(d.twists));
        OctahedralComplex O = octahedral_decomposition(d);
        IdealTriangulation T = collapse(O);
        check_tallies(T, d.n());
        CHECK(T.N() == int(essential_corners(d).size()));
        for (size_t s = 0; s < O.edges.size(); ++s) {
            if (!O.alive[s]) continue;
            try {
                IdealTriangulation Ts = collapse(O, int(s));
                check_tallies(Ts, d.n());
                ++accepted;
            } catch (const NonAlternatingSegment&) {
                ++rejected;
            }
        }
    }
    CHECK(accepted > 0);
    MESSAGE("segments accepted " << accepted << ", rejected " << rejected);
}

TEST_CASE("gluing data over the sweep") {
    for (const OpenDiagram& d : sweep_diagrams(8)) {
        CAPTURE(to_string(d.twists));
        IdealTriangulation T = collapse(octahedral_decomposition(d));
        GluingData gd = gluing_data(T);
        REQUIRE(gd.N == T.N());
        for (int j = 0; j < gd.N; ++j) {
            int s = 0;
            for (int i = 0; i < gd.N; ++i) s += gd.G[i][j] + gd.Gp[i][j] + gd.Gpp[i][j];
            CHECK(s == 6);
        }
        int nonzero = 0, sum = 0;
        for (int j = 0; j < gd.N; ++j)
            for (int v : {gd.C[j], gd.Cp[j], gd.Cpp[j]})
                if (v) {
                    ++nonzero;
                    sum += v;
                    CHECK(std::abs(v) == 1);
                }
        CHECK(nonzero == 2);
        CHECK(sum == 0);
        CHECK(gd.replaced_row == last_c_row(gd));
        bool has_c = std::count(gd.edge_type.begin(), gd.edge_type.end(), EdgeType::C) > 0;
        CHECK((gd.edge_type[gd.replaced_row] == EdgeType::C || (!has_c && gd.replaced_row == gd.N - 1)));

        auto cands = meridian_candidates(T, gd);
        REQUIRE_FALSE(cands.empty());
        for (const auto& m : cands) CHECK(T.tets[m.i1].shape_exponents == T.tets[m.i2].shape_exponents);

        CREliminations cr = cr_eliminations(T, gd);
        int nc = 0, nr = 0;
        for (auto t : gd.edge_type) {
            nc += t == EdgeType::C;
            nr += t == EdgeType::R;
        }
        CHECK(int(cr.c_tets.size()) == nc);
        CHECK(int(cr.r_tets.size()) == nr);
        std::set<int> distinct(cr.c_tets.begin(), cr.c_tets.end());
        distinct.insert(cr.r_tets.begin(), cr.r_tets.end());
        CHECK(int(distinct.size()) == nc + nr);

        // Shapes mapped from the diagram solution satisfy every equation.
        Potential V = build_potential(essential_corners(d), d.n_vars);
        GeometricSolution g = solve_geometric(critical_system(V));
        ShapeSolution zs = shapes_from_x(T, g.x);
        CHECK(gluing_residual(gd, zs) < 1e-12);
    }
}

TEST_CASE("explicit flattening") {
    for (const OpenDiagram& d : sweep_diagrams(8)) {
        CAPTURE(to_string(d.twists));
        IdealTriangulation T = collapse(octahedral_decomposition(d));
        GluingData gd = gluing_data(T);
        ExplicitFlattening ef = explicit_flattening(T, gd);
        CHECK(ef.pre_pattern_ok);
        CHECK(is_flattening(gd, ef.total));
        CHECK(ef.total == ef.pre + ef.g);
        for (int j = 0; j < gd.N; ++j) {
            CHECK(ef.pre.f[j] + ef.pre.fp[j] + ef.pre.fpp[j] == 1);
            CHECK(ef.g.f[j] + ef.g.fp[j] + ef.g.fpp[j] == 0);
        }
        // Before the transfer: +1 on the u_inf and o_0 edges, -1 on the
        // o_inf and u_0 edges, 2 elsewhere. Merged edges add up.
        CHECK(ef.pre_pairing == pairing(gd, ef.pre));
        int total = 0, deficits = 0;
        for (int e = 0; e < gd.N; ++e) {
            int dev = ef.pre_pairing[e] - 2 - (e == ef.u_inf) - (e == ef.o_zero);
            CHECK(dev <= 0);
            bool ou = gd.edge_type[e] == EdgeType::O || gd.edge_type[e] == EdgeType::U;
            if (!ou) CHECK(dev == 0);
            total += dev;
            deficits += std::max(0, 2 - ef.pre_pairing[e]);
        }
        CHECK(total == -2);
        CHECK(int(ef.deficit_edges.size()) == deficits);
        CHECK(ef.steps.size() >= ef.deficit_edges.size());
        for (const auto& st : ef.steps) CHECK_FALSE(st.options.empty());
    }
}

TEST_CASE("6_1 pre-transfer pairing") {
    IdealTriangulation T = collapse(octahedral_decomposition(labeled("4,2")));
    GluingData gd = gluing_data(T);
    ExplicitFlattening ef = explicit_flattening(T, gd);
    CHECK(ef.pre_pairing[ef.u_inf] == 3);
    CHECK(ef.pre_pairing[ef.o_zero] == 3);
    CHECK(pairing(gd, ef.total) == std::vector<int>(8, 2));
}

TEST_CASE("transfer choice independence") {
    for (const OpenDiagram& d : sweep_diagrams(8)) {
        CAPTURE(to_string(d.twists));
        IdealTriangulation T = collapse(octahedral_decomposition(d));
        GluingData gd = gluing_data(T);
        ExplicitFlattening ef = explicit_flattening(T, gd);
        Potential V = build_potential(essential_corners(d), d.n_vars);
        ShapeSolution zs = shapes_from_x(T, solve_geometric(critical_system(V)).x);
        for (const auto& st : ef.steps) {
            cplx first = zeta_power(st.options.front(), zs);
            for (const auto& o : st.options) {
                CHECK(up_to_sign(first, zeta_power(o, zs)) < 1e-12);
                std::vector<int> eff = pairing(gd, o);
                for (int e = 0; e < gd.N; ++e) CHECK(eff[e] == (e == st.to) - (e == st.from));
            }
        }
    }
}

TEST_CASE("region transfer") {
    int moves = 0, multi = 0;
    for (const OpenDiagram& d : sweep_diagrams(8)) {
        CAPTURE(to_string(d.twists));
        OctahedralComplex O = octahedral_decomposition(d);
        IdealTriangulation T = collapse(O);
        GluingData gd = gluing_data(T);
        ExplicitFlattening ef = explicit_flattening(T, gd);
        Potential V = build_potential(essential_corners(d), d.n_vars);
        ShapeSolution zs = shapes_from_x(T, solve_geometric(critical_system(V)).x);
        const int nr = int(O.regions.size());
        for (int ri = 0; ri < nr; ++ri)
            for (int rj = 0; rj < nr; ++rj) {
                if (ri == rj) continue;
                auto opts = region_transfer_options(O, T, gd, ri, rj);
                if (opts.empty()) {
                    CHECK_THROWS_AS(transfer_region(O, T, gd, ef.total, ri, rj), FlatteningFailure);
                    continue;
                }
                int ei = T.edge_of_label({EdgeType::R, ri}), ej = T.edge_of_label({EdgeType::R, rj});
                REQUIRE(ei >= 0);
                REQUIRE(ej >= 0);
                cplx first = zeta_power(opts.front(), zs);
                for (size_t c = 0; c < opts.size(); ++c) {
                    const Flattening& h = opts[c];
                    ++moves;
                    for (int j = 0; j < gd.N; ++j) CHECK(h.f[j] + h.fp[j] + h.fpp[j] == 0);
                    std::vector<int> eff = pairing(gd, h);
                    for (int e = 0; e < gd.N; ++e) CHECK(eff[e] == (e == ej) - (e == ei));
                    Flattening moved = transfer_region(O, T, gd, ef.total, ri, rj, int(c));
                    CHECK(moved == ef.total + h);
                    CHECK(up_to_sign(first, zeta_power(h, zs)) < 1e-12);
                }
                if (opts.size() > 1) ++multi;
            }
    }
    CHECK(moves > 0);
    CHECK(multi > 0);
}

TEST_CASE("solve_flattening") {
    GluingFile g = read_gluing_file(fixture_path());
    Flattening paper{{0, 1, 0, 0}, {1, 0, 1, 1}, {0, 0, 0, 0}};
    CHECK(g.has_flattening);
    CHECK(g.flattening == paper);
    CHECK(is_flattening(g.data, paper));
    Flattening s = solve_flattening(g.data);
    CHECK(is_flattening(g.data, s));
    for (int j = 0; j < 4; ++j) CHECK(s.f[j] + s.fp[j] + s.fpp[j] == 1);

    for (const OpenDiagram& d : sweep_diagrams(7)) {
        GluingData gd = gluing_data(collapse(octahedral_decomposition(d)));
        CHECK(is_flattening(gd, solve_flattening(gd)));
    }

    GluingData bad;
    bad.N = 1;
    bad.G = {{3}};
    bad.Gp = {{3}};
    bad.Gpp = {{3}};
    bad.C = {1};
    bad.Cp = {0};
    bad.Cpp = {0};
    bad.replaced_row = 0;
    CHECK_THROWS_AS(solve_flattening(bad), NoIntegerSolution);
}

TEST_CASE("flattening arithmetic") {
    Flattening a{{1, 0}, {0, 1}, {0, 0}}, b{{0, 0}, {1, 0}, {0, 1}};
    CHECK(a + b - b == a);
    CHECK(Flattening::zero(2) == Flattening{{0, 0}, {0, 0}, {0, 0}});
}

TEST_CASE("gluing JSON") {
    GluingFile g = read_gluing_file(fixture_path());
    CHECK(g.data.N == 4);
    CHECK(g.data.replaced_row == 3);
    CHECK(g.shapes.size() == 4);
    GluingFile back = parse_gluing_json(gluing_to_json(g));
    CHECK(back.data.G == g.data.G);
    CHECK(back.data.Gp == g.data.Gp);
    CHECK(back.data.Gpp == g.data.Gpp);
    CHECK(back.data.C == g.data.C);
    CHECK(back.data.Cp == g.data.Cp);
    CHECK(back.data.Cpp == g.data.Cpp);
    CHECK(back.shapes == g.shapes);
    CHECK(back.flattening == g.flattening);
    CHECK(gluing_to_json(back) == gluing_to_json(g));

    for (int j = 0; j < 4; ++j) {
        int s = 0;
        for (int i = 0; i < 4; ++i) s += g.data.G[i][j] + g.data.Gp[i][j] + g.data.Gpp[i][j];
        CHECK(s == 6);
    }

    auto j = nlohmann::json::parse(gluing_to_json(g));
    auto broken = [&](auto edit) {
        auto k = j;
        edit(k);
        return k.dump();
    };
    CHECK_THROWS_AS(parse_gluing_json("{"), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json("[1,2]"), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k.erase("G"); })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["N"] = 5; })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["N"] = "4"; })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["Gp"][1] = {1, 2}; })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["G"][0][0] = 1.5; })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["meridian"].erase("Cpp"); })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["shapes"].erase(0); })), SchemaError);
    CHECK_THROWS_AS(parse_gluing_json(broken([](auto& k) { k["flattening"]["f"] = 3; })), SchemaError);
    CHECK_NOTHROW(parse_gluing_json(broken([](auto& k) {
        k.erase("shapes");
        k.erase("flattening");
    })));
    CHECK_THROWS_AS(read_gluing_file("/nonexistent/gluing.json"), IoError);
}
