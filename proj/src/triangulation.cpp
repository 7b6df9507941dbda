#include "knotloop/triangulation.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <tuple>

#include <boost/multiprecision/cpp_int.hpp>

#include "knotloop/errors.hpp"
#include "knotloop/regions.hpp"

namespace knotloop {

char type_char(EdgeType t) {
    switch (t) {
        case EdgeType::C: return 'C';
        case EdgeType::R: return 'R';
        case EdgeType::O: return 'O';
        case EdgeType::U: return 'U';
    }
    return '?';
}

std::string to_string(const EdgeLabel& e) { return std::string(1, type_char(e.type)) + std::to_string(e.index); }

int pair_slot(int p, int q) {
    for (int k = 0; k < 6; ++k)
        if ((kPairs[k][0] == p && kPairs[k][1] == q) || (kPairs[k][0] == q && kPairs[k][1] == p)) return k;
    throw Degenerate("not a vertex pair");
}

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int a) {
        while (p[a] != a) a = p[a] = p[p[a]];
        return a;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

// Union-find over edge labels, created on demand.
struct LabelUnion {
    std::map<EdgeLabel, EdgeLabel> parent;
    EdgeLabel find(EdgeLabel a) {
        auto it = parent.find(a);
        if (it == parent.end()) {
            parent[a] = a;
            return a;
        }
        while (!(parent[a] == a)) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(EdgeLabel a, EdgeLabel b) {
        EdgeLabel ra = find(a), rb = find(b);
        if (!(ra == rb)) parent[ra] = rb;
    }
};

EdgeEnd crossing_end(const Edge& e) { return e.a.crossing >= 0 ? e.a : e.b; }

}  // namespace

std::vector<int> OctahedralComplex::regions_of_edge(int e) const {
    std::set<int> out;
    for (size_t r = 0; r < regions.size(); ++r)
        for (int x : regions[r].edges)
            if (x == e) out.insert(int(r));
    return {out.begin(), out.end()};
}

namespace {

int remap_edge(const OpenDiagram& d, int e) { return e == d.bottom_edge ? d.top_edge : e; }

int face_classes(const OctahedralComplex& O, std::vector<int>* root_of_slot) {
    const int T = int(O.tets.size());
    UnionFind uf(6 * T);
    auto glue = [&](const FacePairing& fp) {
        for (int x = 0; x < 3; ++x)
            for (int y = x + 1; y < 3; ++y)
                uf.unite(6 * fp.tet1 + pair_slot(fp.verts1[x], fp.verts1[y]),
                         6 * fp.tet2 + pair_slot(fp.verts2[x], fp.verts2[y]));
    };
    for (const auto& fp : O.pairings) glue(fp);
    std::set<int> roots;
    for (int i = 0; i < 6 * T; ++i) roots.insert(uf.find(i));
    if (root_of_slot) {
        root_of_slot->resize(6 * T);
        for (int i = 0; i < 6 * T; ++i) (*root_of_slot)[i] = uf.find(i);
    }
    return int(roots.size());
}

}  // namespace

OctahedralComplex octahedral_decomposition(const OpenDiagram& d) {
    if (!d.labeled) throw Degenerate("diagram is not labeled");
    OctahedralComplex O;
    O.diagram = d;
    O.corners = all_corners(d);
    const int n = d.n();
    const int m = int(d.visits.size());

    O.edges = d.edges;
    O.alive.assign(d.edges.size(), true);
    O.alive[d.bottom_edge] = false;
    O.edges[d.top_edge] = Edge{crossing_end(d.edges[d.top_edge]), crossing_end(d.edges[d.bottom_edge]), false};
    O.cut = d.top_edge;
    O.regions = trace_regions(O.edges, O.alive);
    O.region_of_corner.assign(4 * n, -1);
    for (size_t r = 0; r < O.regions.size(); ++r)
        for (auto [t, pos] : O.regions[r].corners) O.region_of_corner[4 * t + pos] = int(r);

    for (int i = 0; i < m; ++i) {
        if (d.visits[i].over != (i % 2 == 1)) throw Degenerate("strand does not alternate");
        O.seg_after.push_back(remap_edge(d, d.crossings[d.visits[i].crossing].edge[d.visits[i].out_half]));
    }
    O.over_arc.assign(d.edges.size(), -1);
    O.under_arc.assign(d.edges.size(), -1);
    for (int i = 0, k = -1; i < m; ++i) {
        if (!d.visits[i].over) ++k;
        O.over_arc[O.seg_after[i]] = k;
    }
    for (int i = 0, k = -1; i < m; ++i) {
        if (d.visits[i].over) ++k;
        O.under_arc[O.seg_after[i]] = ((k % n) + n) % n;
    }
    O.over_through.assign(n, -1);
    O.under_through.assign(n, -1);
    for (int i = 0; i < m; ++i) {
        const Visit& v = d.visits[i];
        int in = remap_edge(d, d.crossings[v.crossing].edge[v.in_half]);
        if (v.over) {
            O.over_through[v.crossing] = O.over_arc[O.seg_after[i]];
            if (O.over_arc[in] != O.over_through[v.crossing]) throw Degenerate("over-arc breaks at an overpass");
        } else {
            O.under_through[v.crossing] = O.under_arc[O.seg_after[i]];
            if (O.under_arc[in] != O.under_through[v.crossing]) throw Degenerate("under-arc breaks at an underpass");
        }
    }

    for (int t = 0; t < n; ++t) {
        const Crossing& c = d.crossings[t];
        for (int pos = 0; pos < 4; ++pos) {
            OctaTet tet;
            tet.crossing = t;
            tet.pos = pos;
            tet.edges[pair_slot(VT, VB)] = {EdgeType::C, t};
            tet.edges[pair_slot(VA, VBb)] = {EdgeType::R, O.region_of_corner[4 * t + pos]};
            for (auto [name, h] : {std::pair{int(VA), pos}, std::pair{int(VBb), (pos + 1) % 4}}) {
                int seg = remap_edge(d, c.edge[h]);
                if (!c.over[h]) {
                    tet.edges[pair_slot(VT, name)] = {EdgeType::O, O.over_through[t]};
                    tet.edges[pair_slot(VB, name)] = {EdgeType::O, O.over_arc[seg]};
                } else {
                    tet.edges[pair_slot(VT, name)] = {EdgeType::U, O.under_arc[seg]};
                    tet.edges[pair_slot(VB, name)] = {EdgeType::U, O.under_through[t]};
                }
            }
            O.tets.push_back(tet);
        }
    }

    // Each face is named by its missing vertex.
    std::vector<std::array<int, 4>> used(4 * n, std::array<int, 4>{0, 0, 0, 0});
    auto add = [&](int t1, std::array<int, 3> v1, int missing1, int t2, std::array<int, 3> v2, int missing2,
                   bool internal) {
        used[t1][missing1]++;
        used[t2][missing2]++;
        O.pairings.push_back({t1, v1, t2, v2, internal});
    };
    for (int t = 0; t < n; ++t)
        for (int h = 0; h < 4; ++h)
            add(4 * t + (h + 3) % 4, {VT, VB, VBb}, VA, 4 * t + h, {VT, VB, VA}, VBb, true);
    for (size_t e = 0; e < O.edges.size(); ++e) {
        if (!O.alive[e]) continue;
        const Edge& ed = O.edges[e];
        for (auto [p, q] : {std::pair{ed.a, ed.b}, std::pair{ed.b, ed.a}}) {
            if (p.crossing < 0 || q.crossing < 0) throw Degenerate("closure has an open end");
            if (d.crossings[p.crossing].over[p.half] || !d.crossings[q.crossing].over[q.half]) continue;
            struct Side {
                int corner, name, other;
            };
            auto sides = [&](EdgeEnd x) {
                return std::array<Side, 2>{Side{x.half, VA, VBb}, Side{(x.half + 3) % 4, VBb, VA}};
            };
            for (const Side& s1 : sides(p)) {
                int tet1 = 4 * p.crossing + s1.corner;
                int r = O.region_of_corner[tet1];
                Side s2{};
                int count = 0;
                for (const Side& cand : sides(q))
                    if (O.region_of_corner[4 * q.crossing + cand.corner] == r) {
                        s2 = cand;
                        ++count;
                    }
                if (count != 1) throw Degenerate("segment has the same region on both sides");
                // (B, name1, other1) of the lower corner against (T, other2, name2).
                add(tet1, {VB, s1.name, s1.other}, VT, 4 * q.crossing + s2.corner, {VT, s2.other, s2.name}, VB,
                    false);
            }
        }
    }
    for (const auto& u : used)
        for (int k = 0; k < 4; ++k)
            if (u[k] != 1) throw Degenerate("face not paired exactly once");

    std::vector<int> root;
    face_classes(O, &root);
    std::map<int, EdgeLabel> label_of_root;
    std::set<EdgeLabel> labels;
    for (size_t i = 0; i < O.tets.size(); ++i)
        for (int k = 0; k < 6; ++k) {
            EdgeLabel l = O.tets[i].edges[k];
            labels.insert(l);
            auto [it, fresh] = label_of_root.emplace(root[6 * i + k], l);
            if (!fresh && !(it->second == l)) throw Degenerate("face pairings disagree with the edge rules");
        }
    if (label_of_root.size() != labels.size()) throw Degenerate("face pairings disagree with the edge rules");
    return O;
}

int face_pairing_class_count(const OctahedralComplex& O) { return face_classes(O, nullptr); }

int CollapseCounts::formula_tets() const { return 4 * n - n_r1 - n_r2 - 4 * n_u - 4 * n_o + 8; }

int IdealTriangulation::tet_at(int crossing, int pos) const {
    for (int j = 0; j < N(); ++j)
        if (tets[j].crossing == crossing && tets[j].pos == pos) return j;
    return -1;
}

int IdealTriangulation::edge_of_label(const EdgeLabel& l) const {
    auto it = edge_of.find(l);
    return it == edge_of.end() ? -1 : it->second;
}

IdealTriangulation collapse(const OctahedralComplex& O) { return collapse(O, O.cut); }

IdealTriangulation collapse(const OctahedralComplex& O, int s) {
    const OpenDiagram& d = O.diagram;
    const int n = d.n();
    const int m = int(d.visits.size());
    if (s < 0 || s >= int(O.edges.size()) || !O.alive[s]) throw NonAlternatingSegment("not a segment of the closure");

    // Re-root the strand so that s follows the last visit and the first
    // visit is an underpass, reversing direction if needed.
    int i0 = -1;
    for (int i = 0; i < m; ++i)
        if (O.seg_after[i] == s) i0 = i;
    if (i0 < 0) throw NonAlternatingSegment("segment is not on the strand");
    std::vector<Visit> vis(m);
    std::vector<int> seg(m);
    for (int j = 0; j < m; ++j) {
        vis[j] = d.visits[(i0 + 1 + j) % m];
        seg[j] = O.seg_after[(i0 + 1 + j) % m];
    }
    if (vis[0].over) {
        std::vector<Visit> rv(m);
        std::vector<int> rs(m);
        for (int j = 0; j < m; ++j) {
            const Visit& v = vis[m - 1 - j];
            rv[j] = Visit{v.crossing, v.out_half, v.in_half, v.over};
            rs[j] = seg[((m - 2 - j) % m + m) % m];
        }
        vis = rv;
        seg = rs;
    }
    for (int j = 0; j < m; ++j)
        if (vis[j].over != (j % 2 == 1)) throw NonAlternatingSegment("segment is not alternating");

    IdealTriangulation T;
    T.cut = s;
    T.n_vars = d.n_vars;
    const int X = vis[0].crossing, Y = vis[m - 1].crossing, W = vis[1].crossing, Z = vis[m - 2].crossing;
    T.c_w = W;
    T.c_x = X;
    T.c_y = Y;
    T.c_z = Z;
    auto r12 = O.regions_of_edge(s);
    if (r12.size() != 2) throw NonAlternatingSegment("segment borders a single region");
    if (std::set<int>{W, X, Y, Z}.size() != 4 || O.regions[r12[0]].edges.size() < 3 ||
        O.regions[r12[1]].edges.size() < 3)
        throw NonAlternatingSegment("segment needs four distinct crossings around it and no adjacent bigon");
    const int o_arc = O.over_arc[s], u_arc = O.under_arc[s];
    std::set<EdgeLabel> dist = {{EdgeType::R, r12[0]}, {EdgeType::R, r12[1]}, {EdgeType::O, o_arc}, {EdgeType::U, u_arc}};

    LabelUnion uf;
    uf.unite({EdgeType::C, W}, {EdgeType::U, O.under_through[W]});
    uf.unite({EdgeType::C, Z}, {EdgeType::O, O.over_through[Z]});
    for (int r : O.regions_of_edge(seg[0])) uf.unite({EdgeType::R, r}, {EdgeType::O, O.over_through[W]});
    for (int r : O.regions_of_edge(seg[m - 2])) uf.unite({EdgeType::R, r}, {EdgeType::U, O.under_through[Z]});
    for (int r : r12)
        for (int e : O.regions[r].edges)
            if (e != s) uf.unite({EdgeType::O, O.over_arc[e]}, {EdgeType::U, O.under_arc[e]});
    std::set<EdgeLabel> vanish = dist;
    vanish.insert({EdgeType::C, X});
    vanish.insert({EdgeType::C, Y});

    std::vector<const OctaTet*> kept;
    for (const auto& tet : O.tets) {
        bool hit = false;
        for (const auto& l : tet.edges) hit = hit || dist.count(l);
        if (hit) continue;
        for (const auto& l : tet.edges)
            if (vanish.count(l)) throw Degenerate("kept tetrahedron meets a vanishing edge");
        kept.push_back(&tet);
    }

    // Final classes and their members among the kept tetrahedra.
    std::map<EdgeLabel, std::set<EdgeLabel>> classes;
    for (const auto* tet : kept)
        for (const auto& l : tet->edges) classes[uf.find(l)].insert(l);
    auto class_type = [](const std::set<EdgeLabel>& mem) {
        bool r = false;
        for (const auto& l : mem) {
            if (l.type == EdgeType::O || l.type == EdgeType::U) {
                bool has_o = false;
                for (const auto& x : mem) has_o = has_o || x.type == EdgeType::O;
                return has_o ? EdgeType::O : EdgeType::U;
            }
            r = r || l.type == EdgeType::R;
        }
        return r ? EdgeType::R : EdgeType::C;
    };
    struct Final {
        int group;
        EdgeLabel key;
        EdgeLabel root;
        EdgeType type;
    };
    std::vector<Final> finals;
    for (const auto& [root, mem] : classes) {
        EdgeType ty = class_type(mem);
        int group = (ty == EdgeType::O || ty == EdgeType::U) ? 0 : ty == EdgeType::C ? 1 : 2;
        EdgeLabel key{EdgeType::U, 1 << 30};
        for (const auto& l : mem) {
            bool relevant = group == 0 ? (l.type == EdgeType::O || l.type == EdgeType::U)
                                       : (group == 1 ? l.type == EdgeType::C : l.type == EdgeType::R);
            if (relevant) {
                auto rank = [](const EdgeLabel& x) { return std::pair{x.type == EdgeType::U ? 1 : 0, x.index}; };
                if (key.index == (1 << 30) || rank(l) < rank(key)) key = l;
            }
        }
        finals.push_back({group, key, root, ty});
    }
    std::sort(finals.begin(), finals.end(), [](const Final& a, const Final& b) {
        if (a.group != b.group) return a.group < b.group;
        if (a.key.type != b.key.type) return a.key.type == EdgeType::O;
        return a.key.index < b.key.index;
    });
    std::map<EdgeLabel, int> edge_of_root;
    for (size_t i = 0; i < finals.size(); ++i) {
        edge_of_root[finals[i].root] = int(i);
        T.edge_type.push_back(finals[i].type);
        const auto& mem = classes[finals[i].root];
        T.members.emplace_back(mem.begin(), mem.end());
    }
    auto add_label = [&](EdgeLabel l) {
        if (vanish.count(l)) return;
        auto it = edge_of_root.find(uf.find(l));
        if (it != edge_of_root.end()) T.edge_of[l] = it->second;
    };
    for (int i = 0; i < n; ++i) {
        add_label({EdgeType::C, i});
        add_label({EdgeType::O, i});
        add_label({EdgeType::U, i});
    }
    for (int r = 0; r < int(O.regions.size()); ++r) add_label({EdgeType::R, r});

    for (const auto* tet : kept) {
        TriTet tt;
        tt.crossing = tet->crossing;
        tt.pos = tet->pos;
        tt.label = tet->edges;
        for (int k = 0; k < 6; ++k) tt.edge[k] = edge_of_root.at(uf.find(tet->edges[k]));
        tt.shape_exponents = O.corners[4 * tet->crossing + tet->pos].shape_exponents;
        tt.type = d.crossings[tet->crossing].type;
        tt.row = d.crossings[tet->crossing].row;
        T.tets.push_back(tt);
    }

    CollapseCounts& c = T.counts;
    c.n = n;
    for (size_t e = 0; e < O.edges.size(); ++e) {
        if (!O.alive[e]) continue;
        c.n_o += O.over_arc[e] == o_arc;
        c.n_u += O.under_arc[e] == u_arc;
    }
    c.n_r1 = int(O.regions[r12[0]].edges.size());
    c.n_r2 = int(O.regions[r12[1]].edges.size());
    c.removed_tets = 4 * n - int(kept.size());
    std::set<EdgeLabel> present;
    for (const auto* tet : kept)
        for (const auto& l : tet->edges) present.insert(l);
    int n_c = 0, n_r = 0, n_ou = 0, p_o = 0, p_u = 0;
    for (const auto& f : finals) {
        n_c += f.type == EdgeType::C;
        n_r += f.type == EdgeType::R;
        n_ou += f.group == 0;
    }
    for (const auto& l : present) {
        p_o += l.type == EdgeType::O;
        p_u += l.type == EdgeType::U;
    }
    c.removed_c = n - n_c;
    c.removed_r = int(O.regions.size()) - n_r;
    c.removed_o = n - p_o;
    c.removed_u = n - p_u;
    c.ou_merges = p_o + p_u - n_ou;

    for (int i = 0; i < m; ++i) {
        int prev = seg[(i + m - 1) % m], next = seg[i];
        EdgeLabel a1 = vis[i].over ? EdgeLabel{EdgeType::U, O.under_arc[prev]} : EdgeLabel{EdgeType::O, O.over_arc[prev]};
        EdgeLabel a2 = vis[i].over ? EdgeLabel{EdgeType::U, O.under_arc[next]} : EdgeLabel{EdgeType::O, O.over_arc[next]};
        int e1 = T.edge_of_label(a1), e2 = T.edge_of_label(a2);
        if (e1 < 0 || e2 < 0 || e1 == e2) continue;
        T.arc_steps.push_back({vis[i].crossing, e1, e2});
    }
    return T;
}

Flattening Flattening::zero(int N) {
    return Flattening{std::vector<int>(N, 0), std::vector<int>(N, 0), std::vector<int>(N, 0)};
}

Flattening Flattening::operator+(const Flattening& o) const {
    Flattening r = *this;
    for (size_t j = 0; j < f.size(); ++j) {
        r.f[j] += o.f[j];
        r.fp[j] += o.fp[j];
        r.fpp[j] += o.fpp[j];
    }
    return r;
}

Flattening Flattening::operator-(const Flattening& o) const {
    Flattening r = *this;
    for (size_t j = 0; j < f.size(); ++j) {
        r.f[j] -= o.f[j];
        r.fp[j] -= o.fp[j];
        r.fpp[j] -= o.fpp[j];
    }
    return r;
}

std::vector<int> pairing(const GluingData& gd, const Flattening& fl) {
    std::vector<int> p(gd.N, 0);
    for (int i = 0; i < gd.N; ++i)
        for (int j = 0; j < gd.N; ++j) p[i] += gd.G[i][j] * fl.f[j] + gd.Gp[i][j] * fl.fp[j] + gd.Gpp[i][j] * fl.fpp[j];
    return p;
}

bool is_flattening(const GluingData& gd, const Flattening& fl) {
    if (int(fl.f.size()) != gd.N || int(fl.fp.size()) != gd.N || int(fl.fpp.size()) != gd.N) return false;
    for (int j = 0; j < gd.N; ++j)
        if (fl.f[j] + fl.fp[j] + fl.fpp[j] != 1) return false;
    for (int v : pairing(gd, fl))
        if (v != 2) return false;
    return true;
}

namespace {

using boost::multiprecision::cpp_rational;

int rational_rank(std::vector<std::vector<cpp_rational>> A) {
    int rank = 0;
    const int rows = int(A.size());
    const int cols = rows ? int(A[0].size()) : 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int p = -1;
        for (int r = rank; r < rows; ++r)
            if (A[r][c] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(A[p], A[rank]);
        for (int r = rank + 1; r < rows; ++r) {
            if (A[r][c] == 0) continue;
            cpp_rational k = A[r][c] / A[rank][c];
            for (int cc = c; cc < cols; ++cc) A[r][cc] -= k * A[rank][cc];
        }
        ++rank;
    }
    return rank;
}

}  // namespace

CREliminations cr_eliminations(const IdealTriangulation& T, const GluingData& gd) {
    CREliminations el;
    for (int i = 0; i < gd.N; ++i) {
        if (T.edge_type[i] == EdgeType::C) {
            int pick = -1, count = 0;
            for (int j = 0; j < gd.N; ++j)
                if (gd.G[i][j] > 0 && T.tets[j].pos == CornerPos::S) {
                    pick = j;
                    ++count;
                }
            if (count != 1) throw EliminationCycle("C edge without a unique S corner");
            el.c_edges.push_back(i);
            el.c_tets.push_back(pick);
        }
    }
    for (int i = 0; i < gd.N; ++i) {
        if (T.edge_type[i] != EdgeType::R) continue;
        int pick = -1;
        for (int j = 0; j < gd.N; ++j) {
            if (gd.G[i][j] <= 0 || T.tets[j].pos != CornerPos::N) continue;
            if (pick < 0 || std::pair{T.tets[j].row, T.tets[j].crossing} > std::pair{T.tets[pick].row, T.tets[pick].crossing})
                pick = j;
        }
        if (pick < 0) throw EliminationCycle("R edge without an N corner");
        el.r_edges.push_back(i);
        el.r_tets.push_back(pick);
    }
    return el;
}

GluingData gluing_data(const IdealTriangulation& T) {
    GluingData gd;
    gd.N = T.N();
    if (int(T.edge_type.size()) != gd.N) throw Degenerate("edge count differs from tetrahedron count");
    gd.G.assign(gd.N, std::vector<int>(gd.N, 0));
    gd.Gp = gd.G;
    gd.Gpp = gd.G;
    for (int j = 0; j < gd.N; ++j)
        for (int k = 0; k < 6; ++k) {
            IntMatrix& M = slot_quad(k) == 0 ? gd.G : slot_quad(k) == 1 ? gd.Gp : gd.Gpp;
            M[T.tets[j].edge[k]][j] += 1;
        }
    gd.edge_type = T.edge_type;
    gd.C.assign(gd.N, 0);
    gd.Cp.assign(gd.N, 0);
    gd.Cpp.assign(gd.N, 0);
    gd.replaced_row = last_c_row(gd);
    auto cands = meridian_candidates(T, gd);
    if (cands.empty()) throw Degenerate("no meridian candidate");
    return with_meridian(gd, cands.front());
}

GluingData with_meridian(const GluingData& gd, const MeridianCandidate& m) {
    GluingData r = gd;
    r.C.assign(gd.N, 0);
    r.Cp.assign(gd.N, 0);
    r.Cpp.assign(gd.N, 0);
    r.C[m.i1] -= 1;
    r.C[m.i2] += 1;
    return r;
}

int last_c_row(const GluingData& gd) {
    for (int i = int(gd.edge_type.size()) - 1; i >= 0; --i)
        if (gd.edge_type[i] == EdgeType::C) return i;
    return gd.N - 1;
}

std::vector<MeridianCandidate> meridian_candidates(const IdealTriangulation& T, const GluingData& gd) {
    const int N = T.N();
    std::vector<std::vector<cpp_rational>> base;
    for (int i = 0; i < N; ++i) {
        if (T.edge_type[i] != EdgeType::C && T.edge_type[i] != EdgeType::R) continue;
        std::vector<cpp_rational> row(3 * N);
        for (int j = 0; j < N; ++j) {
            row[j] = gd.G[i][j];
            row[N + j] = gd.Gp[i][j];
            row[2 * N + j] = gd.Gpp[i][j];
        }
        base.push_back(row);
    }
    const int r0 = rational_rank(base);
    std::vector<MeridianCandidate> out;
    for (int i1 = 0; i1 < N; ++i1)
        for (int i2 = i1 + 1; i2 < N; ++i2) {
            if (T.tets[i1].shape_exponents != T.tets[i2].shape_exponents) continue;
            auto ext = base;
            std::vector<cpp_rational> row(3 * N);
            row[i1] = -1;
            row[i2] = 1;
            ext.push_back(row);
            if (rational_rank(ext) > r0) out.push_back({i1, i2});
        }
    std::set<int> taken;
    try {
        auto el = cr_eliminations(T, gd);
        taken.insert(el.c_tets.begin(), el.c_tets.end());
        taken.insert(el.r_tets.begin(), el.r_tets.end());
    } catch (const EliminationCycle&) {
    }
    std::stable_sort(out.begin(), out.end(), [&](const MeridianCandidate& a, const MeridianCandidate& b) {
        auto key = [&](const MeridianCandidate& c) {
            bool free = !(taken.count(c.i1) && taken.count(c.i2));
            return std::tuple{free, T.tets[c.i2].row, T.tets[c.i1].row};
        };
        return key(a) > key(b);
    });
    return out;
}

namespace {

// Zero-sum triples in {-1,0,1}^3 other than zero.
const std::vector<std::array<int, 3>>& move_triples() {
    static const std::vector<std::array<int, 3>> t = [] {
        std::vector<std::array<int, 3>> v;
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b) {
                int c = -a - b;
                if (c < -1 || c > 1 || (a == 0 && b == 0)) continue;
                v.push_back({a, b, c});
            }
        return v;
    }();
    return t;
}

std::vector<int> effect_of(const GluingData& gd, int j, const std::array<int, 3>& a) {
    std::vector<int> e(gd.N);
    for (int i = 0; i < gd.N; ++i) e[i] = gd.G[i][j] * a[0] + gd.Gp[i][j] * a[1] + gd.Gpp[i][j] * a[2];
    return e;
}

// Every move on two tetrahedra from tets with effect -1 at src, +1 at dst.
std::vector<Flattening> pair_moves(const GluingData& gd, const std::vector<std::pair<int, int>>& tet_pairs, int src,
                                   int dst) {
    std::vector<Flattening> out;
    std::vector<int> target(gd.N, 0);
    target[src] -= 1;
    target[dst] += 1;
    for (auto [j1, j2] : tet_pairs)
        for (const auto& a : move_triples()) {
            auto ea = effect_of(gd, j1, a);
            for (const auto& b : move_triples()) {
                auto eb = effect_of(gd, j2, b);
                bool ok = true;
                for (int i = 0; i < gd.N && ok; ++i) ok = ea[i] + eb[i] == target[i];
                if (!ok) continue;
                Flattening g = Flattening::zero(gd.N);
                g.f[j1] = a[0];
                g.fp[j1] = a[1];
                g.fpp[j1] = a[2];
                g.f[j2] = b[0];
                g.fp[j2] = b[1];
                g.fpp[j2] = b[2];
                out.push_back(g);
            }
        }
    return out;
}

}  // namespace

ExplicitFlattening explicit_flattening(const IdealTriangulation& T, const GluingData& gd) {
    const int N = T.N();
    ExplicitFlattening ef;
    ef.pre = Flattening::zero(N);
    for (int j = 0; j < N; ++j) {
        const TriTet& t = T.tets[j];
        if (t.pos == CornerPos::N || t.pos == CornerPos::S)
            ef.pre.f[j] = 1;
        else if (t.type > 0)
            ef.pre.fp[j] = 1;
        else
            ef.pre.fpp[j] = 1;
    }
    ef.pre_pairing = pairing(gd, ef.pre);
    ef.u_inf = T.edge_of_label({EdgeType::C, T.c_w});
    ef.o_zero = T.edge_of_label({EdgeType::C, T.c_z});

    std::vector<int> surplus, deficit;
    int total_dev = 0;
    bool ok = ef.u_inf >= 0 && ef.o_zero >= 0;
    for (int i = 0; i < N; ++i) {
        int p = ef.pre_pairing[i];
        for (int k = 2; k < p; ++k) surplus.push_back(i);
        for (int k = p; k < 2; ++k) deficit.push_back(i);
        int dev = p - 2 - (i == ef.u_inf) - (i == ef.o_zero);
        total_dev += dev;
        bool ou = T.edge_type[i] == EdgeType::O || T.edge_type[i] == EdgeType::U;
        if (dev > 0 || (dev < 0 && !ou)) ok = false;
    }
    ef.deficit_edges = deficit;
    ef.pre_pattern_ok = ok && total_dev == -2;

    struct Arc {
        int to, crossing;
        std::vector<Flattening> moves;
    };
    std::map<int, std::vector<Arc>> graph;
    for (const ArcStep& a : T.arc_steps) {
        std::vector<int> at;
        for (int j = 0; j < N; ++j)
            if (T.tets[j].crossing == a.crossing) at.push_back(j);
        std::vector<std::pair<int, int>> pairs;
        for (size_t x = 0; x < at.size(); ++x)
            for (size_t y = x + 1; y < at.size(); ++y) pairs.push_back({at[x], at[y]});
        for (auto [u, w] : {std::pair{a.from, a.to}, std::pair{a.to, a.from}}) {
            auto mv = pair_moves(gd, pairs, u, w);
            if (!mv.empty()) graph[u].push_back({w, a.crossing, std::move(mv)});
        }
    }

    ef.g = Flattening::zero(N);
    for (size_t k = 0; k < std::min(surplus.size(), deficit.size()); ++k) {
        int src = surplus[k], dst = deficit[k];
        std::map<int, std::pair<int, const Arc*>> prev;
        prev[src] = {-1, nullptr};
        std::deque<int> q{src};
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            if (u == dst) break;
            for (const Arc& a : graph[u])
                if (!prev.count(a.to)) {
                    prev[a.to] = {u, &a};
                    q.push_back(a.to);
                }
        }
        if (!prev.count(dst)) throw FlatteningFailure("no transfer path between arcs");
        std::vector<TransferStep> path;
        for (int w = dst; prev[w].second; w = prev[w].first) {
            const Arc* a = prev[w].second;
            ef.g = ef.g + a->moves.front();
            path.push_back({prev[w].first, w, a->crossing, a->moves});
        }
        ef.steps.insert(ef.steps.end(), path.rbegin(), path.rend());
    }
    ef.total = ef.pre + ef.g;
    if (!is_flattening(gd, ef.total)) throw FlatteningFailure("transferred triple is not a flattening");
    return ef;
}

Flattening solve_flattening(const GluingData& gd) {
    const int N = gd.N;
    BigMatrix A(2 * N, BigVec(3 * N, 0));
    BigVec b(2 * N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            A[i][j] = gd.G[i][j];
            A[i][N + j] = gd.Gp[i][j];
            A[i][2 * N + j] = gd.Gpp[i][j];
        }
        b[i] = 2;
        A[N + i][i] = A[N + i][N + i] = A[N + i][2 * N + i] = 1;
        b[N + i] = 1;
    }
    BigVec x;
    try {
        x = solve_integer_affine(A, b);
    } catch (const Infeasible& e) {
        throw NoIntegerSolution(e.what());
    }
    Flattening fl = Flattening::zero(N);
    for (int j = 0; j < N; ++j) {
        fl.f[j] = x[j].convert_to<int>();
        fl.fp[j] = x[N + j].convert_to<int>();
        fl.fpp[j] = x[2 * N + j].convert_to<int>();
    }
    if (!is_flattening(gd, fl)) throw NoIntegerSolution("lattice solution does not satisfy the system");
    return fl;
}

std::vector<Flattening> region_transfer_options(const OctahedralComplex& O, const IdealTriangulation& T,
                                                const GluingData& gd, int ri, int rj) {
    int ei = T.edge_of_label({EdgeType::R, ri}), ej = T.edge_of_label({EdgeType::R, rj});
    if (ei < 0 || ej < 0 || ei == ej) return {};
    std::vector<Flattening> out;
    const auto& rei = O.regions.at(ri).edges;
    const auto& rej = O.regions.at(rj).edges;
    std::set<int> shared;
    for (int e : rei)
        if (std::find(rej.begin(), rej.end(), e) != rej.end()) shared.insert(e);
    for (int e : shared)
        for (EdgeEnd x : {O.edges[e].a, O.edges[e].b}) {
            int c1 = x.half, c2 = (x.half + 3) % 4;
            int j1 = T.tet_at(x.crossing, c1), j2 = T.tet_at(x.crossing, c2);
            if (j1 < 0 || j2 < 0) continue;
            std::set<int> rs = {O.region_of_corner[4 * x.crossing + c1], O.region_of_corner[4 * x.crossing + c2]};
            if (rs != std::set<int>{ri, rj}) continue;
            auto mv = pair_moves(gd, {{std::min(j1, j2), std::max(j1, j2)}}, ei, ej);
            out.insert(out.end(), mv.begin(), mv.end());
        }
    return out;
}

Flattening transfer_region(const OctahedralComplex& O, const IdealTriangulation& T, const GluingData& gd,
                           const Flattening& f, int ri, int rj, int choice) {
    auto opts = region_transfer_options(O, T, gd, ri, rj);
    if (opts.empty()) throw FlatteningFailure("no corner pair transfers between these regions");
    if (choice < 0 || choice >= int(opts.size())) throw FlatteningFailure("transfer choice out of range");
    return f + opts[choice];
}

}  // namespace knotloop
