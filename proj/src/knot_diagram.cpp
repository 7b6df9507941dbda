#include "knotloop/knot_diagram.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "knotloop/errors.hpp"
#include "knotloop/regions.hpp"

namespace knotloop {

TwistVector parse_twists(const std::string& text) {
    TwistVector t;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw InvalidTwist("cannot parse twist entry '" + item + "'");
        }
        if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
            throw InvalidTwist("cannot parse twist entry '" + item + "'");
        t.entries.push_back(v);
    }
    if (t.entries.empty()) throw InvalidTwist("empty twist vector");
    return t;
}

std::string to_string(const TwistVector& t) {
    std::string s;
    for (size_t i = 0; i < t.entries.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(t.entries[i]);
    }
    return s;
}

std::pair<long long, long long> fraction_of(const TwistVector& t) {
    // [a_k] = a_k/1; [a_i, rest] = a_i + 1/rest
    long long p = 1, q = 0;
    for (auto it = t.entries.rbegin(); it != t.entries.rend(); ++it) {
        long long a = std::llabs(*it);
        long long np = a * p + q;
        q = p;
        p = np;
    }
    return {p, q};
}

TwistVector twists_from_fraction(long long p, long long q) {
    if (p <= 0 || q == 0) throw InvalidTwist("fraction needs p > 0 and q != 0");
    q %= p;
    if (q < 0) q += p;
    if (q == 0 || std::gcd(p, q) != 1)
        throw InvalidTwist("fraction p/q must have coprime q not divisible by p");
    TwistVector t;
    long long a = p, b = q;
    while (b != 0) {
        t.entries.push_back(int(a / b));
        long long r = a % b;
        a = b;
        b = r;
    }
    if (t.entries.size() % 2 == 1) {
        if (t.entries.back() > 1) {
            t.entries.back() -= 1;
            t.entries.push_back(1);
        } else if (t.entries.size() > 1) {
            t.entries.pop_back();
            t.entries.back() += 1;
        }
    }
    return t;
}

bool is_torus_fraction(long long p, long long q) {
    if (p <= 1) return true;
    long long r = ((q % p) + p) % p;
    return r == 1 || r == p - 1;
}

char corner_name(int pos) { return "NWSE"[pos & 3]; }

std::string to_string(const SegmentLabel& l) {
    switch (l.kind) {
        case LabelKind::Const0: return "0";
        case LabelKind::Const1: return "1";
        case LabelKind::ConstInf: return "inf";
        case LabelKind::Var: return "x" + std::to_string(l.var + 1);
    }
    return "?";
}

namespace {

int up_half(const Crossing& c, int q) { return c.left == q ? NW : NE; }
int down_half(const Crossing& c, int q) { return c.left == q ? SW : SE; }

const std::array<std::array<int, 2>, 4> kDir = {{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

}  // namespace

OpenDiagram build_two_bridge(const TwistVector& twists) {
    const auto& a = twists.entries;
    for (int v : a)
        if (v == 0) throw InvalidTwist("twist entries must be nonzero");
    if (a.size() < 2) throw NotHyperbolic("a single twist box gives a (2,b) torus knot");
    const bool mirrored = a[0] < 0;
    for (int v : a)
        if ((v < 0) != mirrored)
            throw InvalidTwist("mixed signs do not give an alternating diagram");

    OpenDiagram d;
    d.twists = twists;
    d.mirrored = mirrored;
    auto reflect = [&](int q) { return mirrored ? 4 - q : q; };

    for (size_t i = 0; i < a.size(); ++i) {
        int left = (i % 2 == 0) ? 2 : 1;
        if (mirrored) left = 3 - left;
        for (int r = 0; r < std::abs(a[i]); ++r) {
            Crossing c;
            c.row = int(d.crossings.size());
            c.left = left;
            d.crossings.push_back(c);
        }
    }
    const int n = d.n();
    const bool odd = a.size() % 2 == 1;
    const int top_pos = reflect(3);
    const std::array<int, 2> cap = {reflect(1), reflect(2)};
    const int bottom_pos = reflect(odd ? 3 : 1);
    const std::array<int, 2> cup = odd ? std::array<int, 2>{reflect(1), reflect(2)}
                                       : std::array<int, 2>{reflect(2), reflect(3)};

    std::map<int, std::vector<int>> at;  // strand position -> crossings, top to bottom
    for (int t = 0; t < n; ++t)
        for (int q : {d.crossings[t].left, d.crossings[t].left + 1}) at[q].push_back(t);

    auto add_edge = [&](EdgeEnd x, EdgeEnd y, bool end) {
        d.edges.push_back({x, y, end});
        return int(d.edges.size()) - 1;
    };
    auto up = [&](int q, bool first) {
        int t = first ? at[q].front() : at[q].back();
        return EdgeEnd{t, up_half(d.crossings[t], q)};
    };
    auto down = [&](int q) {
        int t = at[q].back();
        return EdgeEnd{t, down_half(d.crossings[t], q)};
    };
    for (int q = 1; q <= 3; ++q) {
        const auto& ts = at[q];
        for (size_t i = 0; i + 1 < ts.size(); ++i)
            add_edge({ts[i], down_half(d.crossings[ts[i]], q)},
                     {ts[i + 1], up_half(d.crossings[ts[i + 1]], q)}, false);
    }
    add_edge(up(cap[0], true), up(cap[1], true), false);
    d.top_edge = add_edge({-1, -1}, up(top_pos, true), true);
    add_edge(down(cup[0]), down(cup[1]), false);
    d.bottom_edge = add_edge(down(bottom_pos), {-2, -1}, true);

    for (int e = 0; e < int(d.edges.size()); ++e)
        for (const EdgeEnd& x : {d.edges[e].a, d.edges[e].b})
            if (x.crossing >= 0) d.crossings[x.crossing].edge[x.half] = e;

    // Walk the strand from the top endpoint.
    auto other_end = [&](int e, EdgeEnd from) {
        return d.edges[e].a == from ? d.edges[e].b : d.edges[e].a;
    };
    d.strand_edges.push_back(d.top_edge);
    EdgeEnd cur = other_end(d.top_edge, {-1, -1});
    while (cur.crossing >= 0) {
        if (int(d.visits.size()) > 2 * n) throw InvalidTwist("strand does not terminate");
        int out = (cur.half + 2) % 4;
        d.visits.push_back({cur.crossing, cur.half, out, d.visits.size() % 2 == 1});
        int e = d.crossings[cur.crossing].edge[out];
        d.strand_edges.push_back(e);
        cur = other_end(e, {cur.crossing, out});
    }
    if (int(d.visits.size()) != 2 * n)
        throw InvalidTwist("twist vector " + to_string(twists) + " describes a link");
    auto [p, q] = fraction_of(twists);
    if (is_torus_fraction(p, q))
        throw NotHyperbolic("twist vector " + to_string(twists) + " gives a torus knot");

    for (const Visit& v : d.visits) {
        Crossing& c = d.crossings[v.crossing];
        if (v.over) c.over[v.in_half] = c.over[v.out_half] = true;
    }
    std::vector<std::array<int, 2>> dir_over(n), dir_under(n);
    for (const Visit& v : d.visits) (v.over ? dir_over : dir_under)[v.crossing] = kDir[v.out_half];
    for (int t = 0; t < n; ++t) {
        Crossing& c = d.crossings[t];
        c.type = c.over[NW] ? 1 : -1;
        const auto& o = dir_over[t];
        const auto& u = dir_under[t];
        c.sign = (o[0] * u[1] - o[1] * u[0]) > 0 ? 1 : -1;
    }

    std::vector<bool> alive(d.edges.size(), true);
    d.regions = trace_regions(d.edges, alive);
    d.region_of_corner.assign(4 * n, -1);
    for (int r = 0; r < int(d.regions.size()); ++r) {
        for (auto [t, pos] : d.regions[r].corners) d.region_of_corner[4 * t + pos] = r;
        for (int e : d.regions[r].edges)
            if (e == d.top_edge) d.unbounded = r;
    }

    const int m = int(d.visits.size());
    d.infinity_segment = d.strand_edges[1];
    d.zero_segment = d.strand_edges[m - 1];
    d.infinity_crossing = d.visits[1].crossing;
    d.zero_crossing = d.visits[m - 2].crossing;
    return d;
}

OpenDiagram label_segments(const OpenDiagram& src) {
    OpenDiagram d = src;
    d.labels.assign(d.edges.size(), std::nullopt);
    for (int e : d.regions[d.unbounded].edges)
        if (!d.edges[e].end_edge) d.labels[e] = SegmentLabel{LabelKind::Const1, -1};
    // Alternating input: exactly one segment before the first overpass from
    // the top (and the first underpass from the bottom).
    d.labels[d.infinity_segment] = SegmentLabel{LabelKind::ConstInf, -1};
    d.labels[d.zero_segment] = SegmentLabel{LabelKind::Const0, -1};
    int k = 0;
    for (int t = d.n() - 1; t >= 0; --t)
        for (int h = 0; h < 4; ++h) {
            int e = d.crossings[t].edge[h];
            if (d.edges[e].end_edge || d.labels[e]) continue;
            d.labels[e] = SegmentLabel{LabelKind::Var, k++};
        }
    d.n_vars = k;
    d.labeled = true;
    return d;
}

std::vector<Corner> all_corners(const OpenDiagram& d) {
    if (!d.labeled) throw InvalidTwist("corners need a labeled diagram");
    std::vector<Corner> out;
    auto exps = [&](const std::optional<SegmentLabel>& l) {
        std::vector<int> v(d.n_vars, 0);
        if (l && l->kind == LabelKind::Var) v[l->var] = 1;
        return v;
    };
    for (int t = 0; t < d.n(); ++t) {
        const Crossing& c = d.crossings[t];
        for (int pos = 0; pos < 4; ++pos) {
            Corner k;
            k.crossing = t;
            k.pos = pos;
            k.edge_prev = c.edge[pos];
            k.edge_next = c.edge[(pos + 1) % 4];
            k.label_prev = d.labels[k.edge_prev];
            k.label_next = d.labels[k.edge_next];
            k.region = d.region_of_corner[4 * t + pos];
            auto bad = [](const std::optional<SegmentLabel>& l) {
                return !l || l->kind == LabelKind::Const0 || l->kind == LabelKind::ConstInf;
            };
            bool both_one = k.label_prev && k.label_next &&
                            k.label_prev->kind == LabelKind::Const1 &&
                            k.label_next->kind == LabelKind::Const1;
            k.essential = !bad(k.label_prev) && !bad(k.label_next) && !both_one;
            auto a = exps(k.label_prev), b = exps(k.label_next);
            k.shape_exponents.resize(d.n_vars);
            for (int i = 0; i < d.n_vars; ++i) k.shape_exponents[i] = a[i] - b[i];
            k.sign = c.over[pos] ? 1 : -1;
            k.potential_exponents = k.shape_exponents;
            if (k.sign < 0)
                for (int& x : k.potential_exponents) x = -x;
            out.push_back(std::move(k));
        }
    }
    return out;
}

std::vector<Corner> essential_corners(const OpenDiagram& d) {
    auto all = all_corners(d);
    std::vector<Corner> out;
    for (auto& c : all)
        if (c.essential) out.push_back(std::move(c));
    return out;
}

nlohmann::json diagram_to_json(const OpenDiagram& d) {
    using nlohmann::json;
    json j;
    j["twists"] = d.twists.entries;
    j["mirrored"] = d.mirrored;
    j["n_vars"] = d.n_vars;
    json cs = json::array();
    for (const auto& c : d.crossings)
        cs.push_back({{"row", c.row}, {"left", c.left}, {"type", c.type}, {"sign", c.sign},
                      {"edges", c.edge}, {"over", c.over}});
    j["crossings"] = cs;
    auto end_json = [](const EdgeEnd& e) -> json {
        if (e.crossing == -1) return "top";
        if (e.crossing == -2) return "bottom";
        return json{{"crossing", e.crossing}, {"half", e.half}};
    };
    json es = json::array();
    for (size_t e = 0; e < d.edges.size(); ++e) {
        json x = {{"id", e}, {"from", end_json(d.edges[e].a)}, {"to", end_json(d.edges[e].b)},
                  {"segment", !d.edges[e].end_edge}};
        if (d.labeled && d.labels[e]) x["label"] = to_string(*d.labels[e]);
        es.push_back(x);
    }
    j["edges"] = es;
    json rs = json::array();
    for (size_t r = 0; r < d.regions.size(); ++r)
        rs.push_back({{"edges", d.regions[r].edges}, {"unbounded", int(r) == d.unbounded}});
    j["regions"] = rs;
    j["strand"] = d.strand_edges;
    j["infinity"] = {{"crossing", d.infinity_crossing}, {"segment", d.infinity_segment}};
    j["zero"] = {{"crossing", d.zero_crossing}, {"segment", d.zero_segment}};
    if (d.labeled) {
        json ks = json::array();
        for (const auto& c : all_corners(d))
            ks.push_back({{"crossing", c.crossing}, {"position", std::string(1, corner_name(c.pos))},
                          {"labels", {c.label_prev ? to_string(*c.label_prev) : "end",
                                      c.label_next ? to_string(*c.label_next) : "end"}},
                          {"essential", c.essential}, {"sign", c.sign},
                          {"shape_exponents", c.shape_exponents}});
        j["corners"] = ks;
    }
    return j;
}

}  // namespace knotloop
