#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace knotloop {

struct TwistVector {
    std::vector<int> entries;
};

TwistVector parse_twists(const std::string& text);  // "4,2"
std::string to_string(const TwistVector& t);

// Continued fraction a1 + 1/(a2 + ...) of |entries|, as (p, q) with p > 0.
std::pair<long long, long long> fraction_of(const TwistVector& t);
// Even-length positive expansion of p/q (p > q > 0 after reduction mod p).
TwistVector twists_from_fraction(long long p, long long q);
// (2, p) torus knots and the unknot: q = +-1 mod p.
bool is_torus_fraction(long long p, long long q);

// Half-edges at a crossing in counter-clockwise order.
enum Half : int { NE = 0, NW = 1, SW = 2, SE = 3 };
// Corner c lies between half c and half c+1.
enum CornerPos : int { N = 0, W = 1, S = 2, E = 3 };
char corner_name(int pos);

enum class LabelKind { Const0, Const1, ConstInf, Var };

struct SegmentLabel {
    LabelKind kind = LabelKind::Const1;
    int var = -1;  // 0-based variable index when kind == Var
    bool operator==(const SegmentLabel&) const = default;
};
std::string to_string(const SegmentLabel& l);

// End of an edge: a crossing half-edge, or one of the two univalent vertices
// (crossing == -1 for the top endpoint, -2 for the bottom one).
struct EdgeEnd {
    int crossing = -1;
    int half = -1;
    bool operator==(const EdgeEnd&) const = default;
};

struct Edge {
    EdgeEnd a, b;
    bool end_edge = false;  // adjacent to a univalent vertex: not a segment
};

struct Crossing {
    int row = 0;   // 0 is the top row
    int left = 1;  // strand positions left, left + 1 cross here
    std::array<int, 4> edge{};
    std::array<bool, 4> over{};  // half-edge belongs to the over strand
    int type = 1;  // +1 if the over strand runs NW-SE, -1 if NE-SW
    int sign = 1;  // oriented sign for the orientation top -> bottom
};

struct Visit {
    int crossing;
    int in_half, out_half;
    bool over;
};

struct Region {
    std::vector<int> edges;                     // boundary walk, may repeat
    std::vector<std::pair<int, int>> corners;   // (crossing, corner position)
};

struct Corner {
    int crossing = 0;
    int pos = 0;
    int edge_prev = 0, edge_next = 0;  // edges of half pos and half pos+1
    std::optional<SegmentLabel> label_prev, label_next;
    bool essential = false;
    int region = -1;
    // Tetrahedron shape z = x_prev / x_next as an exponent vector.
    std::vector<int> shape_exponents;
    // Dilogarithm term sign * Li2(x_over / x_under); the argument is z^sign.
    int sign = 1;
    std::vector<int> potential_exponents;
};

struct OpenDiagram {
    TwistVector twists;
    bool mirrored = false;
    std::vector<Crossing> crossings;
    std::vector<Edge> edges;
    int top_edge = -1, bottom_edge = -1;
    std::vector<Visit> visits;        // along the strand from the top endpoint
    std::vector<int> strand_edges;    // edges in strand order, ends included
    std::vector<Region> regions;
    int unbounded = -1;
    std::vector<int> region_of_corner;  // index 4 * crossing + pos
    // Cap and cup data: the ends of the strand, their first segments and the
    // second crossing met from each end.
    int infinity_segment = -1, zero_segment = -1;
    int infinity_crossing = -1, zero_crossing = -1;

    bool labeled = false;
    std::vector<std::optional<SegmentLabel>> labels;  // per edge, none on end edges
    int n_vars = 0;

    int n() const { return int(crossings.size()); }
};

// Standard alternating open diagram of the 2-bridge knot with these twists.
// Throws NotHyperbolic for length < 2 or torus fractions, InvalidTwist for
// zero or mixed-sign entries and for vectors describing a link.
OpenDiagram build_two_bridge(const TwistVector& twists);

OpenDiagram label_segments(const OpenDiagram& d);

std::vector<Corner> all_corners(const OpenDiagram& d);
std::vector<Corner> essential_corners(const OpenDiagram& d);

nlohmann::json diagram_to_json(const OpenDiagram& d);

}  // namespace knotloop
