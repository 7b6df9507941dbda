#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "knotloop/knot_diagram.hpp"
#include "knotloop/numerics.hpp"

namespace knotloop {

enum class EdgeType { C = 0, R = 1, O = 2, U = 3 };
char type_char(EdgeType t);

// An edge of the octahedral decomposition before identification:
// C per crossing, R per region of the closure, O per over-arc, U per under-arc.
struct EdgeLabel {
    EdgeType type;
    int index;
    auto operator<=>(const EdgeLabel&) const = default;
};
std::string to_string(const EdgeLabel& e);

// Tetrahedron vertices: top, bottom, and the two half-edges a, b of its corner.
enum Vertex : int { VT = 0, VB = 1, VA = 2, VBb = 3 };

// The six vertex pairs, in slot order. Slots 0,1 carry z, 2,3 carry z',
// 4,5 carry z''.
inline constexpr std::array<std::array<int, 2>, 6> kPairs = {
    {{VT, VB}, {VA, VBb}, {VT, VA}, {VB, VBb}, {VT, VBb}, {VB, VA}}};
int pair_slot(int p, int q);
inline int slot_quad(int slot) { return slot / 2; }

struct OctaTet {
    int crossing = 0, pos = 0;
    std::array<EdgeLabel, 6> edges;
};

struct FacePairing {
    int tet1;
    std::array<int, 3> verts1;
    int tet2;
    std::array<int, 3> verts2;
    bool internal;  // inside one octahedron
};

// Closure of the open diagram: the two end edges are joined into the
// segment s = top_edge, which is the default cut segment.
struct OctahedralComplex {
    OpenDiagram diagram;
    std::vector<Corner> corners;      // all 4n, index 4 * crossing + pos
    std::vector<Edge> edges;          // closure edges, bottom_edge is dead
    std::vector<bool> alive;
    std::vector<Region> regions;      // regions of the closure
    std::vector<int> region_of_corner;
    int cut = -1;                     // s
    std::vector<int> seg_after;       // closure edge after visit i
    std::vector<int> over_arc, under_arc;          // per closure edge
    std::vector<int> over_through, under_through;  // per crossing
    std::vector<OctaTet> tets;
    std::vector<FacePairing> pairings;
    int n() const { return diagram.n(); }
    std::vector<int> regions_of_edge(int e) const;
};

// Requires a labeled diagram. Throws Degenerate if the face pairings do not
// reproduce the C/R/O/U edge classes.
OctahedralComplex octahedral_decomposition(const OpenDiagram& d);

// Number of edge classes induced by the face pairings alone.
int face_pairing_class_count(const OctahedralComplex& O);

struct CollapseCounts {
    int n_o = 0, n_u = 0, n_r1 = 0, n_r2 = 0;
    int removed_tets = 0;
    int removed_c = 0, removed_r = 0, removed_o = 0, removed_u = 0;
    int ou_merges = 0;
    int formula_tets() const;  // 4n - n_r1 - n_r2 - 4 n_u - 4 n_o + 8, needs n
    int n = 0;
};

struct TriTet {
    int crossing = 0, pos = 0;
    std::array<int, 6> edge{};         // final edge index per slot
    std::array<EdgeLabel, 6> label{};  // octahedral edge per slot
    std::vector<int> shape_exponents;  // z as a monomial in the diagram variables
    int type = 1;                      // crossing type
    int row = 0;                       // crossing row, 0 at the top
};

// Consecutive arcs meeting at a crossing, as final edges: over-arcs at an
// under visit, under-arcs at an over visit.
struct ArcStep {
    int crossing;
    int from, to;
};

struct IdealTriangulation {
    std::vector<TriTet> tets;
    std::vector<EdgeType> edge_type;               // per final edge
    std::vector<std::vector<EdgeLabel>> members;   // per final edge
    std::map<EdgeLabel, int> edge_of;              // surviving labels -> final edge
    std::vector<ArcStep> arc_steps;
    CollapseCounts counts;
    int cut = -1;
    int c_w = -1, c_x = -1, c_y = -1, c_z = -1;  // crossings around the cut
    int n_vars = 0;
    int N() const { return int(tets.size()); }
    int tet_at(int crossing, int pos) const;  // -1 if removed
    int edge_of_label(const EdgeLabel& l) const;  // -1 if vanished
};

// Collapse along an alternating segment s of the closure. Throws
// NonAlternatingSegment otherwise.
IdealTriangulation collapse(const OctahedralComplex& O, int s);
IdealTriangulation collapse(const OctahedralComplex& O);  // along the cut

using IntMatrix = std::vector<std::vector<int>>;

struct GluingData {
    int N = 0;
    IntMatrix G, Gp, Gpp;
    std::vector<int> C, Cp, Cpp;
    int replaced_row = -1;
    std::vector<EdgeType> edge_type;  // empty for external data
};

struct Flattening {
    std::vector<int> f, fp, fpp;
    static Flattening zero(int N);
    Flattening operator+(const Flattening& o) const;
    Flattening operator-(const Flattening& o) const;
    bool operator==(const Flattening&) const = default;
};

std::vector<int> pairing(const GluingData& gd, const Flattening& fl);
bool is_flattening(const GluingData& gd, const Flattening& fl);

struct MeridianCandidate {
    int i1, i2;  // z_{i1}^{-1} z_{i2} = 1
};

// Pairs of tetrahedra with equal shape monomials whose relation is
// independent of the C and R edge equations. Pairs with a shape left free by
// the C/R eliminations come first, then bottommost first.
std::vector<MeridianCandidate> meridian_candidates(const IdealTriangulation& T, const GluingData& gd);

// Shapes solved for by the C and R edge equations in the variable
// reduction: the S corner of each pure C edge, the N corner at the lowest
// crossing of each pure R edge. One entry per C edge, then per R edge.
struct CREliminations {
    std::vector<int> c_edges, c_tets, r_edges, r_tets;
};
CREliminations cr_eliminations(const IdealTriangulation& T, const GluingData& gd);

GluingData gluing_data(const IdealTriangulation& T);
GluingData with_meridian(const GluingData& gd, const MeridianCandidate& m);
int last_c_row(const GluingData& gd);

struct TransferStep {
    int from, to;  // final edges
    int crossing;
    std::vector<Flattening> options;  // every move with this effect at the crossing
};

struct ExplicitFlattening {
    Flattening pre, g, total;
    std::vector<int> pre_pairing;
    int u_inf = -1, o_zero = -1;     // surplus edges
    std::vector<int> deficit_edges;  // o_inf, u_0 (repeated when merged)
    bool pre_pattern_ok = false;
    std::vector<TransferStep> steps;
};

// Throws FlatteningFailure if the transferred triple is not a flattening.
ExplicitFlattening explicit_flattening(const IdealTriangulation& T, const GluingData& gd);

// Some integer flattening. Throws NoIntegerSolution.
Flattening solve_flattening(const GluingData& gd);

// Moves one unit of pairing from the R edge of region ri to that of rj
// (adjacent regions of the closure) using two corners at one end of a shared
// segment. choice selects among the valid corner pairs. Throws
// FlatteningFailure if no such move exists.
Flattening transfer_region(const OctahedralComplex& O, const IdealTriangulation& T,
                           const GluingData& gd, const Flattening& f, int ri, int rj, int choice = 0);
std::vector<Flattening> region_transfer_options(const OctahedralComplex& O, const IdealTriangulation& T,
                                                const GluingData& gd, int ri, int rj);

// Gluing-data JSON with optional shapes and flattening.
struct GluingFile {
    GluingData data;
    std::vector<cplx> shapes;
    bool has_flattening = false;
    Flattening flattening;
};
GluingFile read_gluing_file(const std::string& path);
GluingFile parse_gluing_json(const std::string& text);
std::string gluing_to_json(const GluingFile& g);

}  // namespace knotloop
