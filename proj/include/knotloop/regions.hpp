#pragma once

#include <vector>

#include "knotloop/knot_diagram.hpp"

namespace knotloop {

// Faces of a planar 4-valent graph with optional univalent ends. Edges with
// alive[e] == false are ignored. Corners are listed as (crossing, position).
std::vector<Region> trace_regions(const std::vector<Edge>& edges, const std::vector<bool>& alive);

}  // namespace knotloop
