#include "knotloop/regions.hpp"

#include <map>
#include <set>

namespace knotloop {

std::vector<Region> trace_regions(const std::vector<Edge>& edges, const std::vector<bool>& alive) {
    // (crossing, half) -> edge; univalent ends never need a lookup.
    std::map<std::pair<int, int>, int> at;
    for (int e = 0; e < int(edges.size()); ++e) {
        if (!alive[e]) continue;
        for (const EdgeEnd& x : {edges[e].a, edges[e].b})
            if (x.crossing >= 0) at[{x.crossing, x.half}] = e;
    }
    auto far_end = [&](int e, const EdgeEnd& from) {
        return edges[e].a == from ? edges[e].b : edges[e].a;
    };

    // A dart is an edge traversed away from one of its ends; side 0 leaves a.
    std::set<std::pair<int, int>> seen;
    std::vector<Region> out;
    for (int e0 = 0; e0 < int(edges.size()); ++e0) {
        if (!alive[e0]) continue;
        for (int side0 = 0; side0 < 2; ++side0) {
            if (seen.count({e0, side0})) continue;
            Region r;
            int e = e0, side = side0;
            while (!seen.count({e, side})) {
                seen.insert({e, side});
                r.edges.push_back(e);
                EdgeEnd from = side == 0 ? edges[e].a : edges[e].b;
                EdgeEnd to = far_end(e, from);
                if (to.crossing < 0) {
                    // Turn around the univalent vertex.
                    side = (edges[e].a == to) ? 0 : 1;
                    continue;
                }
                int g = (to.half + 3) % 4;
                r.corners.push_back({to.crossing, g});
                int ne = at.at({to.crossing, g});
                EdgeEnd leave{to.crossing, g};
                e = ne;
                side = (edges[ne].a == leave) ? 0 : 1;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace knotloop
