#pragma once

#include "dimer/enumerate.hpp"
#include "dimer/graph.hpp"

#include <deque>
#include <vector>

namespace dimer {

// Base flow for the height function. The divergence-one reference flow
// omega0 and the height quantum q are chosen so all increments are integer:
// crossing edge e with white on the left changes h by q*omega0(e) - q*1_M(e).
enum class BaseFlow {
    SquareSymmetric,    // omega0 = 1/4, q = 4: increments +1 / -3
    HoneycombSymmetric, // omega0 = 1/3, q = 3: increments +1 / -2
    HoneycombAxis       // omega0 = 1 on a-edges, q = 1: increments in {-1,0,1}
};

inline BaseFlow default_flow(const PlanarGraph& g) {
    return g.lattice == Lattice::Square ? BaseFlow::SquareSymmetric
                                        : BaseFlow::HoneycombSymmetric;
}

struct HeightField {
    std::vector<long long> h; // per bounded face, h[anchor] = 0
    int quantum = 1;
    bool consistent = true; // false when a hole carries nonzero flux
};

namespace detail {

inline int flow_times_q(const GraphEdge& e, BaseFlow flow) {
    switch (flow) {
        case BaseFlow::SquareSymmetric: return 1;
        case BaseFlow::HoneycombSymmetric: return 1;
        case BaseFlow::HoneycombAxis: return e.type == 0 ? 1 : 0;
    }
    return 0;
}

inline int quantum_of(BaseFlow flow) {
    switch (flow) {
        case BaseFlow::SquareSymmetric: return 4;
        case BaseFlow::HoneycombSymmetric: return 3;
        case BaseFlow::HoneycombAxis: return 1;
    }
    return 1;
}

} // namespace detail

// Height increment crossing edge e from face F to face G (by centroids).
// White-on-left means the crossing direction is the edge vector w->b
// rotated a quarter turn counterclockwise.
inline long long height_step(const PlanarGraph& g, const Matching& m, int edge, Vec2 from,
                             Vec2 to, BaseFlow flow) {
    const GraphEdge& e = g.edges[edge];
    Vec2 v = g.bpos[e.b] - g.wpos[e.w];
    Vec2 d = to - from;
    int s = cross(v, d) > 0 ? 1 : -1;
    int val = detail::flow_times_q(e, flow) - detail::quantum_of(flow) * (m.in_m[edge] ? 1 : 0);
    return (long long)s * val;
}

// Heights on bounded faces from a BFS over interior edges, anchored at the
// first bounded face. Non-tree edges are checked for consistency; a region
// with holes can fail the check when the matching has flux around a hole.
inline HeightField height_function(const PlanarGraph& g, const Matching& m,
                                   BaseFlow flow) {
    HeightField out;
    out.quantum = detail::quantum_of(flow);
    out.h.assign(g.n_bounded, 0);
    if (g.n_bounded == 0) return out;
    std::vector<char> seen(g.n_bounded, 0);
    for (int root = 0; root < g.n_bounded; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::deque<int> q = {root};
        while (!q.empty()) {
            int f = q.front();
            q.pop_front();
            for (int d : g.faces[f].darts) {
                int e = d / 2;
                int other = g.face_of_dart[d ^ 1];
                if (other >= g.n_bounded) continue; // outer face
                long long step = height_step(g, m, e, g.faces[f].centroid,
                                             g.faces[other].centroid, flow);
                if (!seen[other]) {
                    seen[other] = 1;
                    out.h[other] = out.h[f] + step;
                    q.push_back(other);
                } else if (out.h[other] != out.h[f] + step) {
                    out.consistent = false;
                }
            }
        }
    }
    return out;
}

// ----- elementary flips ------------------------------------------------------

// A bounded face is flippable when its boundary edges are alternately in
// and out of the matching.
inline bool face_flippable(const PlanarGraph& g, const Matching& m, int face) {
    const Face& f = g.faces[face];
    int deg = f.degree();
    if (deg % 2 != 0 || deg == 0) return false;
    bool even_matched = m.in_m[f.darts[0] / 2];
    for (int i = 0; i < deg; ++i) {
        bool want = (i % 2 == 0) ? even_matched : !even_matched;
        if ((bool)m.in_m[f.darts[i] / 2] != want) return false;
    }
    return true;
}

inline void face_flip(const PlanarGraph& g, Matching& m, int face) {
    const Face& f = g.faces[face];
    std::vector<int> add, del;
    for (int d : f.darts) {
        int e = d / 2;
        (m.in_m[e] ? del : add).push_back(e);
    }
    for (int e : del) {
        m.in_m[e] = 0;
        m.edge_of_white[g.edges[e].w] = -1;
        m.edge_of_black[g.edges[e].b] = -1;
    }
    for (int e : add) {
        m.in_m[e] = 1;
        m.edge_of_white[g.edges[e].w] = e;
        m.edge_of_black[g.edges[e].b] = e;
    }
}

} // namespace dimer
