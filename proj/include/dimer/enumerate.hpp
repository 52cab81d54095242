#pragma once

#include "dimer/graph.hpp"

#include <functional>
#include <vector>

namespace dimer {

struct Matching {
    std::vector<int> edge_of_white, edge_of_black; // -1 when uncovered
    std::vector<char> in_m;                        // indexed by edge id

    static Matching from_edges(const PlanarGraph& g, const std::vector<int>& eids) {
        Matching m;
        m.edge_of_white.assign(g.nw, -1);
        m.edge_of_black.assign(g.nb, -1);
        m.in_m.assign(g.edges.size(), 0);
        for (int e : eids) {
            m.edge_of_white[g.edges[e].w] = e;
            m.edge_of_black[g.edges[e].b] = e;
            m.in_m[e] = 1;
        }
        return m;
    }
    bool perfect() const {
        for (int e : edge_of_white)
            if (e < 0) return false;
        for (int e : edge_of_black)
            if (e < 0) return false;
        return true;
    }
    std::vector<int> edge_ids() const {
        std::vector<int> out;
        for (int e : edge_of_white)
            if (e >= 0) out.push_back(e);
        return out;
    }
};

// ----- maximum matching (Kuhn's augmenting paths) ---------------------------

inline int max_matching_size(const PlanarGraph& g) {
    std::vector<int> mw(g.nw, -1), mb(g.nb, -1);
    std::vector<char> seen(g.nb, 0);
    std::function<bool(int)> tryw = [&](int w) -> bool {
        for (int e : g.wadj[w]) {
            int b = g.edges[e].b;
            if (seen[b]) continue;
            seen[b] = 1;
            if (mb[b] < 0 || tryw(mb[b])) {
                mw[w] = b;
                mb[b] = w;
                return true;
            }
        }
        return false;
    };
    int size = 0;
    for (int w = 0; w < g.nw; ++w) {
        std::fill(seen.begin(), seen.end(), 0);
        if (tryw(w)) ++size;
    }
    return size;
}

inline bool tileable(const PlanarGraph& g) {
    return g.nw == g.nb && max_matching_size(g) == g.nw;
}

// ----- exhaustive enumeration (oracle for small regions) --------------------

// Visits every perfect matching; picked holds one edge id per white, in
// white order. Whites are processed in a static order chosen by degree.
inline void enumerate_matchings(const PlanarGraph& g,
                                const std::function<void(const std::vector<int>&)>& visit) {
    if (g.nw != g.nb) return;
    if (g.nw == 0) {
        std::vector<int> empty;
        visit(empty);
        return;
    }
    std::vector<int> order(g.nw);
    for (int i = 0; i < g.nw; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return g.wadj[a].size() < g.wadj[b].size(); });
    std::vector<char> bused(g.nb, 0);
    std::vector<int> picked(g.nw, -1);
    std::function<void(int)> rec = [&](int i) {
        if (i == g.nw) {
            visit(picked);
            return;
        }
        int w = order[i];
        for (int e : g.wadj[w]) {
            int b = g.edges[e].b;
            if (bused[b]) continue;
            bused[b] = 1;
            picked[i] = e;
            rec(i + 1);
            bused[b] = 0;
        }
        picked[i] = -1;
    };
    rec(0);
}

inline Int count_matchings_brute(const PlanarGraph& g) {
    Int n = 0;
    enumerate_matchings(g, [&](const std::vector<int>&) { ++n; });
    return n;
}

inline Rational weighted_Z_brute(const PlanarGraph& g) {
    Rational z(0);
    enumerate_matchings(g, [&](const std::vector<int>& eids) {
        Rational t(1);
        for (int e : eids) t *= g.edges[e].weight;
        z += t;
    });
    return z;
}

// P(e in M) for every edge, by enumeration.
inline std::vector<Rational> edge_marginals_brute(const PlanarGraph& g) {
    std::vector<Rational> num(g.edges.size(), Rational(0));
    Rational z(0);
    enumerate_matchings(g, [&](const std::vector<int>& eids) {
        Rational t(1);
        for (int e : eids) t *= g.edges[e].weight;
        z += t;
        for (int e : eids) num[e] += t;
    });
    if (z == 0) return num;
    for (auto& v : num) v /= z;
    return num;
}

} // namespace dimer
