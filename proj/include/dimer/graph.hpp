#pragma once

#include "dimer/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimer {

struct Vec2 {
    double x = 0, y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

enum class Lattice { Square, Honeycomb, Generic };

// Edge between white vertex w and black vertex b. The Kasteleyn entry is
// weight * i^phase; weight stays positive, phase in {0,1,2,3}.
struct GraphEdge {
    int w = -1, b = -1;
    Rational weight = Rational(1);
    int phase = 0;
    int type = 0; // lattice-specific label: square 0=horizontal 1=vertical,
                  // honeycomb 0=a 1=b 2=c
    GRat value() const { return unit_phase(phase) * GRat(weight); }
};

// Dart: directed copy of an edge. id = 2*edge + (0: w->b, 1: b->w).
struct Face {
    std::vector<int> darts;  // boundary darts in traversal order
    double area = 0;         // signed area, > 0 for bounded faces
    Vec2 centroid;
    bool bounded = false;
    int degree() const { return (int)darts.size(); }
};

struct PlanarGraph {
    Lattice lattice = Lattice::Generic;
    int nw = 0, nb = 0;
    std::vector<Vec2> wpos, bpos;
    std::vector<GraphEdge> edges;
    std::vector<std::vector<int>> wadj, badj; // incident edge ids
    // Cell labels for builders (square: cell coords; honeycomb: triangle
    // coords with orientation encoded by color).
    std::vector<std::pair<int, int>> wcell, bcell;

    std::vector<Face> faces;    // all faces, bounded ones first
    int n_bounded = 0;
    std::vector<int> face_of_dart;

    int add_white(Vec2 p, std::pair<int, int> cell = {0, 0}) {
        wpos.push_back(p);
        wadj.emplace_back();
        wcell.push_back(cell);
        return nw++;
    }
    int add_black(Vec2 p, std::pair<int, int> cell = {0, 0}) {
        bpos.push_back(p);
        badj.emplace_back();
        bcell.push_back(cell);
        return nb++;
    }
    int add_edge(int w, int b, Rational weight = Rational(1), int phase = 0, int type = 0) {
        GraphEdge e;
        e.w = w;
        e.b = b;
        e.weight = std::move(weight);
        e.phase = phase;
        e.type = type;
        int id = (int)edges.size();
        edges.push_back(e);
        wadj[w].push_back(id);
        badj[b].push_back(id);
        return id;
    }

    Vec2 dart_from(int dart) const {
        const GraphEdge& e = edges[dart / 2];
        return (dart & 1) ? bpos[e.b] : wpos[e.w];
    }
    Vec2 dart_to(int dart) const {
        const GraphEdge& e = edges[dart / 2];
        return (dart & 1) ? wpos[e.w] : bpos[e.b];
    }

    void build_faces();
};

namespace detail {

struct DartKey {
    bool from_white;
    int vertex;
    bool operator<(const DartKey& o) const {
        return std::tie(from_white, vertex) < std::tie(o.from_white, o.vertex);
    }
};

} // namespace detail

// Trace faces from the rotation system induced by the embedding. Bounded
// faces come out counterclockwise (positive area) and are stored first.
inline void PlanarGraph::build_faces() {
    faces.clear();
    const int ne = (int)edges.size();
    // Rotation: darts leaving each vertex sorted by angle.
    std::vector<std::vector<int>> out_w(nw), out_b(nb);
    for (int e = 0; e < ne; ++e) {
        out_w[edges[e].w].push_back(2 * e);
        out_b[edges[e].b].push_back(2 * e + 1);
    }
    auto sort_by_angle = [&](std::vector<int>& darts) {
        std::sort(darts.begin(), darts.end(), [&](int a, int b) {
            Vec2 va = dart_to(a) - dart_from(a);
            Vec2 vb = dart_to(b) - dart_from(b);
            return std::atan2(va.y, va.x) < std::atan2(vb.y, vb.x);
        });
    };
    for (auto& v : out_w) sort_by_angle(v);
    for (auto& v : out_b) sort_by_angle(v);

    // next dart in ccw face traversal: predecessor (in ccw rotation) of the
    // reversal of the current dart, i.e. turn left at each vertex.
    auto next_dart = [&](int d) {
        int rev = d ^ 1;
        const GraphEdge& e = edges[d / 2];
        bool at_white = (d & 1); // dart d ends at a white vertex iff b->w
        const std::vector<int>& ring = at_white ? out_w[e.w] : out_b[e.b];
        int pos = -1;
        for (int i = 0; i < (int)ring.size(); ++i)
            if (ring[i] == rev) { pos = i; break; }
        int n = (int)ring.size();
        return ring[(pos - 1 + n) % n];
    };

    std::vector<char> used(2 * ne, 0);
    for (int d0 = 0; d0 < 2 * ne; ++d0) {
        if (used[d0]) continue;
        Face f;
        int d = d0;
        double area2 = 0;
        Vec2 c{0, 0};
        do {
            used[d] = 1;
            f.darts.push_back(d);
            Vec2 a = dart_from(d), b = dart_to(d);
            area2 += cross(a, b);
            c = c + a;
            d = next_dart(d);
        } while (d != d0);
        f.area = area2 / 2;
        f.centroid = (1.0 / f.darts.size()) * c;
        f.bounded = f.area > 1e-12;
        faces.push_back(std::move(f));
    }
    std::stable_sort(faces.begin(), faces.end(),
                     [](const Face& a, const Face& b) { return a.bounded > b.bounded; });
    n_bounded = 0;
    for (const Face& f : faces)
        if (f.bounded) ++n_bounded;
    face_of_dart.assign(2 * ne, -1);
    for (int fi = 0; fi < (int)faces.size(); ++fi)
        for (int d : faces[fi].darts) face_of_dart[d] = fi;
}

// ----- square lattice regions (vertices = unit cells, edges = adjacency) ---

struct SquareWeights {
    Rational horizontal = Rational(1);
    Rational vertical = Rational(1);
};

// cells: list of (x, y) unit-cell coordinates. White iff x+y even.
// Vertical edges get phase i, horizontal phase 1.
inline PlanarGraph square_region(const std::vector<std::pair<int, int>>& cells,
                                 SquareWeights wt = {}) {
    PlanarGraph g;
    g.lattice = Lattice::Square;
    std::map<std::pair<int, int>, int> index;
    for (auto& c : cells) {
        if (index.count(c)) throw std::invalid_argument("square_region: duplicate cell");
        bool white = ((c.first + c.second) % 2 + 2) % 2 == 0;
        Vec2 p{(double)c.first, (double)c.second};
        index[c] = white ? g.add_white(p, c) : g.add_black(p, c);
    }
    for (auto& [c, id] : index) {
        bool white = ((c.first + c.second) % 2 + 2) % 2 == 0;
        if (!white) continue;
        auto link = [&](int dx, int dy, int type) {
            auto it = index.find({c.first + dx, c.second + dy});
            if (it != index.end())
                g.add_edge(id, it->second, type == 0 ? wt.horizontal : wt.vertical,
                           type == 0 ? 0 : 1, type);
        };
        link(1, 0, 0);
        link(-1, 0, 0);
        link(0, 1, 1);
        link(0, -1, 1);
    }
    g.build_faces();
    return g;
}

inline PlanarGraph square_rectangle(int m, int n,
                                    const std::vector<std::pair<int, int>>& removed = {},
                                    SquareWeights wt = {}) {
    std::set<std::pair<int, int>> cut(removed.begin(), removed.end());
    std::vector<std::pair<int, int>> cells;
    for (int x = 0; x < m; ++x)
        for (int y = 0; y < n; ++y)
            if (!cut.count({x, y})) cells.push_back({x, y});
    return square_region(cells, wt);
}

// ----- honeycomb regions (vertices = unit triangles of the A2 lattice) -----

struct HoneycombWeights {
    Rational a = Rational(1), b = Rational(1), c = Rational(1);
};

inline Vec2 tri_embed(double u, double v) { return {u + v / 2, v * std::sqrt(3.0) / 2}; }

// cells: (u, v, up?) triangles. up(u,v) has corners (u,v),(u+1,v),(u,v+1);
// down(u,v) has corners (u+1,v),(u,v+1),(u+1,v+1). Whites are up-triangles.
struct TriCell {
    int u, v;
    bool up;
    bool operator<(const TriCell& o) const {
        return std::tie(u, v, up) < std::tie(o.u, o.v, o.up);
    }
    bool operator==(const TriCell& o) const { return u == o.u && v == o.v && up == o.up; }
};

inline PlanarGraph honeycomb_region(const std::vector<TriCell>& cells,
                                    HoneycombWeights wt = {}) {
    PlanarGraph g;
    g.lattice = Lattice::Honeycomb;
    std::map<std::pair<int, int>, int> wi, bi;
    for (const TriCell& t : cells) {
        if (t.up) {
            if (wi.count({t.u, t.v})) throw std::invalid_argument("duplicate cell");
            Vec2 p = tri_embed(t.u + 1.0 / 3, t.v + 1.0 / 3);
            wi[{t.u, t.v}] = g.add_white(p, {t.u, t.v});
        } else {
            if (bi.count({t.u, t.v})) throw std::invalid_argument("duplicate cell");
            Vec2 p = tri_embed(t.u + 2.0 / 3, t.v + 2.0 / 3);
            bi[{t.u, t.v}] = g.add_black(p, {t.u, t.v});
        }
    }
    Rational w[3] = {wt.a, wt.b, wt.c};
    for (auto& [c, id] : wi) {
        auto link = [&](int du, int dv, int type) {
            auto it = bi.find({c.first + du, c.second + dv});
            if (it != bi.end()) g.add_edge(id, it->second, w[type], 0, type);
        };
        link(0, 0, 0);   // a: shared diagonal side
        link(-1, 0, 1);  // b
        link(0, -1, 2);  // c
    }
    g.build_faces();
    return g;
}

// A x B x C hexagon: the standard lozenge-tiling region.
inline std::vector<TriCell> hexagon_cells(int A, int B, int C) {
    auto inside = [&](int x, int y) {
        return y >= 0 && x <= A && x + y <= A + B && y <= B + C && x >= -C && x + y >= 0;
    };
    std::vector<TriCell> cells;
    for (int u = -C - 1; u <= A + 1; ++u) {
        for (int v = -1; v <= B + C + 1; ++v) {
            if (inside(u, v) && inside(u + 1, v) && inside(u, v + 1))
                cells.push_back({u, v, true});
            if (inside(u + 1, v) && inside(u, v + 1) && inside(u + 1, v + 1))
                cells.push_back({u, v, false});
        }
    }
    return cells;
}

inline PlanarGraph hexagon_graph(int A, int B, int C, HoneycombWeights wt = {}) {
    return honeycomb_region(hexagon_cells(A, B, C), wt);
}

// Region bounded by a lattice polygon (corners in triangular coordinates,
// edges along lattice directions). A triangle belongs to the region iff its
// centroid lies inside the polygon (exact rational ray cast).
inline std::vector<TriCell> cells_in_polygon(const std::vector<std::pair<int, int>>& poly) {
    auto centroid_inside = [&](Rational cx, Rational cy) {
        // Cast a ray in +x; count crossings. Centroids have denominator 3,
        // so the ray never passes through an integer polygon vertex.
        int cnt = 0;
        int n = (int)poly.size();
        for (int i = 0; i < n; ++i) {
            Rational x1(poly[i].first), y1(poly[i].second);
            Rational x2(poly[(i + 1) % n].first), y2(poly[(i + 1) % n].second);
            if ((y1 <= cy) == (y2 <= cy)) continue;
            Rational t = (cy - y1) / (y2 - y1);
            Rational xc = x1 + t * (x2 - x1);
            if (xc > cx) ++cnt;
        }
        return cnt % 2 == 1;
    };
    int lo_u = poly[0].first, hi_u = lo_u, lo_v = poly[0].second, hi_v = lo_v;
    for (auto& p : poly) {
        lo_u = std::min(lo_u, p.first);
        hi_u = std::max(hi_u, p.first);
        lo_v = std::min(lo_v, p.second);
        hi_v = std::max(hi_v, p.second);
    }
    std::vector<TriCell> cells;
    for (int u = lo_u - 1; u <= hi_u; ++u) {
        for (int v = lo_v - 1; v <= hi_v; ++v) {
            if (centroid_inside(Rational(3 * u + 1, 3), Rational(3 * v + 1, 3)))
                cells.push_back({u, v, true});
            if (centroid_inside(Rational(3 * u + 2, 3), Rational(3 * v + 2, 3)))
                cells.push_back({u, v, false});
        }
    }
    return cells;
}

// ----- random simply connected regions (for property tests) ----------------

namespace detail {

// Keep the complement connected inside a margin box: flood fill check.
template <class CellT, class NeighborsFn>
bool complement_connected(const std::set<CellT>& region, NeighborsFn neighbors,
                          int lo_x, int hi_x, int lo_y, int hi_y,
                          std::function<CellT(int, int, int)> unpack, int variants) {
    // Grid flood fill over the complement, all variants per (x, y).
    std::set<CellT> comp;
    std::vector<CellT> stack;
    CellT start = unpack(lo_x, lo_y, 0);
    if (region.count(start)) return false;
    stack.push_back(start);
    comp.insert(start);
    while (!stack.empty()) {
        CellT c = stack.back();
        stack.pop_back();
        for (CellT n : neighbors(c, lo_x, hi_x, lo_y, hi_y)) {
            if (region.count(n) || comp.count(n)) continue;
            comp.insert(n);
            stack.push_back(n);
        }
    }
    int total = 0;
    for (int x = lo_x; x <= hi_x; ++x)
        for (int y = lo_y; y <= hi_y; ++y)
            for (int k = 0; k < variants; ++k)
                if (!region.count(unpack(x, y, k))) ++total;
    return (int)comp.size() == total;
}

} // namespace detail

inline std::vector<std::pair<int, int>> random_square_cells(std::mt19937_64& rng,
                                                            int max_cells) {
    std::set<std::pair<int, int>> region = {{0, 0}};
    int target = 1 + (int)(rng() % (unsigned)max_cells);
    auto neighbors4 = [](std::pair<int, int> c) {
        return std::vector<std::pair<int, int>>{
            {c.first + 1, c.second}, {c.first - 1, c.second},
            {c.first, c.second + 1}, {c.first, c.second - 1}};
    };
    int attempts = 0;
    while ((int)region.size() < target && attempts < 40 * target) {
        ++attempts;
        std::vector<std::pair<int, int>> frontier;
        for (auto& c : region)
            for (auto& n : neighbors4(c))
                if (!region.count(n)) frontier.push_back(n);
        if (frontier.empty()) break;
        auto cand = frontier[rng() % frontier.size()];
        auto trial = region;
        trial.insert(cand);
        int lo_x = cand.first, hi_x = cand.first, lo_y = cand.second, hi_y = cand.second;
        for (auto& c : trial) {
            lo_x = std::min(lo_x, c.first);
            hi_x = std::max(hi_x, c.first);
            lo_y = std::min(lo_y, c.second);
            hi_y = std::max(hi_y, c.second);
        }
        lo_x -= 1; lo_y -= 1; hi_x += 1; hi_y += 1;
        bool ok = detail::complement_connected<std::pair<int, int>>(
            trial,
            [&](std::pair<int, int> c, int lx, int hx, int ly, int hy) {
                std::vector<std::pair<int, int>> out;
                for (auto& n : neighbors4(c))
                    if (n.first >= lx && n.first <= hx && n.second >= ly && n.second <= hy)
                        out.push_back(n);
                return out;
            },
            lo_x, hi_x, lo_y, hi_y,
            [](int x, int y, int) { return std::pair<int, int>{x, y}; }, 1);
        if (ok) region = trial;
    }
    return {region.begin(), region.end()};
}

inline std::vector<TriCell> random_tri_cells(std::mt19937_64& rng, int max_cells) {
    std::set<TriCell> region = {{0, 0, true}};
    int target = 1 + (int)(rng() % (unsigned)max_cells);
    auto adj = [](const TriCell& t) {
        std::vector<TriCell> out;
        if (t.up) {
            out.push_back({t.u, t.v, false});
            out.push_back({t.u - 1, t.v, false});
            out.push_back({t.u, t.v - 1, false});
        } else {
            out.push_back({t.u, t.v, true});
            out.push_back({t.u + 1, t.v, true});
            out.push_back({t.u, t.v + 1, true});
        }
        return out;
    };
    int attempts = 0;
    while ((int)region.size() < target && attempts < 40 * target) {
        ++attempts;
        std::vector<TriCell> frontier;
        for (auto& c : region)
            for (auto& n : adj(c))
                if (!region.count(n)) frontier.push_back(n);
        if (frontier.empty()) break;
        TriCell cand = frontier[rng() % frontier.size()];
        auto trial = region;
        trial.insert(cand);
        int lo_u = cand.u, hi_u = cand.u, lo_v = cand.v, hi_v = cand.v;
        for (auto& c : trial) {
            lo_u = std::min(lo_u, c.u);
            hi_u = std::max(hi_u, c.u);
            lo_v = std::min(lo_v, c.v);
            hi_v = std::max(hi_v, c.v);
        }
        lo_u -= 1; lo_v -= 1; hi_u += 1; hi_v += 1;
        bool ok = detail::complement_connected<TriCell>(
            trial,
            [&](const TriCell& c, int lu, int hu, int lv, int hv) {
                std::vector<TriCell> out;
                for (auto& n : adj(c))
                    if (n.u >= lu && n.u <= hu && n.v >= lv && n.v <= hv)
                        out.push_back(n);
                return out;
            },
            lo_u, hi_u, lo_v, hi_v,
            [](int u, int v, int k) { return TriCell{u, v, k == 0}; }, 2);
        if (ok) region = trial;
    }
    return {region.begin(), region.end()};
}

} // namespace dimer
