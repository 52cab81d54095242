#pragma once

#include "dimer/graph.hpp"
#include "dimer/linalg_exact.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dimer {

// Alternating product of phased edge values around a face: edges traversed
// white-to-black go in the numerator, black-to-white in the denominator.
inline GRat face_alternating_product(const PlanarGraph& g, const Face& f) {
    GRat num(Rational(1)), den(Rational(1));
    for (int d : f.darts) {
        GRat v = g.edges[d / 2].value();
        if (d & 1)
            den = den * v;
        else
            num = num * v;
    }
    return num / den;
}

// Returns 0..3 when v is a positive rational times i^p, otherwise -1.
inline int unit_phase_of(const GRat& v) {
    if (v.im == 0 && v.re != 0) return v.re > 0 ? 0 : 2;
    if (v.re == 0 && v.im != 0) return v.im > 0 ? 1 : 3;
    return -1;
}

// A phasing is valid when every bounded face of degree 2k has alternating
// product that is negative real for k even and positive real for k odd.
inline std::optional<int> find_bad_face(const PlanarGraph& g) {
    for (int fi = 0; fi < g.n_bounded; ++fi) {
        const Face& f = g.faces[fi];
        int k = f.degree() / 2;
        int p = unit_phase_of(face_alternating_product(g, f));
        int want = (k % 2 == 0) ? 2 : 0;
        if (p != want) return fi;
    }
    return std::nullopt;
}

inline bool verify_phasing(const PlanarGraph& g) { return !find_bad_face(g).has_value(); }

// Fix up edge phases so every bounded face satisfies the sign rule. Walks a
// spanning tree of the dual graph rooted at the outer face and corrects each
// face, deepest first, through the edge it shares with its parent.
inline void apply_kasteleyn_phasing(PlanarGraph& g) {
    if (g.faces.empty()) g.build_faces();
    const int ne = (int)g.edges.size();
    const int nf = (int)g.faces.size();
    const std::vector<int>& face_of_dart = g.face_of_dart;

    // Dual BFS. Node nf acts as the merged outer face.
    const int OUTER = nf;
    auto node_of = [&](int fi) { return g.faces[fi].bounded ? fi : OUTER; };
    std::vector<std::vector<std::pair<int, int>>> dual(nf + 1); // (node, edge)
    for (int e = 0; e < ne; ++e) {
        int f1 = node_of(face_of_dart[2 * e]);
        int f2 = node_of(face_of_dart[2 * e + 1]);
        if (f1 == f2) continue;
        dual[f1].push_back({f2, e});
        dual[f2].push_back({f1, e});
    }
    std::vector<int> depth(nf + 1, -1), parent_edge(nf + 1, -1);
    std::deque<int> q;
    depth[OUTER] = 0;
    q.push_back(OUTER);
    std::vector<int> order;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (u != OUTER) order.push_back(u);
        for (auto [v, e] : dual[u]) {
            if (depth[v] != -1) continue;
            depth[v] = depth[u] + 1;
            parent_edge[v] = e;
            q.push_back(v);
        }
    }
    // Deepest faces first; the shared parent edge is still free to adjust.
    std::reverse(order.begin(), order.end());
    for (int fi : order) {
        const Face& f = g.faces[fi];
        int k = f.degree() / 2;
        int want = (k % 2 == 0) ? 2 : 0;
        int have = unit_phase_of(face_alternating_product(g, f));
        if (have < 0) throw std::runtime_error("phasing: non-unit phase on a face");
        int delta = ((want - have) % 4 + 4) % 4;
        if (delta == 0) continue;
        int e = parent_edge[fi];
        if (e < 0) throw std::runtime_error("phasing: no free edge for face");
        // Is edge e traversed w->b inside face fi?
        bool numerator = (face_of_dart[2 * e] == fi);
        int shift = numerator ? delta : (4 - delta) % 4;
        g.edges[e].phase = (g.edges[e].phase + shift) % 4;
    }
    if (auto bad = find_bad_face(g))
        throw std::runtime_error("phasing failed on face " + std::to_string(*bad));
}

// ----- Kasteleyn matrix and derived quantities ------------------------------

inline std::vector<std::vector<GRat>> kasteleyn_matrix(const PlanarGraph& g) {
    std::vector<std::vector<GRat>> K(g.nw, std::vector<GRat>(g.nb, GRat()));
    for (const GraphEdge& e : g.edges) K[e.w][e.b] = K[e.w][e.b] + e.value();
    return K;
}

// Z = |det K|, an exact rational: the determinant of a valid Kasteleyn
// matrix is a Gaussian unit times the weighted matching count.
inline Rational partition_function(const PlanarGraph& g) {
    if (g.nw != g.nb) return Rational(0);
    if (g.nw == 0) return Rational(1);
    GRat d = det_exact(kasteleyn_matrix(g));
    if (d.re == 0 && d.im == 0) return Rational(0);
    if (d.im == 0) return d.re > 0 ? d.re : -d.re;
    if (d.re == 0) return d.im > 0 ? d.im : -d.im;
    throw std::runtime_error("partition_function: determinant has mixed phase");
}

// K^{-1} indexed [b][w].
inline std::vector<std::vector<GRat>> kasteleyn_inverse(const PlanarGraph& g) {
    auto K = kasteleyn_matrix(g);
    auto inv = invert_exact(K);
    if (inv.empty()) throw std::runtime_error("kasteleyn_inverse: singular matrix");
    return inv;
}

// P(all edges of X in a random matching)
//   = |prod_i K(w_i, b_i) * det [K^{-1}(b_j, w_i)]_{i,j}|.
inline Rational edges_probability(const PlanarGraph& g,
                                  const std::vector<std::vector<GRat>>& kinv,
                                  const std::vector<int>& edge_ids) {
    int n = (int)edge_ids.size();
    GRat pref(Rational(1));
    std::vector<std::vector<GRat>> minor(n, std::vector<GRat>(n));
    for (int i = 0; i < n; ++i) {
        const GraphEdge& ei = g.edges[edge_ids[i]];
        pref = pref * ei.value();
        for (int j = 0; j < n; ++j) {
            const GraphEdge& ej = g.edges[edge_ids[j]];
            minor[i][j] = kinv[ei.b][ej.w];
        }
    }
    GRat p = pref * det_exact(minor);
    if (p.re == 0 && p.im == 0) return Rational(0);
    if (p.im == 0) return p.re > 0 ? p.re : -p.re;
    if (p.re == 0) return p.im > 0 ? p.im : -p.im;
    throw std::runtime_error("edges_probability: value has mixed phase");
}

inline Rational edge_probability(const PlanarGraph& g,
                                 const std::vector<std::vector<GRat>>& kinv, int edge_id) {
    return edges_probability(g, kinv, {edge_id});
}

// ----- cycle sign lemma ------------------------------------------------------

struct CycleSign {
    GRat alternating; // alternating product of phased values along the cycle
    int k = 0;        // half-length
    int enclosed = 0; // vertices strictly inside
    int expected = 1; // (-1)^{1+k+enclosed}
    bool matches = false;
};

// cycle: w[0] - b[0] - w[1] - ... - b[k-1] - w[0]. All listed edges must
// exist. Enclosure is counted by winding number of the polygon of vertex
// positions (vertices on the cycle excluded).
inline CycleSign cycle_sign(const PlanarGraph& g, const std::vector<int>& whites,
                            const std::vector<int>& blacks) {
    int k = (int)whites.size();
    if ((int)blacks.size() != k || k < 2)
        throw std::invalid_argument("cycle_sign: need k >= 2 whites and blacks");
    std::map<std::pair<int, int>, GRat> val;
    for (const GraphEdge& e : g.edges) val[{e.w, e.b}] = e.value();
    auto get = [&](int w, int b) {
        auto it = val.find({w, b});
        if (it == val.end()) throw std::invalid_argument("cycle_sign: missing edge");
        return it->second;
    };
    CycleSign out;
    out.k = k;
    GRat num(Rational(1)), den(Rational(1));
    std::vector<Vec2> poly;
    for (int i = 0; i < k; ++i) {
        num = num * get(whites[i], blacks[i]);
        den = den * get(whites[(i + 1) % k], blacks[i]);
        poly.push_back(g.wpos[whites[i]]);
        poly.push_back(g.bpos[blacks[i]]);
    }
    out.alternating = num / den;

    std::set<int> cyc_w(whites.begin(), whites.end()), cyc_b(blacks.begin(), blacks.end());
    auto winding = [&](Vec2 p) {
        double a = 0;
        for (size_t i = 0; i < poly.size(); ++i) {
            Vec2 u = poly[i] - p, v = poly[(i + 1) % poly.size()] - p;
            a += std::atan2(cross(u, v), u.x * v.x + u.y * v.y);
        }
        return (int)std::lround(a / (2 * M_PI));
    };
    for (int i = 0; i < g.nw; ++i)
        if (!cyc_w.count(i) && winding(g.wpos[i]) != 0) ++out.enclosed;
    for (int i = 0; i < g.nb; ++i)
        if (!cyc_b.count(i) && winding(g.bpos[i]) != 0) ++out.enclosed;
    out.expected = ((1 + k + out.enclosed) % 2 == 0) ? 1 : -1;
    out.matches = (out.alternating.im == 0 && out.alternating.re == Rational(out.expected));
    return out;
}

// ----- gauge equivalence -----------------------------------------------------

// K and K' with the same support are gauge equivalent when K' = D_W K D_B
// for diagonal rescalings. Constructive check by propagation over a spanning
// forest, verifying consistency on the remaining edges.
inline bool gauge_equivalent(const PlanarGraph& g1, const PlanarGraph& g2) {
    if (g1.nw != g2.nw || g1.nb != g2.nb) return false;
    std::map<std::pair<int, int>, GRat> v1, v2;
    for (const GraphEdge& e : g1.edges) v1[{e.w, e.b}] = v1[{e.w, e.b}] + e.value();
    for (const GraphEdge& e : g2.edges) v2[{e.w, e.b}] = v2[{e.w, e.b}] + e.value();
    if (v1.size() != v2.size()) return false;
    for (auto& [k, v] : v1) {
        auto it = v2.find(k);
        if (it == v2.end()) return false;
        bool z1 = (v.re == 0 && v.im == 0);
        bool z2 = (it->second.re == 0 && it->second.im == 0);
        if (z1 != z2) return false;
    }
    // lambda over whites, mu over blacks: lambda_w * v1 * mu_b = v2.
    std::vector<GRat> lam(g1.nw), mu(g1.nb);
    std::vector<char> has_l(g1.nw, 0), has_m(g1.nb, 0);
    std::vector<std::vector<std::pair<int, int>>> wn(g1.nw), bn(g1.nb);
    for (auto& [k, v] : v1) {
        wn[k.first].push_back({k.second, 0});
        bn[k.second].push_back({k.first, 0});
    }
    auto ratio = [&](int w, int b) { return v2[{w, b}] / v1[{w, b}]; };
    for (int s = 0; s < g1.nw; ++s) {
        if (has_l[s] || wn[s].empty()) continue;
        lam[s] = GRat(Rational(1));
        has_l[s] = 1;
        std::deque<std::pair<bool, int>> q = {{true, s}};
        while (!q.empty()) {
            auto [is_w, u] = q.front();
            q.pop_front();
            if (is_w) {
                for (auto [b, _] : wn[u]) {
                    GRat want = ratio(u, b) / lam[u];
                    if (!has_m[b]) {
                        mu[b] = want;
                        has_m[b] = 1;
                        q.push_back({false, b});
                    } else if (!(mu[b].re == want.re && mu[b].im == want.im)) {
                        return false;
                    }
                }
            } else {
                for (auto [w, _] : bn[u]) {
                    GRat want = ratio(w, u) / mu[u];
                    if (!has_l[w]) {
                        lam[w] = want;
                        has_l[w] = 1;
                        q.push_back({true, w});
                    } else if (!(lam[w].re == want.re && lam[w].im == want.im)) {
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

// ----- closed-form counts ----------------------------------------------------

// Domino tilings of an m x n rectangle via the trigonometric product
//   Z = prod_{j<=m} prod_{k<=n} (4cos^2(pi j/(m+1)) + 4cos^2(pi k/(n+1)))^{1/4}.
inline double rectangle_Z_product(int m, int n) {
    long double logz = 0;
    for (int j = 1; j <= m; ++j)
        for (int k = 1; k <= n; ++k) {
            long double cj = std::cos((long double)M_PI * j / (m + 1));
            long double ck = std::cos((long double)M_PI * k / (n + 1));
            long double s = 4 * cj * cj + 4 * ck * ck;
            if (s < 1e-24L) return 0.0; // both cosines vanish: odd x odd board
            logz += 0.25L * std::log(s);
        }
    return (double)std::exp(logz);
}

// Lozenge tilings of the A x B x C hexagon (boxed plane partitions).
inline Rational macmahon(int A, int B, int C) {
    Rational z(1);
    for (int i = 1; i <= A; ++i)
        for (int j = 1; j <= B; ++j)
            for (int k = 1; k <= C; ++k)
                z *= Rational(i + j + k - 1, i + j + k - 2);
    return z;
}

} // namespace dimer
