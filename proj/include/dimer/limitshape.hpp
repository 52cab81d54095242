#pragma once

#include "dimer/amoeba.hpp"
#include "dimer/graph.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>

namespace dimer {

// ---------- plane curves Q(u,v) ----------

// Bivariate polynomial sum c[i][j] u^i v^j over i+j <= n.  Rows may be given
// ragged; they are padded so c[i] always has n+1-i entries.
struct PlaneCurveQ {
    int n = 0;
    std::vector<std::vector<double>> c;

    PlaneCurveQ() = default;
    PlaneCurveQ(int degree, std::vector<std::vector<double>> rows) : n(degree), c(std::move(rows)) {
        c.resize(n + 1);
        for (int i = 0; i <= n; ++i) c[i].resize(n + 1 - i, 0.0);
    }

    double eval(double u, double v) const {
        double s = 0;
        for (int i = n; i >= 0; --i) {
            double row = 0;
            for (int j = n - i; j >= 0; --j) row = row * v + c[i][j];
            s = s * u + row;
        }
        return s;
    }

    void gradient(double u, double v, double& qu, double& qv) const {
        qu = qv = 0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                if (i) qu += c[i][j] * i * std::pow(u, i - 1) * std::pow(v, j);
                if (j) qv += c[i][j] * j * std::pow(u, i) * std::pow(v, j - 1);
            }
    }

    void hessian(double u, double v, double& quu, double& quv, double& qvv) const {
        quu = quv = qvv = 0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                if (i >= 2) quu += c[i][j] * i * (i - 1) * std::pow(u, i - 2) * std::pow(v, j);
                if (i && j) quv += c[i][j] * i * j * std::pow(u, i - 1) * std::pow(v, j - 1);
                if (j >= 2) qvv += c[i][j] * j * (j - 1) * std::pow(u, i) * std::pow(v, j - 2);
            }
    }
};

// ---------- Burgers parametrization ----------

// Liquid points carry the upper-half-plane root z and w = -1-z; frozen points
// carry the closest-collision real pair and a facet slope.  indicator is a
// signed root-gap measure on the Riemann sphere: positive in the liquid
// region, negative in the frozen region, zero on the frozen boundary.  The
// chordal metric matters: at tangencies with diagonal edges the colliding
// pair escapes through z = infinity, where the Euclidean gap is useless.
struct BurgersPoint {
    bool liquid = false;
    Cplx z{0, 0}, w{0, 0};
    double s = 0, t = 0;
    double indicator = -1;
};

namespace detail {

inline double chordal(Cplx a, Cplx b) {
    return 2.0 * std::abs(a - b) /
           std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

inline double binom_d(int a, int b) {
    double r = 1;
    for (int k = 0; k < b; ++k) r = r * (a - k) / (k + 1);
    return r;
}

// Coefficients of P(z) = Q(e^{-cx} z, e^{-cy} w) with w = -1-z.  For c = 0
// this is Q(z, xz + yw) = Q(z, (x-y)z - y).
inline std::vector<Cplx> pxy_coeffs(const PlaneCurveQ& Q, double c, double x, double y) {
    int n = Q.n;
    std::vector<Cplx> p(n + 1, 0.0);
    if (c == 0.0) {
        double a = x - y, b = -y;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                if (Q.c[i][j] == 0) continue;
                for (int k = 0; k <= j; ++k)
                    p[i + k] += Q.c[i][j] * binom_d(j, k) * std::pow(a, k) * std::pow(b, j - k);
            }
    } else {
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                if (Q.c[i][j] == 0) continue;
                double f = Q.c[i][j] * std::exp(-c * (i * x + j * y)) * (j % 2 ? -1 : 1);
                for (int k = 0; k <= j; ++k) p[i + k] += f * binom_d(j, k);
            }
    }
    while (p.size() > 1 && std::abs(p.back()) < 1e-14) p.pop_back();
    return p;
}

inline BurgersPoint classify_roots(const std::vector<Cplx>& pc) {
    BurgersPoint r;
    if (pc.size() <= 1) return r;
    auto roots = poly_roots(pc);
    std::vector<Cplx> upper;
    std::vector<double> reals;
    for (auto& z : roots) {
        if (z.imag() > 1e-9 * (1.0 + std::abs(z))) upper.push_back(z);
        else reals.push_back(z.real());
    }
    if (upper.size() >= 2) throw std::runtime_error("non-Harnack Q / ambiguous branch");
    if (upper.size() == 1) {
        r.liquid = true;
        r.z = upper[0];
        r.w = -1.0 - r.z;
        r.s = std::arg(-r.w) / M_PI;
        r.t = std::arg(-1.0 / r.z) / M_PI;
        r.indicator = chordal(r.z, std::conj(r.z)) / 2.0;
        return r;
    }
    // frozen: locate the nearest real collision pair, then classify the facet
    // by where the apex -w = 1 + z lands relative to [0, 1].
    double best = 1e300, zm = reals.empty() ? -0.5 : reals[0];
    bool at_inf = false;
    for (size_t i = 0; i < reals.size(); ++i)
        for (size_t j = i + 1; j < reals.size(); ++j) {
            double d = chordal(reals[i], reals[j]);
            if (d < best) {
                best = d;
                if (std::abs(reals[i]) > 1 && std::abs(reals[j]) > 1 &&
                    (reals[i] > 0) != (reals[j] > 0)) {
                    at_inf = true; // pair collides through z = infinity
                } else {
                    at_inf = false;
                    zm = 0.5 * (reals[i] + reals[j]);
                }
            }
        }
    r.indicator = reals.size() >= 2 ? -best / 2.0 : -1.0;
    if (at_inf) {
        r.z = 1e300;
        r.s = 0;
        r.t = 1;
    } else {
        r.z = zm;
        double apex = 1.0 + zm; // -w
        if (apex < 0) { r.s = 1; r.t = 0; }
        else if (apex > 1) { r.s = 0; r.t = 1; }
        else { r.s = 0; r.t = 0; }
    }
    r.w = -1.0 - r.z;
    return r;
}

} // namespace detail

inline BurgersPoint burgers_solve(const PlaneCurveQ& Q0, double x, double y) {
    return detail::classify_roots(detail::pxy_coeffs(Q0, 0.0, x, y));
}

inline BurgersPoint burgers_solve_volume(const PlaneCurveQ& Q, double c, double x, double y) {
    return detail::classify_roots(detail::pxy_coeffs(Q, c, x, y));
}

// ---------- slope fields and frozen boundaries ----------

struct SlopeField {
    int nx = 0, ny = 0;
    Vec2 lo{0, 0}, hi{0, 0};
    std::vector<BurgersPoint> pts; // (nx+1) x (ny+1), index i * (ny+1) + j

    const BurgersPoint& at(int i, int j) const { return pts[i * (ny + 1) + j]; }
    double dx() const { return (hi.x - lo.x) / nx; }
    double dy() const { return (hi.y - lo.y) / ny; }
    Vec2 node(int i, int j) const { return {lo.x + i * dx(), lo.y + j * dy()}; }
};

inline SlopeField burgers_field(const PlaneCurveQ& Q, double c, Vec2 lo, Vec2 hi, int nx, int ny) {
    SlopeField f;
    f.nx = nx;
    f.ny = ny;
    f.lo = lo;
    f.hi = hi;
    f.pts.resize((nx + 1) * (ny + 1));
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            Vec2 p = f.node(i, j);
            f.pts[i * (ny + 1) + j] = detail::classify_roots(detail::pxy_coeffs(Q, c, p.x, p.y));
        }
    return f;
}

// Marching squares on the signed indicator; crossings are interpolated on
// indicator * |indicator|, which is linear in the distance to the boundary
// (the root gap closes like sqrt(distance)).
inline std::vector<std::array<Vec2, 2>> frozen_boundary_segments(const PlaneCurveQ& Q, double c,
                                                                 Vec2 lo, Vec2 hi, int grid = 256) {
    SlopeField f = burgers_field(Q, c, lo, hi, grid, grid);
    std::vector<double> F((grid + 1) * (grid + 1));
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
            double lam = f.at(i, j).indicator;
            F[i * (grid + 1) + j] = lam * std::abs(lam);
        }
    auto cross_at = [&](int i1, int j1, int i2, int j2) {
        double f1 = F[i1 * (grid + 1) + j1], f2 = F[i2 * (grid + 1) + j2];
        double t = f1 / (f1 - f2);
        Vec2 a = f.node(i1, j1), b = f.node(i2, j2);
        return Vec2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    };
    std::vector<std::array<Vec2, 2>> segs;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            int idx[4][2] = {{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}};
            std::vector<Vec2> hits;
            for (int e = 0; e < 4; ++e) {
                auto [i1, j1] = idx[e];
                auto [i2, j2] = idx[(e + 1) % 4];
                double f1 = F[i1 * (grid + 1) + j1], f2 = F[i2 * (grid + 1) + j2];
                if ((f1 > 0) != (f2 > 0)) hits.push_back(cross_at(i1, j1, i2, j2));
            }
            if (hits.size() == 2) segs.push_back({hits[0], hits[1]});
            else if (hits.size() == 4) { // saddle cell: pair arbitrarily
                segs.push_back({hits[0], hits[1]});
                segs.push_back({hits[2], hits[3]});
            }
        }
    return segs;
}

inline std::vector<Vec2> frozen_boundary(const PlaneCurveQ& Q, double c, Vec2 lo, Vec2 hi,
                                         int grid = 256) {
    std::vector<Vec2> pts;
    for (auto& s : frozen_boundary_segments(Q, c, lo, hi, grid)) {
        pts.push_back(s[0]);
        pts.push_back(s[1]);
    }
    return pts;
}

// ---------- height recovery from a slope field ----------

// Path-integrates s dx + t dy over the grid (trapezoid rule on edges),
// averaging the row-major and column-major orders.  Returns node heights
// anchored to zero at node (bi, bj).  The largest loop circulation over a
// grid cell is the curl residual; above tol the field is inconsistent.
inline std::vector<double> height_from_slopefield(const SlopeField& f, int bi, int bj,
                                                  double tol = 0.05, double* curl_out = nullptr) {
    int nx = f.nx, ny = f.ny, W = ny + 1;
    double dx = f.dx(), dy = f.dy();
    auto ex = [&](int i, int j) { // integral of s dx over x-edge (i,j)->(i+1,j)
        return 0.5 * (f.at(i, j).s + f.at(i + 1, j).s) * dx;
    };
    auto ey = [&](int i, int j) { // integral of t dy over y-edge (i,j)->(i,j+1)
        return 0.5 * (f.at(i, j).t + f.at(i, j + 1).t) * dy;
    };
    double curl = 0;
    int ci = 0, cj = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double loop = ex(i, j) + ey(i + 1, j) - ex(i, j + 1) - ey(i, j);
            if (std::abs(loop) > curl) { curl = std::abs(loop); ci = i; cj = j; }
        }
    if (curl_out) *curl_out = curl;
    if (curl > tol) {
        Vec2 p = f.node(ci, cj);
        throw std::runtime_error("slope field curl residual " + std::to_string(curl) + " at (" +
                                 std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
    }
    std::vector<double> hr((nx + 1) * W, 0.0), hc((nx + 1) * W, 0.0);
    // row-major: walk row bj from bi, then columns
    for (int i = bi + 1; i <= nx; ++i) hr[i * W + bj] = hr[(i - 1) * W + bj] + ex(i - 1, bj);
    for (int i = bi - 1; i >= 0; --i) hr[i * W + bj] = hr[(i + 1) * W + bj] - ex(i, bj);
    for (int i = 0; i <= nx; ++i) {
        for (int j = bj + 1; j <= ny; ++j) hr[i * W + j] = hr[i * W + j - 1] + ey(i, j - 1);
        for (int j = bj - 1; j >= 0; --j) hr[i * W + j] = hr[i * W + j + 1] - ey(i, j);
    }
    // column-major: walk column bi from bj, then rows
    for (int j = bj + 1; j <= ny; ++j) hc[bi * W + j] = hc[bi * W + j - 1] + ey(bi, j - 1);
    for (int j = bj - 1; j >= 0; --j) hc[bi * W + j] = hc[bi * W + j + 1] - ey(bi, j);
    for (int j = 0; j <= ny; ++j) {
        for (int i = bi + 1; i <= nx; ++i) hc[i * W + j] = hc[(i - 1) * W + j] + ex(i - 1, j);
        for (int i = bi - 1; i >= 0; --i) hc[i * W + j] = hc[(i + 1) * W + j] - ex(i, j);
    }
    for (size_t k = 0; k < hr.size(); ++k) hr[k] = 0.5 * (hr[k] + hc[k]);
    return hr;
}

// ---------- discrete surface-tension minimizer ----------

namespace detail {

inline bool point_in_polygon(const std::vector<Vec2>& poly, double x, double y, double eps = 1e-9) {
    int n = poly.size();
    // boundary counts as inside
    for (int e = 0; e < n; ++e) {
        Vec2 a = poly[e], b = poly[(e + 1) % n];
        double ex = b.x - a.x, ey = b.y - a.y, l2 = ex * ex + ey * ey;
        if (l2 == 0) continue;
        double t = std::max(0.0, std::min(1.0, ((x - a.x) * ex + (y - a.y) * ey) / l2));
        double ddx = x - a.x - t * ex, ddy = y - a.y - t * ey;
        if (ddx * ddx + ddy * ddy < eps * eps) return true;
    }
    bool in = false;
    for (int e = 0; e < n; ++e) {
        Vec2 a = poly[e], b = poly[(e + 1) % n];
        if ((a.y > y) != (b.y > y)) {
            double xc = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (xc > x) in = !in;
        }
    }
    return in;
}

inline bool point_on_polygon_boundary(const std::vector<Vec2>& poly, double x, double y,
                                      double eps = 1e-9) {
    int n = poly.size();
    for (int e = 0; e < n; ++e) {
        Vec2 a = poly[e], b = poly[(e + 1) % n];
        double ex = b.x - a.x, ey = b.y - a.y, l2 = ex * ex + ey * ey;
        if (l2 == 0) continue;
        double t = std::max(0.0, std::min(1.0, ((x - a.x) * ex + (y - a.y) * ey) / l2));
        double ddx = x - a.x - t * ex, ddy = y - a.y - t * ey;
        if (ddx * ddx + ddy * ddy < eps * eps) return true;
    }
    return false;
}

// d sigma / ds at slope (s,t); the log wall at the triangle boundary keeps
// coordinate minima strictly interior.  Arguments are clamped slightly
// inside [0,1] so wall evaluations stay finite (and hugely signed) instead
// of producing inf - inf.
inline double dsigma_ds(double s, double t) {
    double u = std::clamp(1.0 - s - t, 1e-14, 1.0 - 1e-14);
    s = std::clamp(s, 1e-14, 1.0 - 1e-14);
    return std::log(2.0 * std::sin(M_PI * s)) - std::log(2.0 * std::sin(M_PI * u));
}

} // namespace detail

// Piecewise-linear minimizer of sum area * sigma(grad h) on the lattice mesh
// with spacing 1/m, triangulated along the main diagonal.  That triangulation
// turns the slope-triangle constraint into pure difference bounds:
//   0 <= h(v+e1) - h(v),  0 <= h(v+e2) - h(v),  h(v+e1+e2) - h(v) <= 1/m,
// so feasibility envelopes come from Bellman relaxation and each coordinate
// move stays exactly feasible.
struct DiscreteMinimizer {
    int m = 0;
    double del = 0;
    int ilo = 0, jlo = 0, W = 0, H = 0;
    std::vector<int> id; // (i,j) -> vertex index or -1
    std::vector<std::pair<int, int>> ij;
    std::vector<char> fixed;
    std::vector<double> h, hmin, hmax;

    int vid(int i, int j) const {
        if (i < ilo || i >= ilo + W || j < jlo || j >= jlo + H) return -1;
        return id[(i - ilo) * H + (j - jlo)];
    }
    Vec2 pos(int v) const { return {ij[v].first * del, ij[v].second * del}; }

    double triangle_area() const { return del * del / 2.0; }

    // slope of the lower (A,B,D) or upper (A,D,C) triangle of cell (ci,cj);
    // nullopt when the triangle is not fully inside the region
    std::optional<std::pair<double, double>> triangle_slope(int ci, int cj, bool lower) const {
        int a = vid(ci, cj), b = vid(ci + 1, cj), cc = vid(ci, cj + 1), d = vid(ci + 1, cj + 1);
        if (lower) {
            if (a < 0 || b < 0 || d < 0) return std::nullopt;
            return std::make_pair((h[b] - h[a]) / del, (h[d] - h[b]) / del);
        }
        if (a < 0 || cc < 0 || d < 0) return std::nullopt;
        return std::make_pair((h[d] - h[cc]) / del, (h[cc] - h[a]) / del);
    }

    double objective() const {
        double F = 0, A = triangle_area();
        for (auto [i, j] : ij)
            for (int lower = 0; lower < 2; ++lower)
                if (auto st = triangle_slope(i, j, lower)) {
                    double s = std::clamp(st->first, 0.0, 1.0), t = std::clamp(st->second, 0.0, 1.0);
                    if (s + t > 1) { double e = (s + t - 1) / 2; s -= e; t -= e; }
                    F += A * surface_tension_honeycomb(s, t);
                }
        return F;
    }

    // max |dF/dh_v| / (6 * area) over free vertices with a nondegenerate
    // feasible interval; zero at an exact coordinate minimum
    double optimality_residual() const {
        double worst = 0;
        DiscreteMinimizer& self = const_cast<DiscreteMinimizer&>(*this);
        for (size_t v = 0; v < ij.size(); ++v) {
            if (fixed[v]) continue;
            auto [lo, hi] = self.free_interval(v);
            if (hi - lo < 1e-12) continue;
            if (h[v] - lo < 1e-10 || hi - h[v] < 1e-10) continue;
            worst = std::max(worst, std::abs(self.descent_derivative(v, h[v])));
        }
        return worst;
    }

    std::pair<double, double> free_interval(int v) const {
        auto [i, j] = ij[v];
        double lo = -1e300, hi = 1e300;
        auto nb = [&](int di, int dj, bool fwd) {
            int u = vid(i + di, j + dj);
            if (u < 0) return;
            if (fwd) { lo = std::max(lo, h[u] - del); hi = std::min(hi, h[u]); }
            else     { lo = std::max(lo, h[u]);       hi = std::min(hi, h[u] + del); }
        };
        nb(1, 0, true); nb(0, 1, true); nb(1, 1, true);
        nb(-1, 0, false); nb(0, -1, false); nb(-1, -1, false);
        return {lo, hi};
    }

    // derivative of the local objective in h_v, scaled by 1/(6 area)
    double descent_derivative(int v, double hv) const {
        auto [i, j] = ij[v];
        double save = h[v];
        const_cast<DiscreteMinimizer*>(this)->h[v] = hv;
        double g = 0;
        auto add = [&](int ci, int cj, bool lower, double ds, double dt) {
            auto st = triangle_slope(ci, cj, lower);
            if (!st) return;
            auto [s, t] = *st;
            if (ds) g += ds * detail::dsigma_ds(s, t);
            if (dt) g += dt * detail::dsigma_ds(t, s);
        };
        add(i, j, true, -1, 0);      // v = A of lower
        add(i, j, false, 0, -1);     // v = A of upper
        add(i - 1, j, true, 1, -1);  // v = B of lower
        add(i, j - 1, false, -1, 1); // v = C of upper
        add(i - 1, j - 1, true, 0, 1);  // v = D of lower
        add(i - 1, j - 1, false, 1, 0); // v = D of upper
        const_cast<DiscreteMinimizer*>(this)->h[v] = save;
        return g / 6.0;
    }
};

namespace detail {

inline DiscreteMinimizer build_mesh(const std::vector<Vec2>& region,
                                    const std::function<double(double, double)>& boundary_h,
                                    int m) {
    DiscreteMinimizer M;
    M.m = m;
    M.del = 1.0 / m;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (auto& p : region) {
        xlo = std::min(xlo, p.x); xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y);
    }
    M.ilo = (int)std::floor(xlo * m) - 1;
    M.jlo = (int)std::floor(ylo * m) - 1;
    M.W = (int)std::ceil(xhi * m) - M.ilo + 2;
    M.H = (int)std::ceil(yhi * m) - M.jlo + 2;
    M.id.assign(M.W * M.H, -1);
    for (int i = M.ilo; i < M.ilo + M.W; ++i)
        for (int j = M.jlo; j < M.jlo + M.H; ++j) {
            double x = i * M.del, y = j * M.del;
            if (!point_in_polygon(region, x, y)) continue;
            M.id[(i - M.ilo) * M.H + (j - M.jlo)] = (int)M.ij.size();
            M.ij.push_back({i, j});
        }
    int n = M.ij.size();
    M.fixed.assign(n, 0);
    M.h.assign(n, 0.0);
    for (int v = 0; v < n; ++v) {
        auto [i, j] = M.ij[v];
        double x = i * M.del, y = j * M.del;
        if (point_on_polygon_boundary(region, x, y)) {
            M.fixed[v] = 1;
            M.h[v] = boundary_h(x, y);
        }
    }
    // feasibility envelopes: hmax by relaxing upper bounds downward, hmin by
    // the same relaxation on -h
    const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
    auto relax_upper = [&](std::vector<double>& up) {
        bool any = true;
        while (any) {
            any = false;
            for (int rep = 0; rep < 2; ++rep)
                for (int vv = 0; vv < n; ++vv) {
                    int v = rep ? n - 1 - vv : vv;
                    auto [i, j] = M.ij[v];
                    for (auto& d : dirs) {
                        int w = M.vid(i + d[0], j + d[1]);
                        if (w < 0) continue;
                        if (up[w] > up[v] + M.del + 1e-15) { up[w] = up[v] + M.del; any = true; }
                        if (up[v] > up[w] + 1e-15) { up[v] = up[w]; any = true; }
                    }
                }
        }
    };
    M.hmax.assign(n, 1e18);
    std::vector<double> neg(n, 1e18);
    for (int v = 0; v < n; ++v)
        if (M.fixed[v]) { M.hmax[v] = M.h[v]; neg[v] = -M.h[v]; }
    relax_upper(M.hmax);
    // -h satisfies: (-h)(v) <= (-h)(w) + del and (-h)(w) <= (-h)(v) for w = v + dir
    {
        bool any = true;
        while (any) {
            any = false;
            for (int rep = 0; rep < 2; ++rep)
                for (int vv = 0; vv < n; ++vv) {
                    int v = rep ? n - 1 - vv : vv;
                    auto [i, j] = M.ij[v];
                    for (auto& d : dirs) {
                        int w = M.vid(i + d[0], j + d[1]);
                        if (w < 0) continue;
                        if (neg[w] > neg[v] + 1e-15) { neg[w] = neg[v]; any = true; }
                        if (neg[v] > neg[w] + M.del + 1e-15) { neg[v] = neg[w] + M.del; any = true; }
                    }
                }
        }
    }
    M.hmin.resize(n);
    for (int v = 0; v < n; ++v) M.hmin[v] = -neg[v];
    for (int v = 0; v < n; ++v) {
        bool bad = M.hmin[v] > M.hmax[v] + 1e-9;
        if (M.fixed[v])
            bad = bad || M.hmax[v] < M.h[v] - 1e-9 || M.hmin[v] > M.h[v] + 1e-9;
        if (bad) throw std::runtime_error("no spanning surface");
    }
    for (int v = 0; v < n; ++v)
        if (!M.fixed[v]) M.h[v] = 0.5 * (M.hmin[v] + M.hmax[v]);
    return M;
}

// exact coordinate minimization: bisection on the monotone derivative
inline void descend(DiscreteMinimizer& M, int max_sweeps, double ftol) {
    int n = M.ij.size();
    double Fprev = M.objective();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int vv = 0; vv < n; ++vv) {
            int v = (sweep % 2) ? n - 1 - vv : vv;
            if (M.fixed[v]) continue;
            auto [lo, hi] = M.free_interval(v);
            if (hi - lo < 1e-14) continue;
            double a = lo, b = hi;
            for (int it = 0; it < 52 && b - a > 1e-15; ++it) {
                double mid = 0.5 * (a + b);
                if (M.descent_derivative(v, mid) > 0) b = mid;
                else a = mid;
            }
            M.h[v] = 0.5 * (a + b);
        }
        if (sweep % 4 == 3) {
            double F = M.objective();
            if (Fprev - F < ftol * (1.0 + std::abs(F))) return;
            Fprev = F;
        }
    }
}

// PL interpolation from the coarse mesh (half the resolution), then clamp
// back into the fine feasible box and repair residual constraint violations
inline void prolong(const DiscreteMinimizer& C, DiscreteMinimizer& F) {
    for (size_t v = 0; v < F.ij.size(); ++v) {
        if (F.fixed[v]) continue;
        auto [i, j] = F.ij[v];
        int ci = (int)std::floor(i / 2.0), cj = (int)std::floor(j / 2.0);
        double fx = i / 2.0 - ci, fy = j / 2.0 - cj;
        int a = C.vid(ci, cj), b = C.vid(ci + 1, cj), c = C.vid(ci, cj + 1),
            d = C.vid(ci + 1, cj + 1);
        double val;
        if (fx >= fy && a >= 0 && b >= 0 && d >= 0)
            val = C.h[a] + (C.h[b] - C.h[a]) * fx + (C.h[d] - C.h[b]) * fy;
        else if (fx < fy && a >= 0 && c >= 0 && d >= 0)
            val = C.h[a] + (C.h[d] - C.h[c]) * fx + (C.h[c] - C.h[a]) * fy;
        else if (a >= 0)
            val = C.h[a];
        else
            val = 0.5 * (F.hmin[v] + F.hmax[v]);
        F.h[v] = std::clamp(val, F.hmin[v], F.hmax[v]);
    }
    const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
    for (int pass = 0; pass < 400; ++pass) {
        bool any = false;
        for (size_t v = 0; v < F.ij.size(); ++v) {
            auto [i, j] = F.ij[v];
            for (auto& dd : dirs) {
                int w = F.vid(i + dd[0], j + dd[1]);
                if (w < 0) continue;
                double diff = F.h[w] - F.h[v];
                if (diff < -1e-15) {
                    if (!F.fixed[w]) { F.h[w] = F.h[v]; any = true; }
                    else if (!F.fixed[v]) { F.h[v] = F.h[w]; any = true; }
                } else if (diff > F.del + 1e-15) {
                    if (!F.fixed[w]) { F.h[w] = F.h[v] + F.del; any = true; }
                    else if (!F.fixed[v]) { F.h[v] = F.h[w] - F.del; any = true; }
                }
            }
        }
        if (!any) break;
    }
}

} // namespace detail

inline DiscreteMinimizer minimize_surface_tension(
    const std::vector<Vec2>& region, const std::function<double(double, double)>& boundary_h,
    int mesh, int max_sweeps = 1600, double ftol = 1e-12) {
    std::vector<int> levels{mesh};
    while (levels.back() % 2 == 0 && levels.back() / 2 >= 4) levels.push_back(levels.back() / 2);
    std::reverse(levels.begin(), levels.end());
    DiscreteMinimizer M = detail::build_mesh(region, boundary_h, levels[0]);
    detail::descend(M, max_sweeps, ftol);
    for (size_t k = 1; k < levels.size(); ++k) {
        DiscreteMinimizer F = detail::build_mesh(region, boundary_h, levels[k]);
        detail::prolong(M, F);
        detail::descend(F, max_sweeps, ftol);
        M = std::move(F);
    }
    return M;
}

// ---------- tangency fit for 3n-gon boundaries ----------

// Edge classes in lattice coordinates: vertical (0,±1), horizontal (±1,0),
// diagonal ±(1,1).  The frozen boundary is the dual curve of Q, so tangency
// to an edge line is a linear condition on the coefficients:
//   vertical x = x0   ->  Q(-1, -x0) = 0
//   horizontal y = y0 ->  Q(0, -y0) = 0
//   diagonal x - y = m -> sum_{i+j=n} c_ij m^j = 0   (dual point at infinity)
struct TangencyFit {
    PlaneCurveQ Q;
    double residual = 0; // ||A c|| relative to the largest singular value
    int kernel_dim = 0;
};

namespace detail {

struct TangencyRows {
    Eigen::MatrixXd A;
    int n = 0, M = 0;
};

inline int coeff_index(int n, int i, int j) {
    int k = 0;
    for (int a = 0; a < i; ++a) k += n + 1 - a;
    return k + j;
}

inline TangencyRows tangency_rows(const std::vector<Vec2>& poly) {
    int ns = poly.size();
    if (ns < 3 || ns % 3 != 0)
        throw std::runtime_error("polygon must have 3n edges (zero-length edges allowed)");
    TangencyRows R;
    R.n = ns / 3;
    R.M = (R.n + 1) * (R.n + 2) / 2;
    std::vector<Eigen::RowVectorXd> rows;
    for (int e = 0; e < ns; ++e) {
        Vec2 p = poly[e], q = poly[(e + 1) % ns];
        double dx = q.x - p.x, dy = q.y - p.y;
        if (dx == 0 && dy == 0) continue;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(R.M);
        if (std::abs(dx) < 1e-12) {
            for (int i = 0; i <= R.n; ++i)
                for (int j = 0; i + j <= R.n; ++j)
                    row[coeff_index(R.n, i, j)] = std::pow(-1.0, i) * std::pow(-p.x, j);
        } else if (std::abs(dy) < 1e-12) {
            for (int j = 0; j <= R.n; ++j) row[coeff_index(R.n, 0, j)] = std::pow(-p.y, j);
        } else if (std::abs(dx - dy) < 1e-12) {
            double mm = p.x - p.y;
            for (int j = 0; j <= R.n; ++j) row[coeff_index(R.n, R.n - j, j)] = std::pow(mm, j);
        } else {
            throw std::runtime_error("edge not in a cube-root direction");
        }
        rows.push_back(row);
    }
    R.A.resize(rows.size(), R.M);
    for (size_t r = 0; r < rows.size(); ++r) R.A.row(r) = rows[r];
    return R;
}

inline PlaneCurveQ curve_from_vector(int n, Eigen::VectorXd v) {
    int big = 0;
    for (int k = 1; k < v.size(); ++k)
        if (std::abs(v[k]) > std::abs(v[big])) big = k;
    v /= v[big];
    int fn = 0;
    while (fn < v.size() && std::abs(v[fn]) < 1e-9) ++fn;
    if (fn < v.size() && v[fn] < 0) v = -v;
    std::vector<std::vector<double>> c(n + 1);
    int k = 0;
    for (int i = 0; i <= n; ++i) {
        c[i].resize(n + 1 - i);
        for (int j = 0; i + j <= n; ++j) c[i][j] = v[k++];
    }
    return PlaneCurveQ(n, c);
}

// score a candidate cubic by tracing its frozen boundary over the polygon
// box: tangency feet must come close to every edge segment, the liquid
// region must be nonempty, and no point may be branch-ambiguous
inline double trace_score(const PlaneCurveQ& Q, const std::vector<Vec2>& poly) {
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (auto& p : poly) {
        xlo = std::min(xlo, p.x); xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y);
    }
    double padx = 0.05 * (xhi - xlo), pady = 0.05 * (yhi - ylo);
    std::vector<std::array<Vec2, 2>> segs;
    int liquid_inside = 0;
    try {
        const int NG = 72;
        SlopeField f = burgers_field(Q, 0.0, {xlo - padx, ylo - pady}, {xhi + padx, yhi + pady}, NG, NG);
        for (int i = 0; i <= NG; ++i)
            for (int j = 0; j <= NG; ++j) {
                auto& b = f.at(i, j);
                Vec2 p = f.node(i, j);
                if (b.liquid && point_in_polygon(poly, p.x, p.y)) ++liquid_inside;
            }
        std::vector<double> F((NG + 1) * (NG + 1));
        for (int i = 0; i <= NG; ++i)
            for (int j = 0; j <= NG; ++j) {
                double lam = f.at(i, j).indicator;
                F[i * (NG + 1) + j] = lam * std::abs(lam);
            }
        for (int i = 0; i < NG; ++i)
            for (int j = 0; j <= NG; ++j) {
                double f1 = F[i * (NG + 1) + j], f2 = F[(i + 1) * (NG + 1) + j];
                if ((f1 > 0) != (f2 > 0)) {
                    double t = f1 / (f1 - f2);
                    Vec2 a = f.node(i, j), b2 = f.node(i + 1, j);
                    segs.push_back({Vec2{a.x + t * (b2.x - a.x), a.y}, Vec2{0, 0}});
                }
            }
        for (int j = 0; j < NG; ++j)
            for (int i = 0; i <= NG; ++i) {
                double f1 = F[i * (NG + 1) + j], f2 = F[i * (NG + 1) + j + 1];
                if ((f1 > 0) != (f2 > 0)) {
                    double t = f1 / (f1 - f2);
                    Vec2 a = f.node(i, j), b2 = f.node(i, j + 1);
                    segs.push_back({Vec2{a.x, a.y + t * (b2.y - a.y)}, Vec2{0, 0}});
                }
            }
    } catch (const std::runtime_error&) {
        return 1e6; // ambiguous branch somewhere
    }
    if (liquid_inside == 0 || segs.empty()) return 1e5;
    double score = 0;
    int ns = poly.size();
    for (int e = 0; e < ns; ++e) {
        Vec2 p = poly[e], q = poly[(e + 1) % ns];
        double ex = q.x - p.x, ey = q.y - p.y, L = std::hypot(ex, ey);
        if (L == 0) continue;
        double best = 1.0;
        for (auto& sg : segs) {
            double tx = sg[0].x - p.x, ty = sg[0].y - p.y;
            double proj = (tx * ex + ty * ey) / (L * L);
            if (proj < -0.05 || proj > 1.05) continue;
            best = std::min(best, std::abs(ex * ty - ey * tx) / L);
        }
        score += best;
    }
    return score;
}

} // namespace detail

inline TangencyFit fit_tangency_curve(const std::vector<Vec2>& polygon) {
    auto R = detail::tangency_rows(polygon);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R.A, Eigen::ComputeFullV);
    auto S = svd.singularValues();
    double smax = S[0];
    std::vector<Eigen::VectorXd> kernel;
    for (int k = 0; k < R.M; ++k)
        if (k >= S.size() || S[k] < 1e-9 * smax) kernel.push_back(svd.matrixV().col(k));
    TangencyFit out;
    out.kernel_dim = (int)kernel.size();
    if (kernel.empty())
        throw std::runtime_error("degenerate or taut-edge polygon: no tangent curve of degree " +
                                 std::to_string(R.n));
    Eigen::VectorXd chosen = kernel[0];
    if (kernel.size() >= 2) {
        if (R.n == 3 && kernel.size() == 2) {
            // The condition matrix cannot see one direction: any multiple of
            // u(1+u) vanishes at every vertical/horizontal dual point and has
            // no top-degree part.  The true curve is the rational (singular)
            // pencil member; find singular members by Newton on
            // (Q, Q_u, Q_v) and keep the one whose trace fits the polygon.
            std::vector<std::pair<double, Eigen::VectorXd>> cands;
            auto member = [&](double th) -> Eigen::VectorXd {
                return std::cos(th) * kernel[0] + std::sin(th) * kernel[1];
            };
            double vlo = 1e300, vhi = -1e300;
            for (auto& p : polygon) {
                vlo = std::min({vlo, -p.x, -p.y});
                vhi = std::max({vhi, -p.x, -p.y});
            }
            std::vector<std::array<double, 3>> found;
            for (double th0 = 0.15; th0 < M_PI; th0 += 0.3)
                for (double u0 = -2.5; u0 <= 1.51; u0 += 0.8)
                    for (double v0 = vlo - 1; v0 <= vhi + 1.01; v0 += 0.8) {
                        double u = u0, v = v0, th = th0;
                        bool ok = true;
                        for (int it = 0; it < 60; ++it) {
                            Eigen::VectorXd mv = member(th), md = -std::sin(th) * kernel[0] +
                                                                  std::cos(th) * kernel[1];
                            auto mkq = [&](const Eigen::VectorXd& w) {
                                std::vector<std::vector<double>> cc(4);
                                int k = 0;
                                for (int i = 0; i <= 3; ++i) {
                                    cc[i].resize(4 - i);
                                    for (int j = 0; i + j <= 3; ++j) cc[i][j] = w[k++];
                                }
                                return PlaneCurveQ(3, cc);
                            };
                            PlaneCurveQ A = mkq(mv), B = mkq(md);
                            double Qv_, Qu_, Quu, Quv, Qvv, Pu, Pv;
                            double Qval = A.eval(u, v), Pval = B.eval(u, v);
                            A.gradient(u, v, Qu_, Qv_);
                            A.hessian(u, v, Quu, Quv, Qvv);
                            B.gradient(u, v, Pu, Pv);
                            Eigen::Matrix3d J;
                            J << Qu_, Qv_, Pval, Quu, Quv, Pu, Quv, Qvv, Pv;
                            Eigen::Vector3d Fv(Qval, Qu_, Qv_);
                            Eigen::Vector3d d = J.colPivHouseholderQr().solve(Fv);
                            if (!d.allFinite()) { ok = false; break; }
                            u -= d[0]; v -= d[1]; th -= d[2];
                            if (std::abs(u) > 60 || std::abs(v) > 60) { ok = false; break; }
                            if (d.norm() < 1e-13) break;
                        }
                        if (!ok) continue;
                        PlaneCurveQ Qc = detail::curve_from_vector(3, member(th));
                        double qu, qv;
                        Qc.gradient(u, v, qu, qv);
                        if (std::abs(Qc.eval(u, v)) + std::abs(qu) + std::abs(qv) > 1e-8) continue;
                        th = std::fmod(th, M_PI);
                        if (th < 0) th += M_PI;
                        bool dup = false;
                        for (auto& f : found)
                            if (std::abs(f[0] - th) < 1e-5 && std::abs(f[1] - u) < 1e-4 &&
                                std::abs(f[2] - v) < 1e-4) dup = true;
                        if (dup) continue;
                        found.push_back({th, u, v});
                        cands.push_back({th, member(th)});
                    }
            double bestScore = 1e300;
            for (auto& [th, vec] : cands) {
                PlaneCurveQ Qc = detail::curve_from_vector(3, vec);
                double sc = detail::trace_score(Qc, polygon);
                if (sc < bestScore) { bestScore = sc; chosen = vec; }
            }
            if (cands.empty() || bestScore >= 1e5)
                throw std::runtime_error("degenerate or taut-edge polygon: no rational fit");
        } else if (R.n <= 2) {
            // degree drop: prefer the kernel member with the smallest
            // top-degree part (accepts collapsed hexagons)
            Eigen::MatrixXd T(R.n + 1, kernel.size());
            for (size_t k = 0; k < kernel.size(); ++k)
                for (int j = 0; j <= R.n; ++j)
                    T(j, k) = kernel[k][detail::coeff_index(R.n, R.n - j, j)];
            Eigen::JacobiSVD<Eigen::MatrixXd> tsvd(T, Eigen::ComputeFullV);
            Eigen::VectorXd y = tsvd.matrixV().col(kernel.size() - 1);
            chosen.setZero();
            for (size_t k = 0; k < kernel.size(); ++k) chosen += y[k] * kernel[k];
        } else {
            throw std::runtime_error("tangency fit beyond degree 3 needs " +
                                     std::to_string((R.n - 1) * (R.n - 2) / 2) +
                                     " node conditions; not implemented");
        }
    }
    out.Q = detail::curve_from_vector(R.n, chosen);
    Eigen::VectorXd cv(R.M);
    int k = 0;
    for (int i = 0; i <= R.n; ++i)
        for (int j = 0; i + j <= R.n; ++j) cv[k++] = out.Q.c[i][j];
    out.residual = (R.A * cv).norm() / (smax * cv.norm());
    return out;
}

// Tangency foot of each polygon edge line on the dual (frozen boundary)
// curve.  At a node of Q (two edges on one supporting line) the two branch
// tangents give two feet; each edge keeps the foot nearest its own segment.
inline std::vector<Vec2> tangency_feet(const PlaneCurveQ& Q, const std::vector<Vec2>& polygon) {
    int ns = polygon.size();
    std::vector<Vec2> feet(ns, {1e300, 1e300});
    for (int e = 0; e < ns; ++e) {
        Vec2 p = polygon[e], q = polygon[(e + 1) % ns];
        double dx = q.x - p.x, dy = q.y - p.y;
        if (dx == 0 && dy == 0) continue;
        std::vector<Vec2> cand;
        if (std::abs(dx) < 1e-12 || std::abs(dy) < 1e-12) {
            double u0 = std::abs(dx) < 1e-12 ? -1.0 : 0.0;
            double v0 = std::abs(dx) < 1e-12 ? -p.x : -p.y;
            double qu, qv;
            Q.gradient(u0, v0, qu, qv);
            double scale = 0;
            for (auto& row : Q.c)
                for (double cc : row) scale = std::max(scale, std::abs(cc));
            if (std::hypot(qu, qv) > 1e-7 * scale) {
                // tangent line of Q at the dual point, mapped back to (x,y)
                double xy = -qu / qv;
                double yy = -(qu * u0 + qv * v0) / qv;
                cand.push_back({yy + xy, yy});
            } else {
                // node: branch directions solve Quu + 2 Quv r + Qvv r^2 = 0
                double quu, quv, qvv;
                Q.hessian(u0, v0, quu, quv, qvv);
                double disc = quv * quv - quu * qvv;
                if (disc >= 0) {
                    for (double sgn : {1.0, -1.0}) {
                        double r;
                        if (std::abs(qvv) > 1e-12) r = (-quv + sgn * std::sqrt(disc)) / qvv;
                        else if (sgn > 0 && std::abs(quv) > 1e-12) r = -quu / (2 * quv);
                        else continue;
                        // branch with dv/du = r: envelope point has x - y = r,
                        // y = r u0 - v0
                        cand.push_back({r * u0 - v0 + r, r * u0 - v0});
                    }
                }
            }
        } else {
            // diagonal: dual point at infinity [1 : m : 0]; tangent line from
            // the homogenized gradient
            double mm = p.x - p.y;
            double qu2 = 0, qv2 = 0, qw = 0;
            int n = Q.n;
            for (int i = 0; i <= n; ++i)
                for (int j = 0; i + j <= n; ++j) {
                    int wexp = n - i - j;
                    if (wexp == 1) qw += Q.c[i][j] * std::pow(mm, j);
                    if (wexp == 0) {
                        if (i) qu2 += Q.c[i][j] * i * std::pow(mm, j);
                        if (j) qv2 += Q.c[i][j] * j * std::pow(mm, j - 1);
                    }
                }
            if (std::abs(qv2) > 1e-12) {
                double lam = -1.0 / qv2;
                double xy = lam * qu2, yv = -lam * qw;
                cand.push_back({yv + xy, yv});
            }
        }
        double bestd = 1e300;
        for (auto& f : cand) {
            double ex = dx, ey = dy, L2 = ex * ex + ey * ey;
            double t = ((f.x - p.x) * ex + (f.y - p.y) * ey) / L2;
            double tcl = std::clamp(t, 0.0, 1.0);
            double d = std::hypot(f.x - p.x - tcl * ex, f.y - p.y - tcl * ey);
            if (d < bestd) { bestd = d; feet[e] = f; }
        }
    }
    return feet;
}

} // namespace dimer
