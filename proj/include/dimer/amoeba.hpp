#pragma once

#include "dimer/torus.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <queue>
#include <random>

namespace dimer {

using Cplx = std::complex<double>;

// ---------- polynomial roots ----------

// All complex roots of c[0] + c[1] w + ... + c[d] w^d. Degrees 1 and 2 are
// closed-form; higher degrees use Aberth-Ehrlich. Exact zero leading or
// trailing coefficients are stripped (trailing zeros contribute roots at 0).
inline std::vector<Cplx> poly_roots(std::vector<Cplx> c) {
    std::vector<Cplx> roots;
    while (!c.empty() && std::abs(c.back()) == 0.0) c.pop_back();
    size_t t0 = 0;
    while (t0 < c.size() && std::abs(c[t0]) == 0.0) ++t0;
    roots.assign(t0, Cplx(0, 0));
    if (c.size() <= t0 + 1) return roots;
    std::vector<Cplx> a(c.begin() + t0, c.end());
    int d = (int)a.size() - 1;
    if (d == 1) {
        roots.push_back(-a[0] / a[1]);
        return roots;
    }
    if (d == 2) {
        Cplx disc = std::sqrt(a[1] * a[1] - 4.0 * a[2] * a[0]);
        // pick the sign that avoids cancellation
        Cplx q = (std::real(std::conj(a[1]) * disc) >= 0) ? -0.5 * (a[1] + disc)
                                                          : -0.5 * (a[1] - disc);
        roots.push_back(q / a[2]);
        roots.push_back(a[0] / q);
        return roots;
    }
    double scale = 0;
    for (int k = 0; k < d; ++k) scale = std::max(scale, std::abs(a[k] / a[d]));
    double r = 1.0 + scale;
    std::vector<Cplx> w(d);
    for (int i = 0; i < d; ++i) {
        double ang = 2 * M_PI * i / d + 0.4;
        w[i] = std::pow(r, 0.7) * Cplx(std::cos(ang), std::sin(ang));
    }
    for (int it = 0; it < 120; ++it) {
        double moved = 0;
        for (int i = 0; i < d; ++i) {
            Cplx p = a[d], dp = 0;
            for (int k = d - 1; k >= 0; --k) {
                dp = dp * w[i] + p;
                p = p * w[i] + a[k];
            }
            if (std::abs(dp) == 0.0) {
                w[i] += Cplx(1e-8, 1e-8);
                moved = 1;
                continue;
            }
            Cplx N = p / dp, S = 0;
            for (int j = 0; j < d; ++j)
                if (j != i) S += 1.0 / (w[i] - w[j]);
            Cplx delta = N / (1.0 - N * S);
            w[i] -= delta;
            moved = std::max(moved, std::abs(delta) / (1.0 + std::abs(w[i])));
        }
        if (moved < 1e-14) break;
    }
    roots.insert(roots.end(), w.begin(), w.end());
    return roots;
}

// ---------- Laurent polynomial in double precision ----------

struct LaurentD {
    struct Term {
        int ez, ew;
        double c;
    };
    std::vector<Term> terms;
    int wlo = 0, whi = 0, zlo = 0, zhi = 0;

    explicit LaurentD(const Laurent2& P) {
        if (P.empty()) throw std::invalid_argument("zero polynomial");
        bool first = true;
        for (auto& [e, q] : P) {
            terms.push_back({e.first, e.second, to_double(q)});
            if (first) {
                zlo = zhi = e.first;
                wlo = whi = e.second;
                first = false;
            } else {
                zlo = std::min(zlo, e.first);
                zhi = std::max(zhi, e.first);
                wlo = std::min(wlo, e.second);
                whi = std::max(whi, e.second);
            }
        }
    }

    LaurentD transpose() const {
        LaurentD t(*this);
        for (auto& tm : t.terms) std::swap(tm.ez, tm.ew);
        std::swap(t.zlo, t.wlo);
        std::swap(t.zhi, t.whi);
        return t;
    }

    // coefficients of w^wlo * (c[0] + ... + c[d] w^d) at a fixed z
    std::vector<Cplx> w_coeffs(Cplx z) const {
        std::vector<Cplx> zp(zhi - zlo + 1);
        Cplx p = std::pow(z, zlo);
        for (int k = 0; k <= zhi - zlo; ++k, p *= z) zp[k] = p;
        std::vector<Cplx> c(whi - wlo + 1, Cplx(0, 0));
        for (auto& tm : terms) c[tm.ew - wlo] += tm.c * zp[tm.ez - zlo];
        return c;
    }

    Cplx eval(Cplx z, Cplx w) const {
        Cplx s = 0;
        for (auto& tm : terms) s += tm.c * std::pow(z, tm.ez) * std::pow(w, tm.ew);
        return s;
    }
};

// ---------- Newton polygon ----------

struct NewtonPolygon {
    std::vector<std::pair<int, int>> hull; // counterclockwise, no repeats

    bool contains(double s, double t, double tol = 1e-9) const {
        if (hull.size() == 1)
            return std::abs(s - hull[0].first) <= tol && std::abs(t - hull[0].second) <= tol;
        for (size_t i = 0; i < hull.size(); ++i) {
            auto [ax, ay] = hull[i];
            auto [bx, by] = hull[(i + 1) % hull.size()];
            if ((bx - ax) * (t - ay) - (by - ay) * (s - ax) < -tol) return false;
        }
        return true;
    }

    bool strictly_inside(double s, double t, double tol = 1e-9) const {
        if (hull.size() < 3) return false;
        for (size_t i = 0; i < hull.size(); ++i) {
            auto [ax, ay] = hull[i];
            auto [bx, by] = hull[(i + 1) % hull.size()];
            if ((bx - ax) * (t - ay) - (by - ay) * (s - ax) <= tol) return false;
        }
        return true;
    }
};

inline NewtonPolygon newton_polygon(const Laurent2& P) {
    std::vector<std::pair<int, int>> pts;
    for (auto& [e, q] : P)
        if (q != 0) pts.push_back(e);
    if (pts.empty()) throw std::invalid_argument("zero polynomial");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    NewtonPolygon np;
    if (pts.size() <= 2) {
        np.hull = pts;
        return np;
    }
    auto cross = [](std::pair<int, int> o, std::pair<int, int> a, std::pair<int, int> b) {
        return (long long)(a.first - o.first) * (b.second - o.second) -
               (long long)(a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<int, int>> h(2 * pts.size());
    size_t k = 0;
    for (auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    size_t lower = k + 1;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        while (k >= lower && cross(h[k - 2], h[k - 1], *it) <= 0) --k;
        h[k++] = *it;
    }
    h.resize(k - 1);
    np.hull = h;
    return np;
}

// ---------- Ronkin function ----------

// One-variable Jensen reduction: the mean of log|f(e^{Y+i phi})| over phi for
// a polynomial f with roots r_j is log|lead| + sum_j max(Y, log|r_j|), so the
// torus average of log|P| needs only a single integral over arg z.
namespace detail {

inline double jensen_slice(const LaurentD& L, double X, double theta, double Y) {
    Cplx z = std::exp(Cplx(X, theta));
    auto c = L.w_coeffs(z);
    int top = (int)c.size() - 1;
    while (top > 0 && std::abs(c[top]) == 0.0) --top;
    double v = L.wlo * Y + std::log(std::abs(c[top]));
    auto roots = poly_roots(std::vector<Cplx>(c.begin(), c.begin() + top + 1));
    for (auto& r : roots) {
        double ar = std::abs(r);
        v += (ar == 0.0) ? Y : std::max(Y, std::log(ar));
    }
    return v;
}

} // namespace detail

inline double ronkin(const Laurent2& P, double X, double Y, double tol = 1e-10) {
    LaurentD L(P);
    if (L.terms.size() == 1)
        return std::log(std::abs(L.terms[0].c)) + L.terms[0].ez * X + L.terms[0].ew * Y;
    auto f = [&](double theta) { return detail::jensen_slice(L, X, theta, Y); };
    double err = 0;
    double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, 0.0, 2 * M_PI, 14, tol, &err);
    return I / (2 * M_PI);
}

inline double free_energy(const Laurent2& P) { return ronkin(P, 0.0, 0.0); }

// ---------- Lobachevsky function and surface tension ----------

// L(x) = -int_0^x log|2 sin t| dt. Split off the log(2t) singularity and sum
// the zeta series of log(sin t / t); odd and pi-periodic reduction first.
inline double lobachevsky(double x) {
    static const std::array<double, 40> z2 = [] {
        std::array<double, 40> a{};
        for (int m = 1; m < 40; ++m) a[m] = boost::math::zeta<double>(2 * m);
        return a;
    }();
    double sgn = 1;
    x = std::fmod(x, M_PI);
    if (x < 0) {
        x += M_PI;
    }
    if (x > M_PI / 2) {
        x = M_PI - x;
        sgn = -1;
    }
    if (x < 1e-300) return 0.0;
    double s = x - x * std::log(2 * x);
    double q = (x / M_PI) * (x / M_PI), qp = q;
    for (int m = 1; m < 40; ++m) {
        double term = z2[m] / (m * (2 * m + 1)) * qp * x;
        s += term;
        if (term < 1e-17 * std::abs(s)) break;
        qp *= q;
    }
    return sgn * s;
}

inline double surface_tension_honeycomb(double s, double t) {
    double u = 1 - s - t;
    if (s < -1e-12 || t < -1e-12 || u < -1e-12)
        throw std::domain_error("slope infeasible");
    return -(lobachevsky(M_PI * s) + lobachevsky(M_PI * t) + lobachevsky(M_PI * u)) / M_PI;
}

// ---------- Legendre duality ----------

struct LegendrePair {
    double s = 0, t = 0, sigma = 0;
};

// (s,t) = grad R by five-point central differences; sigma from the duality
// identity -sigma(s,t) = R - sX - tY.
inline LegendrePair legendre_pair(const Laurent2& P, double X, double Y, double h = 0.02) {
    auto R = [&](double x, double y) { return ronkin(P, x, y, 1e-11); };
    LegendrePair out;
    out.s = (8 * (R(X + h, Y) - R(X - h, Y)) - (R(X + 2 * h, Y) - R(X - 2 * h, Y))) / (12 * h);
    out.t = (8 * (R(X, Y + h) - R(X, Y - h)) - (R(X, Y + 2 * h) - R(X, Y - 2 * h))) / (12 * h);
    out.sigma = out.s * X + out.t * Y - R(X, Y);
    return out;
}

// ---------- amoeba raster and membership ----------

struct AmoebaRaster {
    double Xmin = 0, Xmax = 0, Ymin = 0, Ymax = 0;
    int nx = 0, ny = 0;
    std::vector<uint8_t> member;
    std::vector<int32_t> comp; // complement component id, -1 on the amoeba
    struct Component {
        int id = 0;
        bool bounded = false;
        int cells = 0;
        std::pair<int, int> dual{0, 0}; // lattice point of N(P) via grad R
    };
    std::vector<Component> components;

    int idx(int i, int j) const { return j * nx + i; }
    double cellX(int i) const { return Xmin + (i + 0.5) * (Xmax - Xmin) / nx; }
    double cellY(int j) const { return Ymin + (j + 0.5) * (Ymax - Ymin) / ny; }
    int cellI(double X) const { return (int)std::floor((X - Xmin) / (Xmax - Xmin) * nx); }
    int cellJ(double Y) const { return (int)std::floor((Y - Ymin) / (Ymax - Ymin) * ny); }
};

namespace detail {

// sorted log|w-roots| over the circle |z| = e^X; values clamped to +-big
inline void sorted_branch_logs(const LaurentD& L, double X, double theta,
                               std::vector<double>& out) {
    Cplx z = std::exp(Cplx(X, theta));
    auto c = L.w_coeffs(z);
    out.clear();
    auto roots = poly_roots(c);
    for (auto& r : roots) {
        double ar = std::abs(r);
        out.push_back(ar == 0.0 ? -1e30 : std::log(ar));
    }
    for (int k = (int)roots.size(); k < L.whi - L.wlo; ++k) out.push_back(1e30);
    std::sort(out.begin(), out.end());
}

// paint one scan direction: for each grid column in X, walk the circle and
// fill the vertical spans swept by each sorted root branch
inline void paint_scan(const LaurentD& L, AmoebaRaster& A, bool transposed, int oversample) {
    int ni = transposed ? A.ny : A.nx;
    int nj = transposed ? A.nx : A.ny;
    double lo = transposed ? A.Ymin : A.Xmin, hi = transposed ? A.Ymax : A.Xmax;
    double jlo = transposed ? A.Xmin : A.Ymin, jhi = transposed ? A.Xmax : A.Ymax;
    int nth = oversample;
    std::vector<double> prev, cur;
    for (int i = 0; i < ni; ++i) {
        double X = lo + (i + 0.5) * (hi - lo) / ni;
        prev.clear();
        for (int a = 0; a <= nth; ++a) {
            double theta = 2 * M_PI * a / nth;
            sorted_branch_logs(L, X, theta, cur);
            if (!prev.empty() && prev.size() == cur.size()) {
                for (size_t k = 0; k < cur.size(); ++k) {
                    double y0 = std::min(prev[k], cur[k]), y1 = std::max(prev[k], cur[k]);
                    if (y1 < jlo || y0 > jhi) continue;
                    int j0 = std::clamp((int)std::floor((y0 - jlo) / (jhi - jlo) * nj), 0, nj - 1);
                    int j1 = std::clamp((int)std::floor((y1 - jlo) / (jhi - jlo) * nj), 0, nj - 1);
                    for (int j = j0; j <= j1; ++j)
                        A.member[transposed ? A.idx(j, i) : A.idx(i, j)] = 1;
                }
            }
            std::swap(prev, cur);
        }
    }
}

} // namespace detail

inline AmoebaRaster amoeba_raster(const Laurent2& P, double Xmin, double Xmax, double Ymin,
                                  double Ymax, int nx, int ny, int oversample = 0) {
    AmoebaRaster A;
    A.Xmin = Xmin;
    A.Xmax = Xmax;
    A.Ymin = Ymin;
    A.Ymax = Ymax;
    A.nx = nx;
    A.ny = ny;
    A.member.assign((size_t)nx * ny, 0);
    A.comp.assign((size_t)nx * ny, -1);
    LaurentD L(P);
    if (L.terms.size() > 1) {
        if (oversample == 0) oversample = std::max(2 * ny, 512);
        detail::paint_scan(L, A, false, oversample);
        LaurentD T = L.transpose();
        detail::paint_scan(T, A, true, std::max(2 * nx, 512));
    }
    // flood fill the complement
    int next_id = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (A.member[A.idx(i, j)] || A.comp[A.idx(i, j)] >= 0) continue;
            int id = next_id++;
            AmoebaRaster::Component C;
            C.id = id;
            C.bounded = true;
            long long sx = 0, sy = 0;
            std::queue<std::pair<int, int>> q;
            q.push({i, j});
            A.comp[A.idx(i, j)] = id;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop();
                ++C.cells;
                sx += x;
                sy += y;
                if (x == 0 || y == 0 || x == nx - 1 || y == ny - 1) C.bounded = false;
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int u = x + dx[d], v = y + dy[d];
                    if (u < 0 || v < 0 || u >= nx || v >= ny) continue;
                    if (A.member[A.idx(u, v)] || A.comp[A.idx(u, v)] >= 0) continue;
                    A.comp[A.idx(u, v)] = id;
                    q.push({u, v});
                }
            }
            // R is linear with integer gradient on the component; complement
            // components are convex, so the cell centroid lies inside
            double cx = A.cellX((int)std::llround((double)sx / C.cells));
            double cy = A.cellY((int)std::llround((double)sy / C.cells));
            double h = 0.05;
            double s = (ronkin(P, cx + h, cy, 1e-8) - ronkin(P, cx - h, cy, 1e-8)) / (2 * h);
            double t = (ronkin(P, cx, cy + h, 1e-8) - ronkin(P, cx, cy - h, 1e-8)) / (2 * h);
            C.dual = {(int)std::lround(s), (int)std::lround(t)};
            A.components.push_back(C);
        }
    std::sort(A.components.begin(), A.components.end(), [](auto& a, auto& b) {
        if (a.bounded != b.bounded) return a.bounded;
        return a.cells > b.cells;
    });
    return A;
}

// Scan the circle |z| = e^X and test whether any root magnitude crosses or
// approaches e^Y; refines around the best sample.
inline bool amoeba_member(const Laurent2& P, double X, double Y, double tol = 1e-6,
                          int ntheta = 1024) {
    LaurentD L(P);
    if (L.terms.size() <= 1) return false;
    std::vector<double> prev, cur;
    double best = 1e300;
    double best_theta = 0;
    for (int a = 0; a <= ntheta; ++a) {
        double theta = 2 * M_PI * a / ntheta;
        detail::sorted_branch_logs(L, X, theta, cur);
        for (size_t k = 0; k < cur.size(); ++k) {
            if (std::abs(cur[k] - Y) < std::abs(best)) {
                best = cur[k] - Y;
                best_theta = theta;
            }
            if (!prev.empty() && k < prev.size() &&
                (prev[k] - Y) * (cur[k] - Y) <= 0 && std::abs(prev[k]) < 1e29 &&
                std::abs(cur[k]) < 1e29)
                return true; // branch crossed the target circle
        }
        std::swap(prev, cur);
    }
    // golden-section refinement of the closest approach
    double a = best_theta - 2 * M_PI / ntheta, b = best_theta + 2 * M_PI / ntheta;
    auto dist = [&](double th) {
        detail::sorted_branch_logs(L, X, th, cur);
        double m = 1e300;
        for (double v : cur) m = std::min(m, std::abs(v - Y));
        return m;
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1);
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = dist(c1), f2 = dist(c2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = dist(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = dist(c2);
        }
    }
    return std::min(f1, f2) < tol;
}

// ---------- phase classification ----------

enum class Phase { Frozen, Liquid, Gas };

struct PhaseLabel {
    Phase phase = Phase::Liquid;
    double s = 0, t = 0;
};

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Frozen: return "frozen";
        case Phase::Liquid: return "liquid";
        default: return "gas";
    }
}

inline PhaseLabel phase_classify(const AmoebaRaster& A, const NewtonPolygon& np, double s,
                                 double t) {
    if (!np.contains(s, t)) throw std::domain_error("no invariant measure");
    PhaseLabel out;
    out.s = s;
    out.t = t;
    bool integer = std::abs(s - std::lround(s)) < 1e-9 && std::abs(t - std::lround(t)) < 1e-9;
    if (integer) {
        std::pair<int, int> pt{(int)std::lround(s), (int)std::lround(t)};
        for (auto& C : A.components)
            if (C.dual == pt) {
                out.phase = C.bounded ? Phase::Gas : Phase::Frozen;
                return out;
            }
        out.phase = np.strictly_inside(s, t) ? Phase::Liquid : Phase::Frozen;
        return out;
    }
    out.phase = np.strictly_inside(s, t) ? Phase::Liquid : Phase::Frozen;
    return out;
}

// ---------- Harnack property ----------

struct HarnackReport {
    int samples = 0;
    int max_fiber = 0;   // largest fiber root count seen
    int violations = 0;  // points with more than 2 fiber roots
};

// Count intersections of {P=0} with the torus over (X,Y): zero crossings of
// the sorted branch values minus Y around the circle, plus a plateau test
// that catches whole arcs lying on the torus (non-Harnack curves).
inline int fiber_count(const LaurentD& L, double X, double Y, int ntheta = 2048) {
    std::vector<double> prev, cur;
    int crossings = 0, plateau = 0;
    detail::sorted_branch_logs(L, X, 0.0, prev);
    for (int a = 1; a <= ntheta; ++a) {
        double theta = 2 * M_PI * a / ntheta;
        detail::sorted_branch_logs(L, X, theta, cur);
        for (size_t k = 0; k < cur.size() && k < prev.size(); ++k) {
            double g0 = prev[k] - Y, g1 = cur[k] - Y;
            if (std::abs(g1) < 1e-9) {
                ++plateau;
                continue;
            }
            if (g0 * g1 < 0 && std::abs(g0) < 1e29 && std::abs(g1) < 1e29) ++crossings;
        }
        std::swap(prev, cur);
    }
    if (plateau > ntheta / 100) return ntheta; // a whole arc sits on the torus
    return crossings + plateau;
}

inline HarnackReport harnack_check(const Laurent2& P,
                                   const std::vector<std::pair<double, double>>& points,
                                   int ntheta = 2048) {
    LaurentD L(P);
    HarnackReport rep;
    for (auto& [X, Y] : points) {
        int c = fiber_count(L, X, Y, ntheta);
        ++rep.samples;
        rep.max_fiber = std::max(rep.max_fiber, c);
        if (c > 2) ++rep.violations;
    }
    return rep;
}

// Random points of the amoeba itself: log-coordinates of actual curve points,
// so membership is exact and no tolerance enters.
inline std::vector<std::pair<double, double>> sample_amoeba_points(const Laurent2& P, int n,
                                                                   double Xlo, double Xhi,
                                                                   uint64_t seed) {
    LaurentD L(P);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(Xlo, Xhi), ut(0.0, 2 * M_PI);
    std::vector<std::pair<double, double>> pts;
    while ((int)pts.size() < n) {
        double X = ux(rng), theta = ut(rng);
        Cplx z = std::exp(Cplx(X, theta));
        auto roots = poly_roots(L.w_coeffs(z));
        if (roots.empty()) continue;
        std::uniform_int_distribution<size_t> pick(0, roots.size() - 1);
        double ar = std::abs(roots[pick(rng)]);
        if (ar == 0.0 || !std::isfinite(ar)) continue;
        double Y = std::log(ar);
        if (Y < Xlo || Y > Xhi) continue;
        pts.push_back({X, Y});
    }
    return pts;
}

} // namespace dimer
