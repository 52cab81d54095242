#pragma once
// Height fluctuations around the flat maximal phase: the whole-plane inverse
// Kasteleyn kernel for the honeycomb with weights (a, b, c), the column
// determinantal kernel and its variance growth, the far-field asymptotic, and
// Monte-Carlo moment estimators on the triangular-coordinate torus.

#include <dimer/graph.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dimer {

namespace fluct_detail {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Inner contour integral over |w| = 1 of w^{x-1} / (a + b z + c w), by
// residues. For x >= 1 the only candidate pole is w* = -(a+bz)/c; for x <= 0
// invert the contour (u = 1/w) so the w = 0 pole and w* never collide
// numerically: the surviving residue has the complementary indicator.
inline std::complex<double> w_residues(std::complex<double> z, int x, double a, double b,
                                       double c) {
    std::complex<double> abz = a + b * z;
    std::complex<double> ws = -abz / c;
    if (x >= 1) return std::abs(ws) < 1.0 ? std::pow(ws, double(x - 1)) / c : 0.0;
    return std::abs(ws) > 1.0 ? std::pow(-c, double(-x)) * std::pow(abz, double(x - 1)) : 0.0;
}

}  // namespace fluct_detail

// Whole-plane inverse Kasteleyn entry
//   K^-1(x, y) = (2 pi)^-2 Int Int z^-y w^x / (a + b z + c w) dtheta dphi
// with z = e^{i theta}, w = e^{i phi}. Positions follow the white-cell
// convention of honeycomb_region: the entry couples w_(0,0) to the black of
// offset (u, v) = (y, -x), so (k, k) walks the column of a-edges. The inner
// integral is reduced to residues and the remaining circle integral is split
// at the two angles where |a + b z| = c (the indicator of the w* pole flips
// there) and integrated adaptively. Non-triangle weights need no special
// casing: the pole indicator is then constant and the frozen values (a-edge
// probability 1 or 0) come out of the same residues.
inline double kinv_infinite(int x, int y, double a, double b, double c) {
    using fluct_detail::kPi;
    if (a <= 0 || b <= 0 || c <= 0) throw std::invalid_argument("kinv_infinite: weights must be positive");
    double ct = (c * c - a * a - b * b) / (2 * a * b);
    std::vector<double> cuts{0.0};
    if (ct > -1.0 && ct < 1.0) {
        double t = std::acos(ct);
        cuts.push_back(t);
        cuts.push_back(2 * kPi - t);
    }
    cuts.push_back(2 * kPi);
    // the imaginary part integrates to zero (theta -> -theta conjugates the
    // integrand), so only the real part is accumulated
    auto f = [&](double t) {
        std::complex<double> z = std::polar(1.0, t);
        return (std::pow(z, double(-y)) * fluct_detail::w_residues(z, x, a, b, c)).real();
    };
    double s = 0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, cuts[i] + 1e-14, cuts[i + 1] - 1e-14, 12, 1e-12);
    return s / (2 * kPi);
}

// Riemann sum for the same entry over an n x n grid of phases, antiperiodic in
// z (half-integer shift). The shifted grid never meets the zeros of
// a + b z + c w, so the sum is finite for every n and converges to
// kinv_infinite at rate O(1/n). This is the inverse on the n x n torus for one
// of the spin structures.
inline double kinv_torus(int n, int x, int y, double a, double b, double c) {
    using fluct_detail::kPi;
    std::complex<double> s = 0;
    for (int j = 0; j < n; ++j) {
        std::complex<double> z = std::polar(1.0, 2 * kPi * (j + 0.5) / n);
        for (int k = 0; k < n; ++k) {
            std::complex<double> w = std::polar(1.0, 2 * kPi * k / n);
            s += std::pow(z, double(-y)) * std::pow(w, double(x)) / (a + b * z + c * w);
        }
    }
    return (s / double(n) / double(n)).real();
}

// Normalized kernel of the determinantal point process formed by the a-edges
// of one column: entry(d) = a * kinv_infinite(d, d). The edge weight cancels
// by the law of sines, leaving only the angle theta_a opposite side a, and
//   P(a-edges at n_1..n_k) = det[ entry(n_i - n_j) ].
// Degenerate triangles are allowed: theta_a clamps to 0 or pi and the process
// freezes (all or no a-edges).
struct ColumnKernel {
    double theta = 0;

    static ColumnKernel from_weights(double a, double b, double c) {
        double arg = (b * b + c * c - a * a) / (2 * b * c);
        return {std::acos(std::clamp(arg, -1.0, 1.0))};
    }

    double entry(int d) const {
        using fluct_detail::kPi;
        if (d == 0) return theta / kPi;
        double s = std::sin(d * theta) / (kPi * d);
        return (d & 1) ? -s : s;
    }
};

// Variance of the number of a-edges among k consecutive column sites,
//   Tr M (I - M) = k a0 (1 - a0) - sum_{m<k} (2k - 2m) a_m^2,
// which grows like log(k) / pi^2. Only squares of entries appear, so the
// alternating signs drop out.
inline double column_variance(double theta, int k) {
    using fluct_detail::kPi;
    if (k < 1) throw std::invalid_argument("column_variance: k must be positive");
    double a0 = theta / kPi;
    double v = k * a0 * (1 - a0);
    for (int m = 1; m < k; ++m) {
        double am = std::sin(m * theta) / (kPi * m);
        v -= (2.0 * k - 2.0 * m) * am * am;
    }
    return v;
}

// Same quantity as an explicit k x k trace; kept as a cross-check.
inline double column_variance_trace(double theta, int k) {
    ColumnKernel ker{theta};
    double tr = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double mij = ker.entry(i - j);
            tr += (i == j ? mij : 0.0) - mij * mij;
        }
    return tr;
}

// Far-field asymptotic of the uniform-weight kernel,
//   kinv_infinite(x, y, 1, 1, 1) ~ Re[ e^{5 pi i/6} om^{-(x+y)} / (pi (x + om y)) ],
// om = e^{2 pi i/3}, with error O((|x|+|y|)^-2). The two simple zeros of
// 1 + z + w on the torus contribute conjugate oscillating terms; the phase
// above was pinned against the exact kernel (it is exact on the diagonal).
inline double kinv_asymptotic(int x, int y) {
    using fluct_detail::kPi;
    if (x == 0 && y == 0) throw std::invalid_argument("kinv_asymptotic: undefined at the origin");
    std::complex<double> om = std::polar(1.0, 2 * kPi / 3);
    int e = (((-x - y) % 3) + 3) % 3;
    std::complex<double> num = std::polar(1.0, 5 * kPi / 6) * std::pow(om, double(e));
    return (num / (kPi * (double(x) + om * double(y)))).real();
}

// Gaussian free field prediction for E[(h(z1)-h(z2)) (h(z3)-h(z4))] in the
// plane, heights in lattice units (quantum 1/3 per edge crossing):
//   -(2 pi^2)^-1 log | (z2-z4)(z1-z3) / ((z2-z3)(z1-z4)) |.
// A coincident pair within one increment gives 0 (the increment vanishes);
// coincidences across the two increments make the moment diverge and throw.
inline double gff_second_moment(std::complex<double> z1, std::complex<double> z2,
                                std::complex<double> z3, std::complex<double> z4) {
    using fluct_detail::kPi;
    if (z1 == z2 || z3 == z4) return 0.0;
    if (z1 == z3 || z1 == z4 || z2 == z3 || z2 == z4)
        throw std::invalid_argument("gff_second_moment: coincident points across increments");
    double num = std::abs((z2 - z4) * (z1 - z3));
    double den = std::abs((z2 - z3) * (z1 - z4));
    return -std::log(num / den) / (2 * kPi * kPi);
}

// ----- torus Monte Carlo ------------------------------------------------------

// Uniform dimer sampler on the n x n honeycomb torus (n multiple of 3), in the
// balanced winding sector. State: T[i][j] in {a,b,c} = the edge type covering
// white (i, j), with blacks reached at offsets a:(0,0), b:(-1,0), c:(0,-1) as
// in honeycomb_region. The hexagonal face at lattice corner (i, j) touches
// whites (i,j), (i-1,j), (i,j-1); its two alternating matchings are the type
// patterns (1,2,0) and (2,0,1), and a Glauber step swaps them. Face flips
// preserve the winding, so the chain stays in the initial balanced sector.
struct TriTorusChain {
    int n;
    std::vector<uint8_t> type;
    std::mt19937_64 rng;

    TriTorusChain(int n_, uint64_t seed) : n(n_), type(size_t(n_) * n_), rng(seed) {
        if (n < 3 || n % 3 != 0)
            throw std::invalid_argument("TriTorusChain: side must be a positive multiple of 3");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) type[size_t(i) * n + j] = uint8_t(((j - i) % 3 + 3) % 3);
    }

    int at(int i, int j) const {
        return type[size_t((i % n + n) % n) * n + size_t((j % n + n) % n)];
    }
    void set(int i, int j, uint8_t v) {
        type[size_t((i % n + n) % n) * n + size_t((j % n + n) % n)] = v;
    }

    bool flip_face(int i, int j) {
        int t1 = at(i, j), t2 = at(i - 1, j), t3 = at(i, j - 1);
        if (t1 == 1 && t2 == 2 && t3 == 0) {
            set(i, j, 2), set(i - 1, j, 0), set(i, j - 1, 1);
            return true;
        }
        if (t1 == 2 && t2 == 0 && t3 == 1) {
            set(i, j, 1), set(i - 1, j, 2), set(i, j - 1, 0);
            return true;
        }
        return false;
    }

    void sweep() {
        std::uniform_int_distribution<int> d(0, n * n - 1);
        for (int s = 0; s < n * n; ++s) {
            int f = d(rng);
            flip_face(f / n, f % n);
        }
    }

    // every black (i, j) must be covered exactly once
    bool valid_matching() const {
        std::vector<int> cover(size_t(n) * n, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                int t = at(i, j);
                int bi = t == 1 ? i - 1 : i, bj = t == 2 ? j - 1 : j;
                ++cover[size_t((bi % n + n) % n) * n + size_t((bj % n + n) % n)];
            }
        return std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; });
    }
};

// A run of m consecutive column a-edges starting at white (i0, j0): sites
// (i0 + t, j0 - t). Crossing them in order changes the height by
// sum (1[a-edge] - 1/3), and consecutive sites share a face, so this is an
// honest height increment between the two end faces.
struct Column {
    int i0 = 0, j0 = 0, m = 1;
};

inline double column_increment(const TriTorusChain& ch, const Column& col, int di = 0,
                               int dj = 0) {
    double d = 0;
    for (int t = 0; t < col.m; ++t)
        d += (ch.at(col.i0 + di + t, col.j0 + dj - t) == 0 ? 1.0 : 0.0) - 1.0 / 3;
    return d;
}

// End faces of the column in the plane embedding of honeycomb_region
// (tri_embed), half a lattice step beyond the first and last a-edge.
inline std::pair<std::complex<double>, std::complex<double>> column_endpoints(const Column& col) {
    auto cx = [](Vec2 p) { return std::complex<double>(p.x, p.y); };
    std::complex<double> half = cx(tri_embed(0.5, -0.5));
    std::complex<double> lo = cx(tri_embed(col.i0 + 0.5, col.j0 + 0.5)) - half;
    std::complex<double> hi = cx(tri_embed(col.i0 + col.m - 0.5, col.j0 - col.m + 1.5)) + half;
    return {lo, hi};
}

struct MomentEstimate {
    double mean = 0, se = 0;
};

struct PairMoments {
    MomentEstimate cross;   // E[D_A D_B]
    MomentEstimate var_a;   // E[D_A^2]
    MomentEstimate var_b;   // E[D_B^2]
    MomentEstimate fourth;  // E[D_A^2 D_B^2]
    int samples = 0;
};

namespace fluct_detail {

inline MomentEstimate batch_mean(const std::vector<double>& xs, int batches) {
    int bs = int(xs.size()) / batches;
    double mean = 0;
    std::vector<double> bm(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
        for (int i = b * bs; i < (b + 1) * bs; ++i) bm[b] += xs[i];
        bm[b] /= bs;
        mean += bm[b];
    }
    mean /= batches;
    double var = 0;
    for (double v : bm) var += (v - mean) * (v - mean);
    var /= (batches - 1);
    return {mean, std::sqrt(var / batches)};
}

}  // namespace fluct_detail

// Monte-Carlo estimate of the joint moments of two column increments, with B
// placed relative to A (its base is translated along with A). Each snapshot is
// averaged over all n^2 translations of the pair; consecutive snapshots are
// heavily correlated, so standard errors come from batch means, not from the
// per-snapshot spread. The chain samples a fixed winding sector, which
// suppresses the two torus zero modes; absolute moments therefore sit a few
// times 1e-3 below the whole-plane prediction, while differences of
// equal-length pair moments cancel the effect.
inline PairMoments empirical_moment(TriTorusChain& ch, const Column& A, const Column& B,
                                    int samples, int burn_sweeps, int gap_sweeps,
                                    int batches = 20) {
    if (samples < batches || batches < 2)
        throw std::invalid_argument("empirical_moment: need at least `batches` samples");
    for (int s = 0; s < burn_sweeps; ++s) ch.sweep();
    int n = ch.n;
    std::vector<double> vab, vaa, vbb, v4;
    vab.reserve(samples), vaa.reserve(samples), vbb.reserve(samples), v4.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        for (int t = 0; t < gap_sweeps; ++t) ch.sweep();
        double ab = 0, aa = 0, bb = 0, q = 0;
        for (int di = 0; di < n; ++di)
            for (int dj = 0; dj < n; ++dj) {
                double da = column_increment(ch, A, di, dj);
                double db = column_increment(ch, B, di, dj);
                ab += da * db, aa += da * da, bb += db * db, q += da * da * db * db;
            }
        double inv = 1.0 / (double(n) * n);
        vab.push_back(ab * inv), vaa.push_back(aa * inv);
        vbb.push_back(bb * inv), v4.push_back(q * inv);
    }
    PairMoments pm;
    pm.cross = fluct_detail::batch_mean(vab, batches);
    pm.var_a = fluct_detail::batch_mean(vaa, batches);
    pm.var_b = fluct_detail::batch_mean(vbb, batches);
    pm.fourth = fluct_detail::batch_mean(v4, batches);
    pm.samples = samples;
    return pm;
}

}  // namespace dimer
