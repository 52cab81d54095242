#pragma once

#include "dimer/heights.hpp"
#include "dimer/kasteleyn.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace dimer {

using CplxLD = std::complex<long double>;

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline CplxLD edge_value_ld(const GraphEdge& e) {
    long double w = to_long_double(e.weight);
    switch (((e.phase % 4) + 4) % 4) {
        case 0: return {w, 0};
        case 1: return {0, w};
        case 2: return {-w, 0};
        default: return {0, -w};
    }
}

} // namespace detail

// One generator per sample index, derived from the master seed, so batches
// are bit-reproducible regardless of scheduling or thread count.
inline std::mt19937_64 rng_for_sample(uint64_t seed, uint64_t index) {
    return std::mt19937_64(detail::splitmix64(seed ^ detail::splitmix64(index)));
}

// Deterministic perfect matching by Kuhn's augmenting paths; cheap starting
// state for glauber_chain on regions too large for exact sampling.
inline Matching initial_matching(const PlanarGraph& g) {
    std::vector<int> mw(g.nw, -1), mb(g.nb, -1);
    std::vector<char> seen(g.nb, 0);
    std::function<bool(int)> augment = [&](int w) -> bool {
        for (int e : g.wadj[w]) {
            int b = g.edges[e].b;
            if (seen[b]) continue;
            seen[b] = 1;
            if (mb[b] < 0 || augment(g.edges[mb[b]].w)) {
                mw[w] = e;
                mb[b] = e;
                return true;
            }
        }
        return false;
    };
    for (int w = 0; w < g.nw; ++w) {
        std::fill(seen.begin(), seen.end(), 0);
        if (!augment(w)) throw std::runtime_error("untileable");
    }
    return Matching::from_edges(g, std::vector<int>(mw.begin(), mw.end()));
}

// Exact Boltzmann sampling by sequential conditioning: walk the white
// vertices, pick each incident edge with its conditional probability
// K(w,b) K^{-1}(b,w) on the remaining subgraph, then eliminate the matched
// pair from the inverse with a rank-one update. One O(n^3) inverse is shared
// across a batch; each sample costs O(n^3) in long double precision.
class ExactSampler {
  public:
    explicit ExactSampler(const PlanarGraph& g) : g_(&g), n_((int)g.nw) {
        if (g.nw != g.nb || !tileable(g)) throw std::runtime_error("untileable");
        eval_.reserve(g.edges.size());
        for (auto& e : g.edges) eval_.push_back(detail::edge_value_ld(e));
        K_.assign(n_, std::vector<CplxLD>(n_, CplxLD(0, 0)));
        for (size_t e = 0; e < g.edges.size(); ++e)
            K_[g.edges[e].w][g.edges[e].b] += eval_[e];
        inv_ = invert(K_);
    }

    Matching sample(std::mt19937_64& rng, double* logp = nullptr) const {
        auto inv = inv_;
        std::vector<char> bdone(n_, 0);
        std::vector<int> chosen;
        chosen.reserve(n_);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double lp = 0;
        for (int i = 0; i < n_; ++i) {
            long double total = 0;
            std::vector<std::pair<int, long double>> opts; // (edge id, conditional)
            for (int eid : g_->wadj[i]) {
                int b = g_->edges[eid].b;
                if (bdone[b]) continue;
                // per-edge conditional; parallel edges split the pair
                // probability because a valid phasing aligns them
                long double p = std::real(eval_[eid] * inv[b][i]);
                if (p < -1e-9L) throw std::runtime_error("invalid phasing");
                if (p < 0) p = 0;
                opts.push_back({eid, p});
                total += p;
            }
            if (opts.empty() || total <= 0) throw std::runtime_error("untileable");
            if (std::abs(total - 1.0L) > 1e-6L) throw std::runtime_error("invalid phasing");
            long double draw = u01(rng) * total, acc = 0;
            int pick = (int)opts.size() - 1;
            for (size_t k = 0; k < opts.size(); ++k) {
                acc += opts[k].second;
                if (draw <= acc) {
                    pick = (int)k;
                    break;
                }
            }
            auto [eid, p] = opts[pick];
            lp += std::log((double)(p / total));
            int bk = g_->edges[eid].b;
            chosen.push_back(eid);
            bdone[bk] = 1;
            CplxLD piv = inv[bk][i];
            for (int j = 0; j < n_; ++j) {
                if (bdone[j] || inv[j][i] == CplxLD(0, 0)) continue;
                CplxLD f = inv[j][i] / piv;
                for (int l = i + 1; l < n_; ++l) inv[j][l] -= f * inv[bk][l];
            }
        }
        if (logp) *logp = lp;
        return Matching::from_edges(*g_, chosen);
    }

    // |K(w,b) K^{-1}(b,w)| per edge, from the shared inverse
    std::vector<double> marginals() const {
        std::vector<double> out(g_->edges.size());
        for (size_t e = 0; e < g_->edges.size(); ++e)
            out[e] = (double)std::abs(eval_[e] * inv_[g_->edges[e].b][g_->edges[e].w]);
        return out;
    }

  private:
    static std::vector<std::vector<CplxLD>> invert(std::vector<std::vector<CplxLD>> a) {
        int n = (int)a.size();
        long double scale = 0;
        for (auto& row : a)
            for (auto& v : row) scale = std::max(scale, std::abs(v));
        std::vector<std::vector<CplxLD>> inv(n, std::vector<CplxLD>(n, CplxLD(0, 0)));
        for (int i = 0; i < n; ++i) inv[i][i] = 1;
        for (int c = 0; c < n; ++c) {
            int piv = c;
            for (int r = c + 1; r < n; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            if (std::abs(a[piv][c]) <= scale * 1e-17L) throw std::runtime_error("untileable");
            std::swap(a[piv], a[c]);
            std::swap(inv[piv], inv[c]);
            CplxLD d = a[c][c];
            for (int k = 0; k < n; ++k) {
                a[c][k] /= d;
                inv[c][k] /= d;
            }
            for (int r = 0; r < n; ++r) {
                if (r == c || a[r][c] == CplxLD(0, 0)) continue;
                CplxLD f = a[r][c];
                for (int k = 0; k < n; ++k) {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
        return inv;
    }

    const PlanarGraph* g_;
    int n_;
    std::vector<CplxLD> eval_;
    std::vector<std::vector<CplxLD>> K_;
    std::vector<std::vector<CplxLD>> inv_;
};

inline Matching exact_sample(const PlanarGraph& g, uint64_t seed, double* logp = nullptr) {
    ExactSampler s(g);
    auto rng = rng_for_sample(seed, 0);
    return s.sample(rng, logp);
}

inline std::vector<Matching> sample_batch_exact(const PlanarGraph& g, int count,
                                                uint64_t seed) {
    ExactSampler s(g);
    std::vector<Matching> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        auto rng = rng_for_sample(seed, (uint64_t)i);
        out.push_back(s.sample(rng));
    }
    return out;
}

// Metropolis face-flip chain; flips keep the cover perfect, the weight ratio
// of the proposal keeps the Boltzmann measure stationary.
inline Matching glauber_chain(const PlanarGraph& g, Matching m, long long steps,
                              std::mt19937_64& rng) {
    if (g.n_bounded == 0 || steps <= 0) return m;
    std::vector<double> w(g.edges.size());
    for (size_t e = 0; e < g.edges.size(); ++e) w[e] = to_double(g.edges[e].weight);
    std::uniform_int_distribution<int> pick(0, g.n_bounded - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (long long s = 0; s < steps; ++s) {
        int f = pick(rng);
        if (!face_flippable(g, m, f)) continue;
        double ratio = 1;
        for (int d : g.faces[f].darts) {
            int e = d / 2;
            if (m.in_m[e])
                ratio /= w[e];
            else
                ratio *= w[e];
        }
        if (ratio >= 1 || u01(rng) < ratio) face_flip(g, m, f);
    }
    return m;
}

inline Matching glauber_chain(const PlanarGraph& g, Matching m, long long steps,
                              uint64_t seed) {
    auto rng = rng_for_sample(seed, 0x9dULL);
    return glauber_chain(g, std::move(m), steps, rng);
}

// ---------- empirical statistics ----------

struct BatchStats {
    int samples = 0;
    std::vector<double> edge_freq;                 // per edge id
    std::vector<double> height_mean, height_var;   // per bounded face
    bool heights_ok = false;                       // false if any sample inconsistent
};

inline BatchStats collect_stats(const PlanarGraph& g, const std::vector<Matching>& batch,
                                BaseFlow flow) {
    BatchStats st;
    st.samples = (int)batch.size();
    st.edge_freq.assign(g.edges.size(), 0);
    st.height_mean.assign(g.n_bounded, 0);
    st.height_var.assign(g.n_bounded, 0);
    if (batch.empty()) return st;
    st.heights_ok = true;
    std::vector<double> sum(g.n_bounded, 0), sum2(g.n_bounded, 0);
    for (auto& m : batch) {
        for (size_t e = 0; e < g.edges.size(); ++e)
            if (m.in_m[e]) st.edge_freq[e] += 1;
        if (st.heights_ok) {
            HeightField hf = height_function(g, m, flow);
            if (!hf.consistent) {
                st.heights_ok = false;
                continue;
            }
            for (int f = 0; f < g.n_bounded; ++f) {
                sum[f] += (double)hf.h[f];
                sum2[f] += (double)hf.h[f] * hf.h[f];
            }
        }
    }
    for (auto& v : st.edge_freq) v /= st.samples;
    if (st.heights_ok) {
        for (int f = 0; f < g.n_bounded; ++f) {
            st.height_mean[f] = sum[f] / st.samples;
            st.height_var[f] = sum2[f] / st.samples - st.height_mean[f] * st.height_mean[f];
        }
    } else {
        st.height_mean.clear();
        st.height_var.clear();
    }
    return st;
}

inline BatchStats collect_stats(const PlanarGraph& g, const std::vector<Matching>& batch) {
    return collect_stats(g, batch, default_flow(g));
}

// Fraction of covered edges of one type per grid cell, binned by midpoint.
struct DensityGrid {
    int nx = 0, ny = 0;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    std::vector<double> frac;     // nx*ny, 0 where no edges landed
    std::vector<long long> total; // covered-edge midpoints per cell
};

inline DensityGrid type_density(const PlanarGraph& g, const std::vector<Matching>& batch,
                                int type, int nx, int ny) {
    DensityGrid d;
    d.nx = nx;
    d.ny = ny;
    d.xmin = d.ymin = 1e300;
    d.xmax = d.ymax = -1e300;
    for (auto& p : g.wpos) {
        d.xmin = std::min(d.xmin, p.x);
        d.xmax = std::max(d.xmax, p.x);
        d.ymin = std::min(d.ymin, p.y);
        d.ymax = std::max(d.ymax, p.y);
    }
    for (auto& p : g.bpos) {
        d.xmin = std::min(d.xmin, p.x);
        d.xmax = std::max(d.xmax, p.x);
        d.ymin = std::min(d.ymin, p.y);
        d.ymax = std::max(d.ymax, p.y);
    }
    double padx = (d.xmax - d.xmin + 1) * 1e-9, pady = (d.ymax - d.ymin + 1) * 1e-9;
    d.xmax += padx;
    d.ymax += pady;
    d.frac.assign((size_t)nx * ny, 0);
    d.total.assign((size_t)nx * ny, 0);
    std::vector<long long> hit((size_t)nx * ny, 0);
    for (auto& m : batch)
        for (size_t e = 0; e < g.edges.size(); ++e) {
            if (!m.in_m[e]) continue;
            auto& ed = g.edges[e];
            double mx = 0.5 * (g.wpos[ed.w].x + g.bpos[ed.b].x);
            double my = 0.5 * (g.wpos[ed.w].y + g.bpos[ed.b].y);
            int i = std::clamp((int)((mx - d.xmin) / (d.xmax - d.xmin) * nx), 0, nx - 1);
            int j = std::clamp((int)((my - d.ymin) / (d.ymax - d.ymin) * ny), 0, ny - 1);
            size_t c = (size_t)j * nx + i;
            ++d.total[c];
            if (ed.type == type) ++hit[c];
        }
    for (size_t c = 0; c < d.frac.size(); ++c)
        if (d.total[c] > 0) d.frac[c] = (double)hit[c] / d.total[c];
    return d;
}

} // namespace dimer
