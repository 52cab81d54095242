#include "dimer/sampler.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <map>

using namespace dimer;

namespace {

// same 3x1 strip as in the counting tests: K = [[a,1,0],[1,-b,1],[0,1,c]]
PlanarGraph strip_graph(Rational a, Rational b, Rational c) {
    PlanarGraph g;
    int w1 = g.add_white({0, 0}), w2 = g.add_white({2, 0}), w3 = g.add_white({4, 0});
    int b1 = g.add_black({1, 0}), b2 = g.add_black({3, 0}), b3 = g.add_black({5, 0});
    g.add_edge(w1, b1, a, 0);
    g.add_edge(w2, b1, Rational(1), 0);
    g.add_edge(w2, b2, b, 2);
    g.add_edge(w1, b2, Rational(1), 0);
    g.add_edge(w2, b3, Rational(1), 0);
    g.add_edge(w3, b2, Rational(1), 0);
    g.add_edge(w3, b3, c, 0);
    return g;
}

std::vector<int> key_of(const Matching& m) {
    auto k = m.edge_ids();
    std::sort(k.begin(), k.end());
    return k;
}

} // namespace

TEST_CASE("sampler marginals agree with brute-force enumeration") {
    for (auto g : {strip_graph(2, 1, 1), strip_graph(3, 2, 5), square_rectangle(3, 4),
                   hexagon_graph(2, 1, 3)}) {
        auto brute = edge_marginals_brute(g);
        auto fast = ExactSampler(g).marginals();
        REQUIRE(brute.size() == fast.size());
        for (size_t e = 0; e < brute.size(); ++e)
            CHECK(fast[e] == Catch::Approx(to_double(brute[e])).margin(1e-12));
    }
}

TEST_CASE("exact samples follow the Boltzmann distribution") {
    auto g = strip_graph(2, 1, 1); // three covers, weights 2 : 2 : 1
    ExactSampler s(g);
    std::map<std::vector<int>, int> cnt;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        auto rng = rng_for_sample(7, i);
        cnt[key_of(s.sample(rng))]++;
    }
    REQUIRE(cnt.size() == 3);
    CHECK(std::abs(cnt[{0, 4, 5}] / (double)N - 0.4) < 0.015);
    CHECK(std::abs(cnt[{0, 2, 6}] / (double)N - 0.4) < 0.015);
    CHECK(std::abs(cnt[{1, 3, 6}] / (double)N - 0.2) < 0.015);
}

TEST_CASE("hexagon covers are sampled uniformly") {
    auto h = hexagon_graph(2, 2, 2); // 20 covers
    ExactSampler s(h);
    std::map<std::vector<int>, int> cnt;
    const int N = 30000;
    std::vector<double> freq(h.edges.size(), 0);
    for (int i = 0; i < N; ++i) {
        auto rng = rng_for_sample(5, i);
        auto m = s.sample(rng);
        cnt[key_of(m)]++;
        for (int e : m.edge_ids()) freq[e] += 1.0 / N;
    }
    REQUIRE(cnt.size() == 20);
    double chi2 = 0, expect = N / 20.0;
    for (auto& [k, c] : cnt) chi2 += (c - expect) * (c - expect) / expect;
    boost::math::chi_squared dist(19);
    CHECK(1 - cdf(dist, chi2) > 0.01); // seed 5: chi2 = 16.59

    auto exact = s.marginals();
    for (size_t e = 0; e < freq.size(); ++e) {
        double sigma = std::sqrt(exact[e] * (1 - exact[e]) / N);
        CHECK(std::abs(freq[e] - exact[e]) < 4 * sigma + 1e-12);
    }
}

TEST_CASE("conditional probabilities telescope to weight over Z") {
    auto g = strip_graph(2, 1, 1);
    ExactSampler s(g);
    double logZ = std::log(to_double(partition_function(g)));
    for (int i = 0; i < 20; ++i) {
        auto rng = rng_for_sample(11, i);
        double lp = 0;
        auto m = s.sample(rng, &lp);
        double lw = 0;
        for (int e : m.edge_ids()) lw += std::log(to_double(g.edges[e].weight));
        CHECK(std::abs(lp - (lw - logZ)) < 1e-9);
    }

    auto g44 = square_rectangle(4, 4); // Z = 36, uniform weights
    ExactSampler s44(g44);
    for (int i = 0; i < 20; ++i) {
        auto rng = rng_for_sample(3, i);
        double lp = 0;
        auto m = s44.sample(rng, &lp);
        REQUIRE(m.perfect());
        CHECK(std::abs(lp + std::log(36.0)) < 1e-9);
    }
}

TEST_CASE("batches are reproducible from the seed alone") {
    auto h = hexagon_graph(2, 2, 2);
    auto b1 = sample_batch_exact(h, 50, 9);
    auto b2 = sample_batch_exact(h, 50, 9);
    auto b3 = sample_batch_exact(h, 50, 10);
    bool same = true, differ = false;
    for (int i = 0; i < 50; ++i) {
        same = same && b1[i].edge_ids() == b2[i].edge_ids();
        differ = differ || b1[i].edge_ids() != b3[i].edge_ids();
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("glauber dynamics preserve the Boltzmann measure") {
    // 2x2 with vertical weight 2: P(vertical pair) = 4/5
    auto g22 = square_rectangle(2, 2, {}, SquareWeights{Rational(1), Rational(2)});
    auto rng = rng_for_sample(99, 0);
    auto m = glauber_chain(g22, exact_sample(g22, 1), 500, rng);
    long long vert = 0;
    const long long T = 50000;
    for (long long t = 0; t < T; ++t) {
        m = glauber_chain(g22, m, 1, rng);
        REQUIRE(m.perfect());
        vert += (g22.edges[m.edge_ids()[0]].type == 1);
    }
    CHECK(std::abs(vert / (double)T - 0.8) < 0.02);

    // 3x4 uniform: 11 covers, occupancy close to 1/11 each
    auto g34 = square_rectangle(3, 4);
    auto rng2 = rng_for_sample(123, 0);
    auto m2 = glauber_chain(g34, exact_sample(g34, 2), 2000, rng2);
    std::map<std::vector<int>, long long> occ;
    const long long T2 = 110000;
    for (long long t = 0; t < T2; ++t) {
        m2 = glauber_chain(g34, m2, 1, rng2);
        occ[key_of(m2)]++;
    }
    REQUIRE(occ.size() == 11);
    for (auto& [k, c] : occ) CHECK(std::abs(c / (double)T2 - 1.0 / 11) < 0.015);
}

TEST_CASE("glauber chain with zero steps is the identity") {
    auto h = hexagon_graph(2, 2, 2);
    auto m = exact_sample(h, 4);
    auto m2 = glauber_chain(h, m, 0, (uint64_t)1);
    CHECK(m.edge_ids() == m2.edge_ids());
    auto m3 = glauber_chain(h, m, 500, (uint64_t)1);
    CHECK(m3.perfect());
}

TEST_CASE("untileable regions are rejected") {
    CHECK_THROWS_AS(ExactSampler(square_rectangle(3, 3)), std::runtime_error);
    CHECK_THROWS_AS(exact_sample(square_rectangle(2, 3, {{0, 0}}), 1), std::runtime_error);
}

TEST_CASE("batch statistics") {
    auto h = hexagon_graph(2, 2, 2);
    auto batch = sample_batch_exact(h, 200, 17);
    auto st = collect_stats(h, batch);
    REQUIRE(st.samples == 200);
    REQUIRE(st.heights_ok);
    double sum = 0;
    for (double f : st.edge_freq) {
        CHECK(f >= 0);
        CHECK(f <= 1);
        sum += f;
    }
    CHECK(sum == Catch::Approx((double)h.nw).margin(1e-9)); // nw edges per cover
    for (double v : st.height_var) CHECK(v >= -1e-12);

    // a batch of one repeated cover has zero variance everywhere
    std::vector<Matching> rep(10, batch[0]);
    auto st0 = collect_stats(h, rep);
    for (double v : st0.height_var) CHECK(std::abs(v) < 1e-12);
    for (double f : st0.edge_freq) CHECK((f == 0 || f == 1));

    // lozenge counts per orientation are fixed by the region, so the
    // one-cell type fractions are exactly 1/3 for the regular hexagon
    for (int t = 0; t < 3; ++t) {
        auto d = type_density(h, batch, t, 1, 1);
        REQUIRE(d.frac.size() == 1);
        CHECK(d.frac[0] == Catch::Approx(1.0 / 3).margin(1e-12));
    }
    auto d44 = type_density(h, batch, 0, 4, 4);
    for (size_t c = 0; c < d44.frac.size(); ++c) {
        CHECK(d44.frac[c] >= 0);
        CHECK(d44.frac[c] <= 1);
    }
}

TEST_CASE("initial matching seeds the Glauber chain") {
    PlanarGraph h = hexagon_graph(3, 2, 2);
    Matching m = initial_matching(h);
    CHECK(m.perfect());
    CHECK((int)m.edge_ids().size() == h.nw);

    CHECK_THROWS(initial_matching(square_rectangle(3, 3)));

    // a few flips later it is still a perfect cover
    std::mt19937_64 rng(5);
    m = glauber_chain(h, std::move(m), 500, rng);
    CHECK(m.perfect());
}
