#include <catch2/catch_amalgamated.hpp>

#include "dimer/enumerate.hpp"
#include "dimer/torus.hpp"

using namespace dimer;

namespace {

Rational coeff(const Laurent2& p, int ez, int ew) {
    auto it = p.find({ez, ew});
    return it == p.end() ? Rational(0) : it->second;
}

} // namespace

TEST_CASE("characteristic polynomials of the built-in domains") {
    auto hc = charpoly(honeycomb_unit(2, 3, 5));
    REQUIRE(hc.size() == 3);
    CHECK(coeff(hc, 0, 0) == 2);
    CHECK(coeff(hc, 1, 0) == 3);
    CHECK(coeff(hc, 0, 1) == 5);

    auto sq = charpoly(square_unit());
    REQUIRE(sq.size() == 4);
    CHECK(coeff(sq, 0, 0) == 1);
    CHECK(coeff(sq, 1, 0) == 1);
    CHECK(coeff(sq, 0, 1) == 1);
    CHECK(coeff(sq, 1, 1) == -1);

    // 3x2 domain, all weights 1: P = 6 - 6/w + 1/w^2 - w + 1/z + z/w
    auto p1 = charpoly(square_3x2());
    REQUIRE(p1.size() == 6);
    CHECK(coeff(p1, 0, 0) == 6);
    CHECK(coeff(p1, 0, -1) == -6);
    CHECK(coeff(p1, 0, -2) == 1);
    CHECK(coeff(p1, 0, 1) == -1);
    CHECK(coeff(p1, -1, 0) == 1);
    CHECK(coeff(p1, 1, -1) == 1);

    // same domain with b = 2
    auto p2 = charpoly(square_3x2(1, 2, 1, 1, 1));
    REQUIRE(p2.size() == 6);
    CHECK(coeff(p2, 0, 0) == 9);
    CHECK(coeff(p2, 0, -1) == -7);
    CHECK(coeff(p2, 0, -2) == 1);
    CHECK(coeff(p2, 0, 1) == -2);
    CHECK(coeff(p2, -1, 0) == 1);
    CHECK(coeff(p2, 1, -1) == 1);
}

TEST_CASE("expanded torus graphs have the right size") {
    for (int n = 1; n <= 3; ++n) {
        auto g = torus_expand(honeycomb_unit(), n);
        CHECK(g.nw == n * n);
        CHECK(g.nb == n * n);
        CHECK((int)g.edges.size() == 3 * n * n);
    }
    auto g = torus_expand(square_3x2(), 2);
    CHECK(g.nw == 12);
    CHECK(g.nb == 12);
    CHECK((int)g.edges.size() == 48);
}

TEST_CASE("sector products combine to the torus partition function") {
    struct Case {
        FundamentalDomain fd;
        int n;
        long long expect;
    };
    std::vector<Case> cases = {
        {honeycomb_unit(), 1, 3},      {honeycomb_unit(), 2, 9},
        {honeycomb_unit(), 3, 42},     {honeycomb_unit(), 4, 417},
        {honeycomb_unit(2, 3, 1), 1, 6},
        {honeycomb_unit(2, 3, 1), 2, 196},
        {honeycomb_unit(2, 3, 1), 3, 49896},
        {square_unit(), 1, 4},         {square_unit(), 2, 24},
        {square_unit(), 3, 448},       {square_unit(), 4, 26752},
        {square_3x2(), 1, 16},         {square_3x2(), 2, 3096},
        {square_3x2(2, 1, 1, 3, 1), 1, 27},
        {square_3x2(2, 1, 1, 3, 1), 2, 29281},
    };
    for (auto& c : cases) {
        auto tz = torus_partition(c.fd, c.n);
        CHECK(tz.combined == c.expect);
        // cross-check against direct enumeration of the expanded torus
        CHECK(weighted_Z_brute(torus_expand(c.fd, c.n)) == c.expect);
    }

    // individual sectors for two calibrated cases
    auto hc2 = torus_partition(honeycomb_unit(), 2);
    CHECK(hc2.sector[0][0] == -3);
    CHECK(hc2.sector[1][0] == 5);
    CHECK(hc2.sector[0][1] == 5);
    CHECK(hc2.sector[1][1] == 5);
    CHECK(hc2.negated_sector == 0);

    auto s321 = torus_partition(square_3x2(), 1);
    CHECK(s321.sector[0][0] == 2);
    CHECK(s321.sector[1][0] == -2);
    CHECK(s321.sector[0][1] == 14);
    CHECK(s321.sector[1][1] == 14);
}

TEST_CASE("height change distribution matches enumeration") {
    // expected class counts for H_n on the n x n torus, index [hx][hy]
    std::vector<std::vector<long long>> e1 = {{1, 1}, {1, 0}};
    std::vector<std::vector<long long>> e2 = {{1, 2, 1}, {2, 2, 0}, {1, 0, 0}};
    std::vector<std::vector<long long>> e3 = {
        {1, 3, 3, 1}, {3, 21, 3, 0}, {3, 3, 0, 0}, {1, 0, 0, 0}};
    std::vector<std::vector<std::vector<long long>>> tables = {e1, e2, e3};

    for (int n = 1; n <= 3; ++n) {
        auto d = height_distribution_honeycomb(n);
        auto& expect = tables[n - 1];
        REQUIRE(d.n == n);
        Int total = 0;
        for (int hx = 0; hx <= n; ++hx)
            for (int hy = 0; hy <= n; ++hy) {
                CHECK(d.count[hx][hy] == expect[hx][hy]);
                total += d.count[hx][hy];
                if (d.count[hx][hy] > 0)
                    CHECK(d.sign[hx][hy] == class_sign(n, hx, hy));
            }
        CHECK(d.total == total);
        CHECK(d.total == torus_partition(honeycomb_unit(), n).combined);
    }
}

TEST_CASE("class sign law") {
    CHECK(class_sign(2, 0, 0) == 1);
    CHECK(class_sign(2, 1, 0) == -1);
    CHECK(class_sign(2, 0, 1) == -1);
    CHECK(class_sign(2, 1, 1) == -1);
    CHECK(class_sign(2, 2, 0) == 1);
    CHECK(class_sign(3, 1, 1) == -1);
    CHECK(class_sign(3, 0, 1) == 1);
    CHECK(class_sign(3, 3, 0) == 1);
    // gcd parity equals hx + hy + hx*hy mod 2
    for (int n = 1; n <= 4; ++n)
        for (int hx = 0; hx <= n; ++hx)
            for (int hy = 0; hy <= n; ++hy) {
                int alt = ((hx * hy + (n + 1) * (hx + hy)) % 2) ? -1 : 1;
                CHECK(class_sign(n, hx, hy) == alt);
            }
}

TEST_CASE("height distribution is log-Gaussian for n = 9") {
    auto d = height_distribution_honeycomb(9);
    CHECK(d.total == torus_partition(honeycomb_unit(), 9).combined);
    auto fit = fit_height_distribution(d);
    CHECK(fit.peak_hx == 3);
    CHECK(fit.peak_hy == 3);
    CHECK(fit.c > 0);
    CHECK(fit.r2 >= 0.99);
}
