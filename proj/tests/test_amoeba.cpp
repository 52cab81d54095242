#include <catch2/catch_amalgamated.hpp>

#include "dimer/amoeba.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <set>

using namespace dimer;

TEST_CASE("polynomial roots") {
    // (w - 2)(w + 3i)(w - 1/2) = w^3 + (-5/2 + 3i) w^2 + (1 - 15i/2) w + 3i
    std::vector<Cplx> c = {Cplx(0, 3), Cplx(1, -7.5), Cplx(-2.5, 3), Cplx(1, 0)};
    auto r = poly_roots(c);
    REQUIRE(r.size() == 3);
    std::sort(r.begin(), r.end(), [](Cplx a, Cplx b) { return std::abs(a) < std::abs(b); });
    CHECK(std::abs(r[0] - Cplx(0.5, 0)) < 1e-10);
    CHECK(std::abs(r[1] - Cplx(2, 0)) < 1e-10);
    CHECK(std::abs(r[2] - Cplx(0, -3)) < 1e-10);

    auto q = poly_roots({Cplx(1, 0), Cplx(0, 0), Cplx(1, 0)});
    REQUIRE(q.size() == 2);
    CHECK(std::abs(std::abs(q[0]) - 1) < 1e-12);
    CHECK(std::abs(q[0] + q[1]) < 1e-12);

    auto z = poly_roots({Cplx(0, 0), Cplx(0, 0), Cplx(1, 0), Cplx(1, 0)});
    REQUIRE(z.size() == 3); // w^2 (1 + w)
    CHECK(std::abs(z[0]) == 0.0);
    CHECK(std::abs(z[1]) == 0.0);
    CHECK(std::abs(z[2] + 1.0) < 1e-12);
}

TEST_CASE("newton polygons of the standard domains") {
    auto tri = newton_polygon(charpoly(honeycomb_unit()));
    REQUIRE(tri.hull.size() == 3);
    std::set<std::pair<int, int>> tset(tri.hull.begin(), tri.hull.end());
    CHECK(tset == std::set<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}});
    CHECK(tri.contains(1.0 / 3, 1.0 / 3));
    CHECK(tri.strictly_inside(1.0 / 3, 1.0 / 3));
    CHECK(!tri.contains(0.7, 0.7));
    CHECK(tri.contains(0.5, 0.5));
    CHECK(!tri.strictly_inside(0.5, 0.5));

    auto sq = newton_polygon(charpoly(square_unit()));
    REQUIRE(sq.hull.size() == 4);

    auto ex = newton_polygon(charpoly(square_3x2(1, 2, 1, 1, 1)));
    std::set<std::pair<int, int>> eset(ex.hull.begin(), ex.hull.end());
    CHECK(eset == std::set<std::pair<int, int>>{{-1, 0}, {0, -2}, {1, -1}, {0, 1}});
    CHECK(ex.strictly_inside(0, 0));
    CHECK(ex.strictly_inside(0, -1));
}

TEST_CASE("Lobachevsky function") {
    CHECK(lobachevsky(0) == 0.0);
    CHECK(std::abs(lobachevsky(M_PI / 2)) < 1e-14);
    CHECK(lobachevsky(M_PI / 3) == Catch::Approx(0.338313868803).epsilon(1e-9));
    // odd and pi-periodic
    CHECK(lobachevsky(-0.4) == Catch::Approx(-lobachevsky(0.4)).margin(1e-14));
    CHECK(lobachevsky(M_PI - 0.4) == Catch::Approx(-lobachevsky(0.4)).margin(1e-13));
    CHECK(lobachevsky(0.4 + M_PI) == Catch::Approx(lobachevsky(0.4)).margin(1e-13));
    // against direct quadrature of the defining integral
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double x : {0.3, 1.0, 1.4}) {
        double qv = -ts.integrate([](double t) { return std::log(2 * std::sin(t)); }, 0.0, x);
        CHECK(lobachevsky(x) == Catch::Approx(qv).margin(1e-12));
    }
}

TEST_CASE("free energy anchors") {
    double Fhc = free_energy(charpoly(honeycomb_unit()));
    CHECK(Fhc == Catch::Approx(0.3230659).margin(1e-6));
    CHECK(Fhc == Catch::Approx(3 * lobachevsky(M_PI / 3) / M_PI).margin(1e-9));

    // per fundamental domain (two lattice sites), hence 2G/pi
    double Fsq = free_energy(charpoly(square_unit()));
    double G = boost::math::constants::catalan<double>();
    CHECK(Fsq == Catch::Approx(2 * G / M_PI).margin(1e-8));

    Laurent2 dom = {{{0, 0}, Rational(3)}, {{1, 0}, Rational(1)}, {{0, 1}, Rational(1)}};
    CHECK(free_energy(dom) == Catch::Approx(std::log(3.0)).margin(1e-9));

    Laurent2 mono = {{{2, 3}, Rational(5)}};
    CHECK(free_energy(mono) == Catch::Approx(std::log(5.0)).margin(1e-12));
}

TEST_CASE("Ronkin function is linear on complement components") {
    Laurent2 hc = charpoly(honeycomb_unit());
    CHECK(ronkin(hc, 6, 0) == Catch::Approx(6.0).margin(1e-8));
    CHECK(ronkin(hc, 0, 6) == Catch::Approx(6.0).margin(1e-8));
    CHECK(ronkin(hc, -6, -6) == Catch::Approx(0.0).margin(1e-8));
    // midpoint convexity on a coarse grid
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            double x = -2 + i, y = -2 + j;
            double avg = 0.5 * (ronkin(hc, x + 0.5, y, 1e-9) + ronkin(hc, x - 0.5, y, 1e-9));
            CHECK(avg - ronkin(hc, x, y, 1e-9) >= -1e-8);
        }
}

TEST_CASE("surface tension") {
    CHECK(surface_tension_honeycomb(0, 0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(surface_tension_honeycomb(1, 0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(surface_tension_honeycomb(1.0 / 3, 1.0 / 3) ==
          Catch::Approx(-0.3230659).margin(1e-6));
    CHECK_THROWS_AS(surface_tension_honeycomb(0.7, 0.7), std::domain_error);
    CHECK_THROWS_AS(surface_tension_honeycomb(-0.1, 0.5), std::domain_error);
    // grid scan: minimum at the symmetric point
    double best = 1e9;
    double bs = 0, bt = 0;
    for (int i = 1; i < 12; ++i)
        for (int j = 1; j < 12 - i; ++j) {
            double v = surface_tension_honeycomb(i / 12.0, j / 12.0);
            if (v < best) {
                best = v;
                bs = i / 12.0;
                bt = j / 12.0;
            }
        }
    CHECK(bs == Catch::Approx(1.0 / 3).margin(1e-9));
    CHECK(bt == Catch::Approx(1.0 / 3).margin(1e-9));
}

TEST_CASE("Legendre pairs and duality round trip") {
    Laurent2 hc = charpoly(honeycomb_unit());
    auto lp0 = legendre_pair(hc, 0, 0);
    CHECK(lp0.s == Catch::Approx(1.0 / 3).margin(1e-6));
    CHECK(lp0.t == Catch::Approx(1.0 / 3).margin(1e-6));
    CHECK(lp0.sigma == Catch::Approx(-free_energy(hc)).margin(1e-6));

    // slope from the triangle angles: sides (1, e^X, e^Y)
    double X = std::log(1.5);
    auto lp1 = legendre_pair(hc, X, 0);
    double thb = std::acos((1 + 1 - 2.25) / 2.0);
    double thc = std::acos((1 + 2.25 - 1) / 3.0);
    CHECK(lp1.s == Catch::Approx(thb / M_PI).margin(1e-5));
    CHECK(lp1.t == Catch::Approx(thc / M_PI).margin(1e-5));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    int used = 0;
    double worst = 0;
    while (used < 50) {
        double x = u(rng), y = u(rng);
        auto lp = legendre_pair(hc, x, y);
        if (lp.s < 0.02 || lp.t < 0.02 || lp.s + lp.t > 0.98) continue;
        double sig = surface_tension_honeycomb(lp.s, lp.t);
        worst = std::max(worst,
                         std::abs(sig + ronkin(hc, x, y, 1e-11) - lp.s * x - lp.t * y));
        ++used;
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("amoeba membership") {
    Laurent2 hc = charpoly(honeycomb_unit());
    CHECK(amoeba_member(hc, 0, 0));
    CHECK(!amoeba_member(hc, 10, 0));
    CHECK(!amoeba_member(hc, -3, -3));
    Laurent2 node = {{{0, 0}, Rational(4)},
                     {{1, 0}, Rational(1)},
                     {{-1, 0}, Rational(1)},
                     {{0, 1}, Rational(1)},
                     {{0, -1}, Rational(1)}};
    CHECK(amoeba_member(node, 0, 0)); // node at z = w = -1
    Laurent2 mono = {{{1, 1}, Rational(7)}};
    CHECK(!amoeba_member(mono, 0, 0));
}

TEST_CASE("amoeba raster components") {
    auto A = amoeba_raster(charpoly(honeycomb_unit()), -4, 4, -4, 4, 400, 400);
    REQUIRE(A.components.size() == 3);
    std::set<std::pair<int, int>> duals;
    for (auto& C : A.components) {
        CHECK(!C.bounded);
        duals.insert(C.dual);
    }
    CHECK(duals == std::set<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}});

    auto B = amoeba_raster(charpoly(square_unit()), -4, 4, -4, 4, 400, 400);
    REQUIRE(B.components.size() == 4);
    duals.clear();
    for (auto& C : B.components) {
        CHECK(!C.bounded);
        duals.insert(C.dual);
    }
    CHECK(duals == std::set<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
}

TEST_CASE("gas and frozen components of the marked 3x2 domain") {
    Laurent2 ex = charpoly(square_3x2(1, 2, 1, 1, 1));
    auto A = amoeba_raster(ex, -6, 6, -6, 6, 400, 400);
    std::set<std::pair<int, int>> gas, frozen;
    for (auto& C : A.components)
        (C.bounded ? gas : frozen).insert(C.dual);
    CHECK(gas == std::set<std::pair<int, int>>{{0, 0}, {0, -1}});
    CHECK(frozen == std::set<std::pair<int, int>>{{1, -1}, {0, 1}, {0, -2}, {-1, 0}});

    auto np = newton_polygon(ex);
    CHECK(phase_classify(A, np, 0, 0).phase == Phase::Gas);
    CHECK(phase_classify(A, np, 0, -1).phase == Phase::Gas);
    CHECK(phase_classify(A, np, 1, -1).phase == Phase::Frozen);
    CHECK(phase_classify(A, np, 0, 1).phase == Phase::Frozen);
    CHECK(phase_classify(A, np, 0, -2).phase == Phase::Frozen);
    CHECK(phase_classify(A, np, -1, 0).phase == Phase::Frozen);
    CHECK(phase_classify(A, np, 0.2, -0.5).phase == Phase::Liquid);
    CHECK_THROWS_AS(phase_classify(A, np, 2, 2), std::domain_error);

    auto hcA = amoeba_raster(charpoly(honeycomb_unit()), -4, 4, -4, 4, 200, 200);
    auto hcN = newton_polygon(charpoly(honeycomb_unit()));
    CHECK(phase_classify(hcA, hcN, 1.0 / 3, 1.0 / 3).phase == Phase::Liquid);
    CHECK(phase_classify(hcA, hcN, 1, 0).phase == Phase::Frozen);
}

TEST_CASE("Harnack fibers are at most 2 to 1") {
    for (auto& P : {charpoly(honeycomb_unit()), charpoly(square_unit()),
                    charpoly(square_3x2(1, 2, 1, 1, 1))}) {
        auto pts = sample_amoeba_points(P, 60, -3, 3, 42);
        auto rep = harnack_check(P, pts);
        CHECK(rep.samples == 60);
        CHECK(rep.max_fiber <= 2);
        CHECK(rep.violations == 0);
    }
    Laurent2 bad = {{{0, 0}, Rational(3)},
                    {{1, 0}, Rational(1)},
                    {{-1, 0}, Rational(1)},
                    {{0, 1}, Rational(1)},
                    {{0, -1}, Rational(1)}};
    auto rep = harnack_check(bad, {{0.0, 0.0}});
    CHECK(rep.violations == 1);
    CHECK(rep.max_fiber > 2);
}
