#include <catch2/catch_amalgamated.hpp>

#include "dimer/linalg_exact.hpp"
#include "dimer/numeric.hpp"

using namespace dimer;

TEST_CASE("rational parsing and printing") {
    CHECK(rational_from_string("3/4") == Rational(3, 4));
    CHECK(rational_from_string("-7") == Rational(-7));
    CHECK(rational_from_string("0.25") == Rational(1, 4));
    CHECK(rational_from_string("-1.5") == Rational(-3, 2));
    CHECK(to_string(Rational(22, 7)) == "22/7");
    CHECK_THROWS(rational_from_string("abc"));
}

TEST_CASE("exact square roots") {
    CHECK(exact_isqrt(Int(0)) == 0);
    CHECK(exact_isqrt(Int(144)) == 12);
    Int big = Int("123456789123456789");
    CHECK(exact_isqrt(big * big) == big);
    CHECK_THROWS(exact_isqrt(Int(2)));
    CHECK(exact_sqrt(Rational(9, 4)) == Rational(3, 2));
}

TEST_CASE("gaussian integers") {
    GInt a{Int(2), Int(3)}, b{Int(1), Int(-1)};
    GInt p = a * b; // (2+3i)(1-i) = 5+i
    CHECK(p.re == 5);
    CHECK(p.im == 1);
    CHECK(a.norm() == 13);
    GInt q = gint_div_exact(p, b);
    CHECK(q.re == a.re);
    CHECK(q.im == a.im);
}

TEST_CASE("gaussian rationals form a field") {
    GRat a{Rational(1, 2), Rational(3)}, b{Rational(-2), Rational(1, 5)};
    GRat c = (a / b) * b;
    CHECK(c.re == a.re);
    CHECK(c.im == a.im);
    CHECK(unit_phase(0).re == 1);
    CHECK(unit_phase(1).im == 1);
    CHECK(unit_phase(2).re == -1);
    CHECK(unit_phase(3).im == -1);
    CHECK(phase_exponent(unit_phase(3)) == 3);
    CHECK(phase_exponent(a) == -1);
}

TEST_CASE("bareiss determinant over gaussian integers") {
    // det [[1, 2], [3, 4]] = -2
    std::vector<std::vector<GInt>> m2 = {{GInt{Int(1)}, GInt{Int(2)}},
                                         {GInt{Int(3)}, GInt{Int(4)}}};
    GInt d2 = bareiss_det(m2);
    CHECK(d2.re == -2);
    CHECK(d2.im == 0);
    // det [[i, 1], [1, i]] = i^2 - 1 = -2
    std::vector<std::vector<GInt>> mi = {{GInt{Int(0), Int(1)}, GInt{Int(1)}},
                                         {GInt{Int(1)}, GInt{Int(0), Int(1)}}};
    GInt di = bareiss_det(mi);
    CHECK(di.re == -2);
    CHECK(di.im == 0);
}

TEST_CASE("exact determinant and inverse over gaussian rationals") {
    auto g = [](long re, long im = 0) { return GRat{Rational(re), Rational(im)}; };
    std::vector<std::vector<GRat>> m = {{g(1), g(2), g(0)},
                                        {g(0, 1), g(1), g(3)},
                                        {g(2), g(0), g(1)}};
    GRat d = det_exact(m);
    // expansion: 1*(1) - 2*(i - 6) + 0 = 13 - 2i
    CHECK(d.re == 13);
    CHECK(d.im == -2);
    auto inv = invert_exact(m);
    REQUIRE(!inv.empty());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            GRat s{};
            for (int k = 0; k < 3; ++k) s = s + m[i][k] * inv[k][j];
            CHECK(s.re == (i == j ? 1 : 0));
            CHECK(s.im == 0);
        }
}

TEST_CASE("lagrange interpolation recovers coefficients") {
    // p(x) = (3 - x + 2x^3) + i(x^2)
    auto p = [](Rational x) {
        GRat v;
        v.re = Rational(3) - x + 2 * x * x * x;
        v.im = x * x;
        return v;
    };
    std::vector<Rational> xs = {Rational(-2), Rational(-1), Rational(0), Rational(1),
                                Rational(5, 2)};
    std::vector<GRat> ys;
    for (auto& x : xs) ys.push_back(p(x));
    auto coef = lagrange_interpolate(xs, ys);
    REQUIRE(coef.size() == 5);
    CHECK(coef[0].re == 3);
    CHECK(coef[1].re == -1);
    CHECK(coef[2].im == 1);
    CHECK(coef[3].re == 2);
    CHECK(coef[4].re == 0);
    CHECK(coef[4].im == 0);
}
