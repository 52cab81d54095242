#include <catch2/catch_amalgamated.hpp>

#include "dimer/fluctuations.hpp"
#include "dimer/graph.hpp"
#include "dimer/kasteleyn.hpp"

#include <Eigen/Dense>

#include <complex>
#include <map>

using namespace dimer;
using Cplx = std::complex<double>;

namespace {

constexpr double PI = 3.141592653589793238462643383279502884;

struct Angles {
    double a, b, c;
};

Angles triangle_angles(double a, double b, double c) {
    return {std::acos((b * b + c * c - a * a) / (2 * b * c)),
            std::acos((a * a + c * c - b * b) / (2 * a * c)),
            std::acos((a * a + b * b - c * c) / (2 * a * b))};
}

double sgn_sin(int k, double theta, double w) {
    double s = std::sin(k * theta) / (PI * k * w);
    return (k & 1) ? -s : s;
}

// Riemann-sum Fourier coefficient of 1/(a + b z + c w), used as a slow but
// convention-free cross check.
double brute_kinv(int x, int y, int N) {
    Cplx s = 0;
    for (int i = 0; i < N; ++i) {
        Cplx z = std::polar(1.0, 2 * PI * (i + 0.5) / N);
        Cplx zy = std::pow(z, double(-y));
        for (int j = 0; j < N; ++j) {
            Cplx w = std::polar(1.0, 2 * PI * (j + 0.5) / N);
            s += zy * std::pow(w, double(x)) / (1.0 + z + w);
        }
    }
    return (s / double(N) / double(N)).real();
}

}  // namespace

TEST_CASE("infinite kernel closed forms", "[fluctuations]") {
    // uniform weights: theta_a = pi/3
    CHECK(kinv_infinite(0, 0, 1, 1, 1) == Catch::Approx(1.0 / 3).margin(1e-10));
    CHECK(kinv_infinite(1, 1, 1, 1, 1) == Catch::Approx(-std::sin(PI / 3) / PI).margin(1e-9));
    for (int k = 1; k <= 4; ++k)
        CHECK(kinv_infinite(k, k, 1, 1, 1) == Catch::Approx(sgn_sin(k, PI / 3, 1)).margin(1e-9));

    double a = 1.2, b = 1.0, c = 0.9;
    Angles th = triangle_angles(a, b, c);
    CHECK(kinv_infinite(0, 0, a, b, c) == Catch::Approx(th.a / (PI * a)).margin(1e-10));
    for (int k = 1; k <= 3; ++k) {
        CHECK(kinv_infinite(k, k, a, b, c) == Catch::Approx(sgn_sin(k, th.a, a)).margin(1e-9));
        CHECK(kinv_infinite(1, k, a, b, c) == Catch::Approx(sgn_sin(k, th.c, c)).margin(1e-9));
        CHECK(kinv_infinite(-k, -1, a, b, c) == Catch::Approx(sgn_sin(k, th.b, b)).margin(1e-9));
    }
    CHECK_THROWS(kinv_infinite(0, 0, 1, -1, 1));
}

TEST_CASE("frozen weights give a deterministic column", "[fluctuations]") {
    // a >= b + c: every column site carries an a-edge
    CHECK(2.5 * kinv_infinite(0, 0, 2.5, 1, 1) == Catch::Approx(1.0).margin(1e-12));
    for (int k = 1; k <= 3; ++k)
        CHECK(kinv_infinite(k, k, 2.5, 1, 1) == Catch::Approx(0.0).margin(1e-12));
    // b or c dominant: no a-edges at all
    CHECK(kinv_infinite(0, 0, 1, 2.5, 1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(kinv_infinite(0, 0, 1, 1, 2.5) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("kernel matches brute Fourier sums", "[fluctuations]") {
    for (auto [x, y] : std::vector<std::pair<int, int>>{{-2, 1}, {0, 3}, {-1, -3}, {3, -1}, {2, 0}})
        CHECK(kinv_infinite(x, y, 1, 1, 1) == Catch::Approx(brute_kinv(x, y, 1024)).margin(1.5e-3));
}

TEST_CASE("antiperiodic torus sums converge to the kernel", "[fluctuations]") {
    auto maxerr = [&](int n) {
        double e = 0;
        for (int k = 0; k <= 3; ++k)
            e = std::max(e, std::abs(kinv_torus(n, k, k, 1, 1, 1) - kinv_infinite(k, k, 1, 1, 1)));
        e = std::max(e, std::abs(kinv_torus(n, 1, 2, 1, 1, 1) - kinv_infinite(1, 2, 1, 1, 1)));
        return e;
    };
    double e10 = maxerr(10), e20 = maxerr(20), e40 = maxerr(40);
    CHECK(e20 < e10);
    CHECK(e40 < e20);
    CHECK(e40 <= 0.025);
}

TEST_CASE("column kernel determinants match a finite hexagon", "[fluctuations]") {
    // P(k consecutive column a-edges) at the center of hexagon(N, N, N),
    // computed from the finite Kasteleyn inverse, against det[entry(i - j)].
    auto finite_probs = [&](int N) {
        PlanarGraph g = hexagon_graph(N, N, N);
        apply_kasteleyn_phasing(g);
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(g.nb, g.nw);
        for (const auto& e : g.edges) {
            GRat v = e.value();
            K(e.b, e.w) = Cplx(to_double(v.re), to_double(v.im));
        }
        std::map<std::pair<int, int>, int> wid;
        for (int i = 0; i < g.nw; ++i) wid[g.wcell[i]] = i;
        std::vector<int> eids;
        for (int n = 0; n < 3; ++n) {
            int w = wid.at({n, N - n});
            for (int eid : g.wadj[w])
                if (g.edges[eid].type == 0) eids.push_back(eid);
        }
        REQUIRE(eids.size() == 3);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
        std::map<int, Eigen::VectorXcd> invcol;
        for (int eid : eids) {
            int bb = g.edges[eid].b;
            if (!invcol.count(bb)) {
                Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(g.nb);
                rhs(bb) = 1.0;
                invcol[bb] = lu.solve(rhs);
            }
        }
        std::vector<double> probs;
        for (int k = 1; k <= 3; ++k) {
            Eigen::MatrixXcd M(k, k);
            Cplx pref = 1.0;
            for (int i = 0; i < k; ++i) {
                const auto& ei = g.edges[eids[i]];
                GRat v = ei.value();
                pref *= Cplx(to_double(v.re), to_double(v.im));
                for (int j = 0; j < k; ++j) M(i, j) = invcol.at(ei.b)(g.edges[eids[j]].w);
            }
            probs.push_back(std::abs(pref * M.determinant()));
        }
        return probs;
    };

    ColumnKernel ker = ColumnKernel::from_weights(1, 1, 1);
    std::vector<double> det_inf;
    for (int k = 1; k <= 3; ++k) {
        Eigen::MatrixXd A(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) A(i, j) = ker.entry(i - j);
        det_inf.push_back(A.determinant());
        CHECK(det_inf.back() > 0);
    }
    // with the sign of entry(2) flipped, three consecutive edges would get a
    // negative "probability"; the finite region rules that out
    {
        Eigen::Matrix3d bad;
        double e0 = ker.entry(0), e1 = ker.entry(1), e2 = -ker.entry(2);
        bad << e0, e1, e2, e1, e0, e1, e2, e1, e0;
        CHECK(bad.determinant() < 0);
    }

    std::vector<double> p8 = finite_probs(8), p16 = finite_probs(16);
    double bound[3] = {0.013, 0.002, 2e-4};
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(p16[k] - det_inf[k]) < std::abs(p8[k] - det_inf[k]));
        CHECK(std::abs(p16[k] - det_inf[k]) <= bound[k]);
    }
}

TEST_CASE("column variance series", "[fluctuations]") {
    CHECK(column_variance(PI / 3, 1) == Catch::Approx(2.0 / 9).epsilon(1e-14));
    for (int k : {2, 7, 50, 200})
        CHECK(column_variance(PI / 3, k) ==
              Catch::Approx(column_variance_trace(PI / 3, k)).margin(1e-10));
    for (int k : {1, 2, 5, 20})
        CHECK(column_variance(PI / 3, 2 * k) > column_variance(PI / 3, k));

    // Var ~ log(k)/pi^2: slope of a least-squares line through log-spaced k
    std::vector<int> ks{100, 178, 316, 562, 1000, 1778, 3162, 5623, 10000};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k : ks) {
        double x = std::log(double(k)), y = column_variance(PI / 3, k);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    double n = double(ks.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == Catch::Approx(1.0 / (PI * PI)).epsilon(0.01));
}

TEST_CASE("asymptotic kernel", "[fluctuations]") {
    // exact on the diagonal
    for (int k = 1; k <= 5; ++k)
        CHECK(kinv_asymptotic(k, k) == Catch::Approx(kinv_infinite(k, k, 1, 1, 1)).margin(1e-9));
    CHECK(std::abs(kinv_asymptotic(1, 1) - kinv_infinite(1, 1, 1, 1, 1)) /
              std::abs(kinv_infinite(1, 1, 1, 1, 1)) <=
          1e-9);
    // O(r^-2) error away from the diagonal
    for (auto [dx, dy] :
         std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {2, 1}, {1, 3}, {-1, 2}})
        for (int r : {20, 40, 80}) {
            int x = dx * r / std::max(std::abs(dx), std::abs(dy));
            int y = dy * r / std::max(std::abs(dx), std::abs(dy));
            double err = std::abs(kinv_asymptotic(x, y) - kinv_infinite(x, y, 1, 1, 1));
            CHECK(err * double(x * x + y * y) <= 1.0);
        }
    CHECK_THROWS(kinv_asymptotic(0, 0));
}

TEST_CASE("gff second moment", "[fluctuations]") {
    CHECK(gff_second_moment({0, 0}, {0, 0}, {1, 0}, {2, 0}) == 0.0);
    CHECK(gff_second_moment({1, 2}, {3, -1}, {5, 5}, {5, 5}) == 0.0);

    // harmonic configuration against the four-Green's-function expansion
    Cplx z1{-1, 0}, z2{1, 0}, z3{0, -1}, z4{0, 1};
    auto g = [](Cplx p, Cplx q) { return -std::log(std::abs(p - q)) / (2 * PI); };
    double expanded = (g(z1, z3) - g(z1, z4) - g(z2, z3) + g(z2, z4)) / PI;
    CHECK(gff_second_moment(z1, z2, z3, z4) == Catch::Approx(expanded).margin(1e-13));

    CHECK(gff_second_moment(z1, z2, z4, z3) ==
          Catch::Approx(-gff_second_moment(z1, z2, z3, z4)).margin(1e-13));
    CHECK_THROWS(gff_second_moment(z1, z2, z1, z4));
}

TEST_CASE("torus chain basics", "[fluctuations]") {
    CHECK_THROWS(TriTorusChain(10, 1));
    CHECK_THROWS(TriTorusChain(0, 1));

    TriTorusChain ch(6, 7);
    CHECK(ch.valid_matching());
    int cnt[3] = {0, 0, 0};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) ++cnt[ch.at(i, j)];
    CHECK(cnt[0] == 12);
    CHECK(cnt[1] == 12);
    CHECK(cnt[2] == 12);

    // face (0,1) starts in the flippable pattern, face (0,0) does not
    CHECK(ch.flip_face(0, 0) == false);
    CHECK(ch.flip_face(0, 1) == true);
    CHECK(ch.valid_matching());

    for (int s = 0; s < 50; ++s) ch.sweep();
    CHECK(ch.valid_matching());
    int cnt2[3] = {0, 0, 0};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) ++cnt2[ch.at(i, j)];
    CHECK(cnt2[0] == 12);  // face flips preserve the winding sector
    CHECK(cnt2[1] == 12);
    CHECK(cnt2[2] == 12);

    // column endpoints: unit-speed straight segment of length m
    Column col{0, 0, 10};
    auto [lo, hi] = column_endpoints(col);
    CHECK(std::abs(hi - lo) == Catch::Approx(10.0).margin(1e-12));
    CHECK((hi - lo).real() == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("empirical moments match predictions on the torus", "[fluctuations]") {
    TriTorusChain ch(60, 11);
    Column A{0, 0, 10}, Bcol{16, -16, 10}, Bpar{20, 0, 10};

    PairMoments M1 = empirical_moment(ch, A, Bcol, 1500, 40000, 20);
    PairMoments M2 = empirical_moment(ch, A, Bpar, 1500, 0, 20);

    auto pred = [&](const Column& P, const Column& Q) {
        auto [plo, phi] = column_endpoints(P);
        auto [qlo, qhi] = column_endpoints(Q);
        return gff_second_moment(phi, plo, qhi, qlo);
    };
    double pred_col = pred(A, Bcol), pred_par = pred(A, Bpar);
    double pred_var = column_variance(PI / 3, A.m);

    // the fixed winding sector freezes the torus zero modes, which depresses
    // absolute moments by a few 1e-3; the allowance below covers it
    const double sector = 0.009;
    CHECK(std::abs(M1.var_a.mean - pred_var) <= 3 * M1.var_a.se + sector);
    CHECK(std::abs(M1.cross.mean - pred_col) <= 3 * M1.cross.se + sector);
    CHECK(std::abs(M2.cross.mean - pred_par) <= 3 * M2.cross.se + sector);

    // the sector shift cancels in differences of equal-length pair moments,
    // leaving a sharp test of the cross-ratio dependence
    double diff = M1.cross.mean - M2.cross.mean;
    double pred_diff = pred_col - pred_par;
    CHECK(std::abs(diff - pred_diff) <= 3 * std::hypot(M1.cross.se, M2.cross.se) + 0.002);

    // Wick: E[D_A^2 D_B^2] from measured second moments
    double wick = M2.var_a.mean * M2.var_b.mean + 2 * M2.cross.mean * M2.cross.mean;
    CHECK(std::abs(M2.fourth.mean - wick) <= 3 * M2.fourth.se + 0.004);

    // translation invariance at two fixed bases (no translation averaging)
    std::vector<double> p2s, q2s;
    for (int s = 0; s < 400; ++s) {
        for (int t = 0; t < 5; ++t) ch.sweep();
        double dp = column_increment(ch, A, 5, 7), dq = column_increment(ch, A, 29, 41);
        p2s.push_back(dp * dp);
        q2s.push_back(dq * dq);
    }
    MomentEstimate p2 = fluct_detail::batch_mean(p2s, 10), q2 = fluct_detail::batch_mean(q2s, 10);
    CHECK(std::abs(p2.mean - q2.mean) <= 4 * std::hypot(p2.se, q2.se));
}
