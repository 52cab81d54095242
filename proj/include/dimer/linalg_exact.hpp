#pragma once

#include "dimer/numeric.hpp"

#include <vector>

namespace dimer {

// Fraction-free Bareiss determinant over Z[i]. Mutates its argument.
inline GInt bareiss_det(std::vector<std::vector<GInt>>& a) {
    const int n = (int)a.size();
    if (n == 0) return GInt(Int(1));
    GInt prev(Int(1));
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k].is_zero()) {
            int p = -1;
            for (int r = k + 1; r < n; ++r)
                if (!a[r][k].is_zero()) { p = r; break; }
            if (p < 0) return GInt(Int(0));
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                GInt t = a[k][k] * a[i][j] - a[i][k] * a[k][j];
                a[i][j] = gint_div_exact(t, prev);
            }
            a[i][k] = GInt(Int(0));
        }
        prev = a[k][k];
    }
    GInt d = a[n - 1][n - 1];
    return sign < 0 ? -d : d;
}

// Determinant of a Gaussian-rational matrix: scale rows to Z[i], run Bareiss.
inline GRat det_exact(const std::vector<std::vector<GRat>>& m) {
    const int n = (int)m.size();
    if (n == 0) return GRat(1);
    std::vector<std::vector<GInt>> a(n, std::vector<GInt>(n));
    Rational scale(1);
    for (int i = 0; i < n; ++i) {
        Int l(1);
        for (int j = 0; j < n; ++j) {
            l = boost::multiprecision::lcm(l, denominator(m[i][j].re));
            l = boost::multiprecision::lcm(l, denominator(m[i][j].im));
        }
        scale *= Rational(1, l);
        for (int j = 0; j < n; ++j) {
            Rational re = m[i][j].re * l, im = m[i][j].im * l;
            a[i][j] = GInt(numerator(re), numerator(im));
        }
    }
    GInt d = bareiss_det(a);
    return GRat(Rational(d.re), Rational(d.im)) * GRat(scale);
}

// Gauss-Jordan inverse over Q(i); returns empty on singular input.
inline std::vector<std::vector<GRat>> invert_exact(std::vector<std::vector<GRat>> a) {
    const int n = (int)a.size();
    std::vector<std::vector<GRat>> inv(n, std::vector<GRat>(n));
    for (int i = 0; i < n; ++i) inv[i][i] = GRat(1);
    for (int c = 0; c < n; ++c) {
        int p = -1;
        for (int r = c; r < n; ++r)
            if (!a[r][c].is_zero()) { p = r; break; }
        if (p < 0) return {};
        std::swap(a[c], a[p]);
        std::swap(inv[c], inv[p]);
        GRat piv = a[c][c];
        for (int j = 0; j < n; ++j) { a[c][j] = a[c][j] / piv; inv[c][j] = inv[c][j] / piv; }
        for (int r = 0; r < n; ++r) {
            if (r == c || a[r][c].is_zero()) continue;
            GRat f = a[r][c];
            for (int j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

// Solve a (small) linear system over Q(i) by Gauss-Jordan; empty on singular.
inline std::vector<GRat> solve_exact(std::vector<std::vector<GRat>> a, std::vector<GRat> b) {
    const int n = (int)a.size();
    for (int c = 0; c < n; ++c) {
        int p = -1;
        for (int r = c; r < n; ++r)
            if (!a[r][c].is_zero()) { p = r; break; }
        if (p < 0) return {};
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        GRat piv = a[c][c];
        for (int j = c; j < n; ++j) a[c][j] = a[c][j] / piv;
        b[c] = b[c] / piv;
        for (int r = 0; r < n; ++r) {
            if (r == c || a[r][c].is_zero()) continue;
            GRat f = a[r][c];
            for (int j = c; j < n; ++j) a[r][j] -= f * a[c][j];
            b[r] -= f * b[c];
        }
    }
    return b;
}

// Exact Lagrange interpolation through (x_i, y_i) over Q(i); returns
// coefficients c_0..c_{n-1} of the unique degree < n polynomial.
inline std::vector<GRat> lagrange_interpolate(const std::vector<Rational>& xs,
                                              const std::vector<GRat>& ys) {
    const int n = (int)xs.size();
    std::vector<GRat> coeffs(n, GRat(0));
    std::vector<Rational> master(n + 1, Rational(0));
    master[0] = Rational(1);
    int deg = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = deg + 1; j >= 1; --j) master[j] = master[j - 1] - xs[i] * master[j];
        master[0] = -xs[i] * master[0];
        ++deg;
    }
    std::vector<Rational> q(n + 1);
    for (int i = 0; i < n; ++i) {
        // Divide master polynomial by (x - x_i) synthetically.
        Rational carry = master[n];
        for (int j = n - 1; j >= 0; --j) {
            q[j] = carry;
            carry = master[j] + xs[i] * carry;
        }
        Rational denom(1);
        for (int j = 0; j < n; ++j)
            if (j != i) denom *= (xs[i] - xs[j]);
        GRat f = ys[i] / GRat(denom);
        for (int j = 0; j < n; ++j) coeffs[j] += f * GRat(q[j]);
    }
    return coeffs;
}

} // namespace dimer
