#pragma once

// Reference computations written against plain std::vector so they share no code with
// the library. Dense, slow, and obvious on purpose.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat identity(std::size_t d) {
    Mat I(d, Vec(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) I[i][i] = 1.0;
    return I;
}

inline Mat diag(const Vec& v) {
    Mat D(v.size(), Vec(v.size(), 0.0));
    for (std::size_t i = 0; i < v.size(); ++i) D[i][i] = v[i];
    return D;
}

inline Mat mul(const Mat& A, const Mat& B) {
    const std::size_t n = A.size(), m = B[0].size(), k = B.size();
    Mat C(n, Vec(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
    return C;
}

inline Vec mul(const Mat& A, const Vec& x) {
    Vec y(A.size(), 0.0);
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
    return y;
}

inline Mat add(const Mat& A, const Mat& B, double b = 1.0) {
    Mat C = A;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[i].size(); ++j) C[i][j] += b * B[i][j];
    return C;
}

inline Vec add(const Vec& a, const Vec& b, double s = 1.0) {
    Vec c = a;
    for (std::size_t i = 0; i < a.size(); ++i) c[i] += s * b[i];
    return c;
}

inline Vec scale(const Vec& a, double s) {
    Vec c = a;
    for (double& v : c) v *= s;
    return c;
}

inline Mat scale(const Mat& A, double s) {
    Mat C = A;
    for (auto& row : C)
        for (double& v : row) v *= s;
    return C;
}

inline double norm(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double dist(const Vec& a, const Vec& b) { return norm(add(a, b, -1.0)); }

// k-fold product, no squaring
inline Mat power(const Mat& A, int k) {
    Mat P = identity(A.size());
    for (int i = 0; i < k; ++i) P = mul(P, A);
    return P;
}

// Gaussian elimination with partial pivoting
inline Vec solve(Mat A, Vec b) {
    const std::size_t n = A.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        if (A[p][c] == 0.0) throw std::runtime_error("singular");
        std::swap(A[p], A[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = A[r][c] / A[c][c];
            for (std::size_t j = c; j < n; ++j) A[r][j] -= f * A[c][j];
            b[r] -= f * b[c];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
        x[i] = s / A[i][i];
    }
    return x;
}

struct Quad {
    Mat A;
    Vec xstar;
};

inline Vec grad(const Quad& q, const Vec& x) { return mul(q.A, add(x, q.xstar, -1.0)); }

inline double value(const Quad& q, const Vec& x) {
    Vec d = add(x, q.xstar, -1.0);
    Vec Ad = mul(q.A, d);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * Ad[i];
    return 0.5 * s;
}

// x* = A^{-1} (1/M) sum A_m x_m*
inline Vec global_optimum(const std::vector<Quad>& ms) {
    const std::size_t d = ms[0].xstar.size();
    Mat A(d, Vec(d, 0.0));
    Vec b(d, 0.0);
    for (const auto& q : ms) {
        A = add(A, q.A, 1.0 / ms.size());
        b = add(b, mul(q.A, q.xstar), 1.0 / ms.size());
    }
    return solve(A, b);
}

// Plain local GD: every machine steps K times from x, server averages displacements.
inline Vec local_gd(const std::vector<Quad>& ms, Vec x, double eta, double beta, int K, int R) {
    const std::size_t M = ms.size();
    for (int r = 0; r < R; ++r) {
        Vec avg(x.size(), 0.0);
        for (const auto& q : ms) {
            Vec y = x;
            for (int k = 0; k < K; ++k) y = add(y, grad(q, y), -eta);
            avg = add(avg, add(y, x, -1.0), 1.0 / M);
        }
        x = add(x, avg, beta);
    }
    return x;
}

// x_inf solves C x = (1/M) sum C_m x_m*, C_m = I - (I - eta A_m)^K
inline Vec fixed_point(const std::vector<Quad>& ms, double eta, int K) {
    const std::size_t d = ms[0].xstar.size();
    Mat C(d, Vec(d, 0.0));
    Vec b(d, 0.0);
    for (const auto& q : ms) {
        Mat Cm = add(identity(d), power(add(identity(d), q.A, -eta), K), -1.0);
        C = add(C, Cm, 1.0 / ms.size());
        b = add(b, mul(Cm, q.xstar), 1.0 / ms.size());
    }
    return solve(C, b);
}

// largest |eigenvalue| of a symmetric matrix by power iteration on A^2
inline double spectral_norm(const Mat& A, int iters = 2000) {
    Vec v(A.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
    double lam = 0.0;
    for (int t = 0; t < iters; ++t) {
        Vec w = mul(A, mul(A, v));
        double n = norm(w);
        if (n == 0.0) return 0.0;
        lam = std::sqrt(n / norm(v));
        v = scale(w, 1.0 / n);
    }
    return lam;
}

}  // namespace oracle
