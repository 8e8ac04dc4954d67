#include <cmath>
#include <numbers>

#include "ob/spectral.hpp"

namespace ob {

namespace {

// Clenshaw-Curtis weights for the nodes cos(pi j / N), j = 0..N.
Vec clenshaw_curtis(int N) {
    Vec w = Vec::Zero(N + 1);
    const double pi = std::numbers::pi;
    if (N == 1) {
        w.setConstant(1.0);
        return w;
    }
    Vec theta(N + 1);
    for (int j = 0; j <= N; ++j) theta[j] = pi * j / N;
    Vec v = Vec::Ones(N - 1);
    if (N % 2 == 0) {
        w[0] = w[N] = 1.0 / (N * N - 1.0);
        for (int m = 1; m < N / 2; ++m)
            for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2 * m * theta[j]) / (4.0 * m * m - 1);
        for (int j = 1; j < N; ++j) v[j - 1] -= std::cos(N * theta[j]) / (N * N - 1.0);
    } else {
        w[0] = w[N] = 1.0 / (N * N);
        for (int m = 1; m <= (N - 1) / 2; ++m)
            for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2 * m * theta[j]) / (4.0 * m * m - 1);
    }
    for (int j = 1; j < N; ++j) w[j] = 2.0 * v[j - 1] / N;
    return w;
}

Vec bary_weights(int n) {
    Vec bw(n);
    for (int j = 0; j < n; ++j) bw[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
    return bw;
}

template <class V>
typename V::Scalar bary_interp(const Vec& s, const V& f, double sq) {
    using S = typename V::Scalar;
    Vec bw = bary_weights(static_cast<int>(s.size()));
    S num = 0;
    double den = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        double d = sq - s[j];
        if (std::abs(d) < 1e-15) return f[j];
        double c = bw[j] / d;
        num += c * f[j];
        den += c;
    }
    return num / den;
}

}  // namespace

Grid make_grid(int n, double h, double l) {
    if (n < 6) throw Error("spectral", "grid needs at least 6 nodes");
    if (!(h > 0) || !(l > 0)) throw Error("spectral", "grid needs h > 0 and l > 0");
    Grid g;
    g.n = n;
    g.h = h;
    g.l = l;
    const int N = n - 1;
    const double pi = std::numbers::pi;
    g.s.resize(n);
    for (int j = 0; j < n; ++j) g.s[j] = -std::cos(pi * j / N);
    g.s[0] = -1.0;
    g.s[N] = 1.0;

    // differentiation in s from barycentric weights
    Vec bw = bary_weights(n);
    Mat Ds = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Ds(i, j) = (bw[j] / bw[i]) / (g.s[i] - g.s[j]);
            diag -= Ds(i, j);
        }
        Ds(i, i) = diag;
    }

    const double c = 1.0 + 2.0 * l / h;
    g.y.resize(n);
    Vec dyds(n);
    for (int j = 0; j < n; ++j) {
        double sj = g.s[j];
        g.y[j] = l * (1.0 + sj) / (c - sj);
        dyds[j] = l * (c + 1.0) / ((c - sj) * (c - sj));
    }
    g.y[0] = 0.0;
    g.y[N] = h;

    g.D1 = dyds.cwiseInverse().asDiagonal() * Ds;
    g.D2 = g.D1 * g.D1;

    Vec cc = clenshaw_curtis(N);  // symmetric, so node order does not matter
    g.w = cc.cwiseProduct(dyds);
    return g;
}

double Grid::interp(const Vec& f, double yq) const {
    double c = 1.0 + 2.0 * l / h;
    double sq = (c * yq - l) / (yq + l);
    return bary_interp(s, f, sq);
}

cplx Grid::interp(const CVec& f, double yq) const {
    double c = 1.0 + 2.0 * l / h;
    double sq = (c * yq - l) / (yq + l);
    return bary_interp(s, f, sq);
}

}  // namespace ob
