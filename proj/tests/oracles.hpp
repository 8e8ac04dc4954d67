#pragma once

#include <cmath>

#include "ob/spectral.hpp"

namespace ob::oracle {

// L W = y^3 exp(-y) with W = 0 at both ends (the beta -> infinity limit of
// the Robin condition), then L^2 Psi = W with clamped ends; L = D^2 - 1.
// Returns Psi''(0) and Psi'''(0).
struct ClampedDerivs {
    double d2 = 0;
    double d3 = 0;
};

inline ClampedDerivs clamped_bvp_k1(int n = 160, double h = 40.0) {
    Grid g = make_grid(n, h, 2.0);
    Mat L = g.D2 - Mat::Identity(n, n);
    Mat A = L;
    Vec rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = std::pow(g.y[i], 3) * std::exp(-g.y[i]);
    for (int i : {0, n - 1}) {
        A.row(i).setZero();
        A(i, i) = 1;
        rhs[i] = 0;
    }
    Vec W = A.partialPivLu().solve(rhs);
    Mat B = L * L;
    Vec r = W;
    for (int i : {0, n - 1}) {
        B.row(i).setZero();
        B(i, i) = 1;
        r[i] = 0;
    }
    B.row(1) = g.D1.row(0);
    r[1] = 0;
    B.row(n - 2) = g.D1.row(n - 1);
    r[n - 2] = 0;
    Vec Psi = B.partialPivLu().solve(r);
    Vec d2 = g.D2 * Psi;
    return {d2[0], g.D1.row(0).dot(d2)};
}

}  // namespace ob::oracle
