#include <cmath>

#include "ob/spectral.hpp"

namespace ob {

cplx green_closed(cplx kbar, double beta, double y, double y0) {
    if (!(kbar.real() > 0)) throw Error("spectral", "green_closed needs Re kbar > 0");
    double lo = std::min(y, y0), hi = std::max(y, y0);
    // e^{-kbar hi} (sinh(kbar lo) + kbar/beta cosh(kbar lo)), rewritten without overflow
    cplx e2 = std::exp(-2.0 * kbar * lo);
    cplx body = 0.5 * std::exp(-kbar * (hi - lo)) * ((1.0 - e2) + kbar / beta * (1.0 + e2));
    return body / (kbar * (1.0 + kbar / beta));
}

GreenOperator green_numeric(cplx kbar, double beta, double beta1, const Grid& grid) {
    if (!(kbar.real() > 0)) throw Error("spectral", "green_numeric needs Re kbar > 0");
    const int n = grid.n;
    // Gamma = free-space part e^{-kbar|y-y0|}/(2 kbar) + smooth correction c
    // with L c = 0 and Robin data cancelling the free part's boundary mismatch.
    CMat M = grid.D2.cast<cplx>();
    M.diagonal().array() -= kbar * kbar;
    M.row(0) = grid.D1.row(0).cast<cplx>();
    M(0, 0) -= beta;
    M.row(n - 1) = grid.D1.row(n - 1).cast<cplx>();
    M(n - 1, n - 1) -= beta1;

    CMat rhs = CMat::Zero(n, n);
    const double h = grid.h;
    for (int j = 0; j < n; ++j) {
        double y0 = grid.y[j];
        cplx e0 = std::exp(-kbar * y0);
        cplx eh = std::exp(-kbar * (h - y0));
        rhs(0, j) = -(0.5 * e0 - beta * e0 / (2.0 * kbar));
        rhs(n - 1, j) = -(-0.5 * eh - beta1 * eh / (2.0 * kbar));
    }

    Eigen::PartialPivLU<CMat> lu(M);
    double rc = lu.rcond();
    if (!(rc > 1e-14))
        throw Error("spectral", "singular Green discretization (kbar^2 near a discrete Robin eigenvalue); refine grid");
    CMat C = lu.solve(rhs);

    GreenOperator out;
    out.grid = grid;
    out.rcond = rc;
    out.G.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.G(i, j) = std::exp(-kbar * std::abs(grid.y[i] - grid.y[j])) / (2.0 * kbar) + C(i, j);
    return out;
}

}  // namespace ob
