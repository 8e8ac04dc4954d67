#include <cmath>

#include "ob/spectral.hpp"

namespace ob {

namespace {

// Adjoint pencil in the scaled unknowns (phi_m, wtilde), phi_m = nu/k^2 phi:
//   lambda nu^-1 L phi_m = L^2 phi_m - U_y wtilde
//   lambda wtilde        = L wtilde + k^2 phi_m
Pencil assemble_adjoint(int k, const TemperatureProfile& profile, const Grid& grid) {
    const auto& p = profile.params();
    const int n = grid.n;
    const double k2 = double(k) * k;
    Mat L = grid.D2;
    L.diagonal().array() -= k2;
    Vec Uy = profile.Uy(grid.y);

    Pencil pc;
    pc.k = k;
    pc.A = Mat::Zero(2 * n, 2 * n);
    pc.B = Mat::Zero(2 * n, 2 * n);
    pc.A.topLeftCorner(n, n) = L * L;
    pc.A.topRightCorner(n, n).diagonal() = -Uy;
    pc.B.topLeftCorner(n, n) = L / p.nu;
    pc.A.bottomRightCorner(n, n) = L;
    pc.A.bottomLeftCorner(n, n).diagonal().setConstant(k2);
    pc.B.bottomRightCorner(n, n).diagonal().setOnes();

    auto bc = [&](int row, const Eigen::RowVectorXd& v, int col0) {
        pc.A.row(row).setZero();
        pc.B.row(row).setZero();
        pc.A.block(row, col0, 1, n) = v;
    };
    Eigen::RowVectorXd e0 = Eigen::RowVectorXd::Zero(n), eN = e0;
    e0[0] = 1;
    eN[n - 1] = 1;
    bc(0, e0, 0);
    bc(1, grid.D1.row(0), 0);
    bc(n - 2, grid.D1.row(n - 1), 0);
    bc(n - 1, eN, 0);
    bc(n, grid.D1.row(0) - p.beta * e0, n);
    bc(2 * n - 1, grid.D1.row(n - 1) - p.beta1 * eN, n);
    for (int i = 0; i < 2 * n; ++i) {
        double m = std::max(pc.A.row(i).cwiseAbs().maxCoeff(), pc.B.row(i).cwiseAbs().maxCoeff());
        if (m > 0) {
            pc.A.row(i) /= m;
            pc.B.row(i) /= m;
        }
    }
    return pc;
}

}  // namespace

CVec conjugate_eigenvalues(int k, const TemperatureProfile& profile, const Grid& grid, double shift) {
    return pencil_eigenvalues(assemble_adjoint(k, profile, grid), shift);
}

ConjugateMode solve_conjugate_modes(int k, const TemperatureProfile& profile, const Grid& grid,
                                    cplx target, double shift) {
    Pencil pc = assemble_adjoint(k, profile, grid);
    CVec lam = pencil_eigenvalues(pc, shift);
    if (lam.size() == 0) throw Error("spectral", "adjoint pencil has no finite eigenvalues");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < lam.size(); ++i)
        if (std::abs(lam[i] - target) < std::abs(lam[best] - target)) best = i;
    CVec v;
    cplx l = refine_eigenvalue(pc, lam[best], &v);

    const int n = grid.n;
    ConjugateMode c;
    c.k = k;
    c.lambda = l;
    c.phi_scaled = v.head(n);
    c.wtilde = v.tail(n);
    // scale so wtilde'(0) = 1
    cplx d0 = (grid.D1.row(0).cast<cplx>() * c.wtilde)(0);
    if (std::abs(d0) > 0) {
        c.phi_scaled /= d0;
        c.wtilde /= d0;
    }
    c.phi = c.phi_scaled * (double(k) * k / profile.params().nu);
    return c;
}

cplx pairing(const EigenMode& e, const ConjugateMode& c, const Grid& grid, double nu) {
    if (e.k != c.k) return 0.0;
    const double k2 = double(e.k) * e.k;
    CVec Lphi = grid.D2.cast<cplx>() * c.phi_scaled - k2 * c.phi_scaled;
    CVec a = e.psi.cwiseProduct(Lphi);
    CVec b = e.w.cwiseProduct(c.wtilde);
    return grid.integrate(a) / nu + grid.integrate(b);
}

ModeBasis biorthogonalize(std::vector<EigenMode> modes, std::vector<ConjugateMode> conjugates,
                          const Grid& grid, double nu, double singular_tol) {
    const int N = static_cast<int>(modes.size());
    if (static_cast<int>(conjugates.size()) != N)
        throw Error("spectral", "mode and conjugate counts differ");
    CMat G(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) G(i, j) = pairing(modes[j], conjugates[i], grid, nu);

    Eigen::JacobiSVD<CMat> svd(G);
    const auto& sv = svd.singularValues();
    if (N == 0 || sv[N - 1] <= singular_tol * sv[0])
        throw Error("spectral", "singular Gram matrix: kernel block is defective or modes are duplicated");

    CMat C = G.inverse();
    std::vector<ConjugateMode> out(N);
    for (int i = 0; i < N; ++i) {
        out[i] = conjugates[i];
        out[i].phi_scaled.setZero();
        out[i].wtilde.setZero();
        for (int m = 0; m < N; ++m) {
            if (std::abs(C(i, m)) == 0.0) continue;
            if (conjugates[m].k != conjugates[i].k) continue;  // zero block by x-orthogonality
            out[i].phi_scaled += C(i, m) * conjugates[m].phi_scaled;
            out[i].wtilde += C(i, m) * conjugates[m].wtilde;
        }
        out[i].phi = out[i].phi_scaled * (double(out[i].k) * out[i].k / nu);
    }

    ModeBasis basis;
    basis.raw_gram = G;
    basis.grid = grid;
    basis.nu = nu;
    basis.gram.resize(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) basis.gram(i, j) = pairing(modes[j], out[i], grid, nu);
    basis.modes = std::move(modes);
    basis.conjugates = std::move(out);
    return basis;
}

}  // namespace ob
