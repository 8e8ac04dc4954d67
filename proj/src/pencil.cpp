#include <algorithm>
#include <cmath>

#include "ob/spectral.hpp"

namespace ob {

Pencil assemble_pencil(int k, const TemperatureProfile& profile, const Grid& grid) {
    if (k < 1) throw Error("spectral", "wavenumber must be >= 1");
    const auto& p = profile.params();
    const int n = grid.n;
    const double k2 = double(k) * k;
    Mat L = grid.D2;
    L.diagonal().array() -= k2;
    Mat L2 = L * L;
    Vec Uy = profile.Uy(grid.y);

    Pencil pc;
    pc.k = k;
    pc.A = Mat::Zero(2 * n, 2 * n);
    pc.B = Mat::Zero(2 * n, 2 * n);
    // lambda nu^-1 L psi = L^2 psi + k^2 w
    pc.A.topLeftCorner(n, n) = L2;
    pc.A.topRightCorner(n, n).diagonal().setConstant(k2);
    pc.B.topLeftCorner(n, n) = L / p.nu;
    // lambda w = L w - U_y psi
    pc.A.bottomRightCorner(n, n) = L;
    pc.A.bottomLeftCorner(n, n).diagonal() = -Uy;
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

    // Row equilibration does not change the pencil's eigenpairs and keeps
    // the fourth-order rows comparable to the boundary rows.
    for (int i = 0; i < 2 * n; ++i) {
        double m = std::max(pc.A.row(i).cwiseAbs().maxCoeff(), pc.B.row(i).cwiseAbs().maxCoeff());
        if (m > 0) {
            pc.A.row(i) /= m;
            pc.B.row(i) /= m;
        }
    }
    return pc;
}

CVec pencil_eigenvalues(const Pencil& pencil, double shift) {
    Mat S = pencil.A - shift * pencil.B;
    Eigen::PartialPivLU<Mat> lu(S);
    Mat C = lu.solve(pencil.B);
    Eigen::EigenSolver<Mat> es(C, false);
    CVec th = es.eigenvalues();
    double tmax = th.cwiseAbs().maxCoeff();
    std::vector<cplx> lam;
    for (Eigen::Index i = 0; i < th.size(); ++i)
        if (std::abs(th[i]) > 1e-13 * tmax) lam.push_back(shift + 1.0 / th[i]);
    std::sort(lam.begin(), lam.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    CVec out(lam.size());
    for (size_t i = 0; i < lam.size(); ++i) out[i] = lam[i];
    return out;
}

cplx refine_eigenvalue(const Pencil& pencil, cplx guess, CVec* vec, int iters) {
    const Eigen::Index m = pencil.A.rows();
    // Offset the shift a little so an exact eigenvalue does not make the
    // factorization singular.
    cplx sigma = guess + cplx(1e-9 * std::max(1.0, std::abs(guess)), 1e-9);
    CMat S = pencil.A.cast<cplx>() - sigma * pencil.B.cast<cplx>();
    Eigen::PartialPivLU<CMat> lu(S);
    CMat Bc = pencil.B.cast<cplx>();
    CVec x = CVec::Ones(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] += 0.1 * std::sin(1.0 + i);
    x.normalize();
    cplx lam = guess;
    for (int it = 0; it < iters; ++it) {
        CVec y = lu.solve(Bc * x);
        cplx theta = x.dot(y);  // x^H y
        if (std::abs(theta) == 0.0) break;
        lam = sigma + 1.0 / theta;
        x = y / y.norm();
    }
    if (vec) *vec = x;
    return lam;
}

BoundaryResidual boundary_residual(const EigenMode& m, const Grid& grid, double beta, double beta1) {
    const int n = grid.n;
    BoundaryResidual r;
    double pm = m.psi.cwiseAbs().maxCoeff();
    double wm = m.w.cwiseAbs().maxCoeff();
    cplx dp0 = grid.D1.row(0).cast<cplx>() * m.psi;
    cplx dph = grid.D1.row(n - 1).cast<cplx>() * m.psi;
    r.psi = std::max({std::abs(m.psi[0]), std::abs(m.psi[n - 1]), std::abs(dp0), std::abs(dph)}) / pm;
    cplx dw0 = grid.D1.row(0).cast<cplx>() * m.w;
    cplx dwh = grid.D1.row(n - 1).cast<cplx>() * m.w;
    r.w = std::max(std::abs(dw0 - beta * m.w[0]), std::abs(dwh - beta1 * m.w[n - 1])) / wm;
    return r;
}

namespace {

EigenMode make_mode(int k, cplx lam, const CVec& v, const Grid& grid) {
    const int n = grid.n;
    EigenMode m;
    m.k = k;
    m.lambda = lam;
    m.psi = v.head(n);
    m.w = v.tail(n);
    cplx r2 = 0.5 * (grid.D2.row(0).cast<cplx>() * m.psi)(0);
    if (std::abs(r2) > 1e-14 * m.psi.cwiseAbs().maxCoeff()) {
        m.psi /= r2;
        m.w /= r2;
    }
    m.rho2 = 0.5 * (grid.D2.row(0).cast<cplx>() * m.psi)(0);
    return m;
}

}  // namespace

EigenMode leading_mode(int k, const Pencil& pencil, const Grid& grid, double shift) {
    CVec lam = pencil_eigenvalues(pencil, shift);
    if (lam.size() == 0) throw Error("spectral", "pencil has no finite eigenvalues for k = " + std::to_string(k));
    CVec v;
    cplx l = refine_eigenvalue(pencil, lam[0], &v);
    EigenMode m = make_mode(k, l, v, grid);
    m.refined = true;
    return m;
}

std::vector<EigenMode> solve_modes(int k, const Pencil& pencil, const Grid& grid,
                                   const TemperatureProfile& profile, const ModeOptions& opt) {
    CVec lam = pencil_eigenvalues(pencil, opt.shift);
    std::vector<EigenMode> out;
    std::optional<Pencil> fine;
    for (Eigen::Index i = 0; i < lam.size() && static_cast<int>(out.size()) < opt.max_modes; ++i) {
        if (!(lam[i].real() > -opt.halfplane)) break;
        CVec v;
        cplx l = refine_eigenvalue(pencil, lam[i], &v);
        EigenMode m = make_mode(k, l, v, grid);
        if (opt.filter) {
            if (!fine) {
                Grid g2 = make_grid(opt.refine_factor * grid.n, grid.h, grid.l);
                fine = assemble_pencil(k, profile, g2);
            }
            cplx l2 = refine_eigenvalue(*fine, l);
            if (std::abs(l2 - l) > opt.refine_tol * std::max(1.0, std::abs(l))) continue;
            m.refined = true;
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace ob
