#include <cmath>

#include "ob/spectral.hpp"

namespace ob {

std::string to_string(Closure c) { return c == Closure::Full ? "full" : "leading"; }

Closure closure_from_string(const std::string& s) {
    if (s == "leading") return Closure::Leading;
    if (s == "full") return Closure::Full;
    throw Error("spectral", "unknown closure '" + s + "' (expected leading|full)");
}

FullClosure::FullClosure(int k, const TemperatureProfile& profile, int n, double l)
    : k_(k), grid_(make_grid(n, profile.params().h, l)) {
    const auto& p = profile.params();
    L_ = grid_.D2;
    L_.diagonal().array() -= double(k) * k;
    L2_ = L_ * L_;
    Uy_ = profile.Uy(grid_.y);
    // Border with the boundary-layer part of U_y only: the polynomial part is
    // large near y = h and would make the bordered system ill-conditioned.
    src_.resize(grid_.n);
    const double amp = p.C_U != 0.0 ? p.C_U * p.r * std::pow(p.b, 4) : 1.0;
    for (int i = 0; i < grid_.n; ++i) {
        double y = grid_.y[i];
        src_[i] = amp * std::exp(-p.b * y) * y * y;
    }
    beta_ = p.beta;
    beta1_ = p.beta1;
    nu_ = p.nu;
}

// Solves the pencil equations at lambda with the eigen-relation for w
// bordered by rho2: (L - lambda) w - U_y psi = src (1 - rho2(psi)).
// A solution with rho2 = 1 exists exactly at eigenvalues.
cplx FullClosure::rho2(cplx lambda) const {
    const int n = grid_.n;
    const double k2 = double(k_) * k_;
    CMat M = CMat::Zero(2 * n, 2 * n);
    CVec rhs = CVec::Zero(2 * n);
    M.topLeftCorner(n, n) = L2_.cast<cplx>() - (lambda / nu_) * L_.cast<cplx>();
    M.topRightCorner(n, n).diagonal().setConstant(k2);
    M.bottomRightCorner(n, n) = L_.cast<cplx>();
    M.bottomRightCorner(n, n).diagonal().array() -= lambda;
    M.bottomLeftCorner(n, n).diagonal() = -Uy_.cast<cplx>();
    Eigen::RowVectorXd r2 = 0.5 * grid_.D2.row(0);
    M.bottomLeftCorner(n, n) += (src_ * r2).cast<cplx>();
    rhs.tail(n) = src_.cast<cplx>();

    auto bc = [&](int row, const Eigen::RowVectorXd& v, int col0) {
        M.row(row).setZero();
        rhs[row] = 0;
        M.block(row, col0, 1, n) = v.cast<cplx>();
    };
    Eigen::RowVectorXd e0 = Eigen::RowVectorXd::Zero(n), eN = e0;
    e0[0] = 1;
    eN[n - 1] = 1;
    bc(0, e0, 0);
    bc(1, grid_.D1.row(0), 0);
    bc(n - 2, grid_.D1.row(n - 1), 0);
    bc(n - 1, eN, 0);
    bc(n, grid_.D1.row(0) - beta_ * e0, n);
    bc(2 * n - 1, grid_.D1.row(n - 1) - beta1_ * eN, n);
    for (int i = 0; i < 2 * n; ++i) {
        double m = M.row(i).cwiseAbs().maxCoeff();
        if (m > 0) {
            M.row(i) /= m;
            rhs[i] /= m;
        }
    }
    CVec v = M.partialPivLu().solve(rhs);
    return (r2.cast<cplx>() * v.head(n))(0);
}

namespace {

void check_domain(cplx z, int k, const ScaleParams& p) {
    double bound = p.h * p.r * p.b / k;
    if (!(z.real() > 0) || std::abs(z) >= bound)
        throw Error("spectral", "z outside the search domain (Re z > 0, |z| < h r b / k)");
}

cplx residual_with(ScalarEigenContext& ctx, int k, const TemperatureProfile& profile,
                   const FullClosure* full) {
    const auto& p = profile.params();
    check_domain(ctx.z, k, p);
    const cplx z = ctx.z;
    ctx.a = k / (p.r * p.b);
    ctx.xi_tilde = (1.0 + p.r) / (1.0 + double(k) * z / (p.r * p.b));
    const double lam_main = p.lambda_main();
    ctx.Hk_tilde = y_leading(k, p, profile.poly().targetQ);
    if (!full) {
        ctx.Hk = 0;
        ctx.Yk = ctx.Hk_tilde;
        return (z + 1.0) * (z + 1.0) - lam_main / (1.0 + ctx.a * z) - ctx.Yk;
    }
    cplx lambda = double(k) * k * (z * z - 1.0);
    cplx rho = full->rho2(lambda);
    cplx zp2 = (z + 1.0) * (z + 1.0);
    ctx.Yk = zp2 * rho - lam_main / (1.0 + ctx.a * z);
    ctx.Hk = ctx.Yk - ctx.Hk_tilde;
    return zp2 * (1.0 - rho);
}

}  // namespace

cplx scalar_residual(ScalarEigenContext& ctx, int k, const TemperatureProfile& profile,
                     const ScalarOptions& opt) {
    if (opt.closure == Closure::Full) {
        FullClosure fc(k, profile, opt.n, opt.l);
        return residual_with(ctx, k, profile, &fc);
    }
    return residual_with(ctx, k, profile, nullptr);
}

RootResult find_root_z(int k, const TemperatureProfile& profile, const ScalarOptions& opt) {
    std::optional<FullClosure> fc;
    if (opt.closure == Closure::Full) fc.emplace(k, profile, opt.n, opt.l);
    const FullClosure* fp = fc ? &*fc : nullptr;
    const auto& p = profile.params();
    const double lam_main = p.lambda_main();

    RootResult rr;
    ScalarEigenContext ctx;
    ctx.z = 1.0;
    cplx f = residual_with(ctx, k, profile, fp);
    double last_step = 1;
    // the bordered solve carries ~1e-7 round-off, so its Newton stops on step size
    const double step_tol = fp ? std::max(opt.step_tol, 1e-8) : opt.step_tol;
    for (int it = 0; it < opt.max_iter; ++it) {
        rr.iterations = it + 1;
        if (std::abs(f) < opt.tol) break;
        cplx df;
        if (!fp) {
            df = 2.0 * (ctx.z + 1.0) + lam_main * ctx.a / ((1.0 + ctx.a * ctx.z) * (1.0 + ctx.a * ctx.z));
        } else {
            const double hs = 1e-5;
            ScalarEigenContext c2 = ctx;
            c2.z = ctx.z + hs;
            df = (residual_with(c2, k, profile, fp) - f) / hs;
        }
        cplx step = -f / df;
        // keep Newton inside the admissible domain
        while (ctx.z.real() + step.real() <= 0) step *= 0.5;
        ctx.z += step;
        last_step = std::abs(step);
        f = residual_with(ctx, k, profile, fp);
        if (last_step < step_tol) break;
    }
    rr.z = ctx.z;
    rr.lambda = double(k) * k * (ctx.z * ctx.z - 1.0);
    rr.residual = std::abs(f);
    rr.converged = std::abs(f) < opt.tol || last_step < step_tol;
    if (!rr.converged)
        throw Error("spectral", "scalar root search did not converge for k = " + std::to_string(k));
    return rr;
}

}  // namespace ob
