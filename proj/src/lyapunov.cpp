#include <algorithm>
#include <cmath>
#include <random>

#include "ob/realize.hpp"

namespace ob {

// Benettin's method: the state and m tangent vectors advance together with
// fixed-step ETDRK4 and are re-orthonormalized by QR every `renorm` units.
LyapunovReport lyapunov(const QuadField& field, const Vec& stiff_diag, const Vec& x0, const LyapunovOptions& opt) {
    const int n = field.n;
    if (x0.size() != n || stiff_diag.size() != n) throw Error("realize", "lyapunov: dimension mismatch");
    if (!(opt.dt > 0) || !(opt.renorm >= opt.dt) || !(opt.horizon > 0))
        throw Error("realize", "lyapunov: need dt > 0, renorm >= dt and a positive horizon");
    const int m = opt.count > 0 ? std::min(opt.count, n) : n;

    OdeSystem base;
    base.dim = n;
    base.L = stiff_diag;
    base.rhs = [&field](const Vec& x, Vec& out) { out = field.eval(x); };

    Vec x = x0;
    {
        Etdrk4 e(stiff_diag, opt.dt);
        const long nt = static_cast<long>(std::ceil(opt.transient / opt.dt));
        for (long s = 0; s < nt; ++s) e.step(base, x);
        if (!x.allFinite()) throw Error("realize", "lyapunov: transient diverged");
    }

    OdeSystem aug;
    aug.dim = n * (1 + m);
    aug.L.resize(aug.dim);
    for (int c = 0; c <= m; ++c) aug.L.segment(c * n, n) = stiff_diag;
    aug.rhs = [&field, n, m](const Vec& z, Vec& out) {
        const Vec x = z.head(n);
        out.resize(z.size());
        out.head(n) = field.eval(x);
        const Mat J = field.jacobian(x);
        for (int c = 1; c <= m; ++c) out.segment(c * n, n) = J * z.segment(c * n, n);
    };

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    Mat V(n, m);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c) V(i, c) = nd(rng);
    {
        Eigen::HouseholderQR<Mat> qr(V);
        V = qr.householderQ() * Mat::Identity(n, m);
    }

    Vec z(aug.dim);
    z.head(n) = x;
    for (int c = 0; c < m; ++c) z.segment((c + 1) * n, n) = V.col(c);

    Etdrk4 e(aug.L, opt.dt);
    const long per = std::max(1L, std::lround(opt.renorm / opt.dt));
    const long blocks = std::max(1L, static_cast<long>(std::ceil(opt.horizon / (per * opt.dt))));
    Vec sums = Vec::Zero(m);
    double div = 0;
    long nstep = 0;
    LyapunovReport rep;
    for (long b = 0; b < blocks; ++b) {
        for (long s = 0; s < per; ++s) {
            div += field.jacobian(z.head(n)).trace();
            ++nstep;
            e.step(aug, z);
        }
        if (!z.allFinite()) throw Error("realize", "lyapunov: tangent integration diverged");
        for (int c = 0; c < m; ++c) V.col(c) = z.segment((c + 1) * n, n);
        Eigen::HouseholderQR<Mat> qr(V);
        Mat R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        Mat Q = qr.householderQ() * Mat::Identity(n, m);
        for (int c = 0; c < m; ++c) {
            const double r = R(c, c);
            if (r < 0) Q.col(c) = -Q.col(c);
            sums[c] += std::log(std::abs(r));
            z.segment((c + 1) * n, n) = Q.col(c);
        }
        const double t = (b + 1) * per * opt.dt;
        if (opt.trace_every > 0 && (b + 1) % opt.trace_every == 0) rep.trace.emplace_back(t, sums[0] / t);
    }
    const double T = blocks * per * opt.dt;
    rep.horizon = T;
    rep.renorm = per * opt.dt;
    rep.mean_divergence = div / static_cast<double>(nstep);
    for (int c = 0; c < m; ++c) rep.exponents.push_back(sums[c] / T);
    std::sort(rep.exponents.begin(), rep.exponents.end(), std::greater<>());
    return rep;
}

LyapunovReport lyapunov(const QuadField& field, const Vec& x0, const LyapunovOptions& opt) {
    return lyapunov(field, Vec::Zero(field.n), x0, opt);
}

}  // namespace ob
