#include <algorithm>
#include <cmath>
#include <random>

#include "ob/realize.hpp"

namespace ob {

Vec QuadraticSystem::ktilde1(const Vec& Y) const {
    Vec out = Vec::Zero(N - p);
    for (int s = 0; s < N - p; ++s) {
        double v = 0;
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) v += Ktilde1(p + s, j, l) * Y[j] * Y[l];
        out[s] = v;
    }
    return out;
}

Vec QuadraticSystem::leading_slow_field(const Vec& Y) const {
    Vec out = R * Y + T * ktilde1(Y) + field.f.head(p);
    for (int i = 0; i < p; ++i) {
        double v = 0;
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) v += field.K(i, j, l) * Y[j] * Y[l];
        out[i] += v;
    }
    return out;
}

Vec QuadraticSystem::stiff_diagonal() const {
    Vec d = Vec::Zero(N);
    d.tail(N - p).setConstant(-1.0 / xi);
    return d;
}

QuadraticSystem build_fast_slow(const TargetField& target, const Tensor3& K, const WavenumberSet& ws, double xi,
                                double T_bound) {
    const int p = ws.p, N = ws.N();
    if (target.p != p) throw Error("realize", "target dimension differs from the base size p");
    if (K.n != N) throw Error("realize", "K tensor size does not match the wavenumber set");
    if (!(xi > 0)) throw Error("realize", "xi must be positive");

    QuadraticSystem s;
    s.N = N;
    s.p = p;
    s.xi = xi;
    s.R = target.W.M;
    s.T = Mat::Zero(p, N - p);
    for (int i = 0; i < p; ++i) {
        Mat rhs(p, p);
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) rhs(j, l) = target.W.K(i, j, l) - K(i, j, l);
        DecompositionResult d = verify_decomposition(K, ws, rhs);
        s.T.row(i) = d.chi.transpose();
    }
    if (!(s.T.cwiseAbs().maxCoeff() <= T_bound))
        throw Error("realize", "coupling matrix T exceeds its bound; the resonant coefficients are too small");

    s.field = QuadField(N);
    s.field.K = K;
    s.field.M.topLeftCorner(p, p) = s.R;
    s.field.M.topRightCorner(p, N - p) = s.T / xi;
    s.field.M.bottomRightCorner(N - p, N - p) = -Mat::Identity(N - p, N - p) / xi;
    s.field.f.head(p) = target.W.f;

    s.Ktilde1 = Tensor3(N);
    for (int i = p; i < N; ++i)
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) s.Ktilde1(i, j, l) = K(i, j, l);

    // Ktilde1 is homogeneous quadratic, so its max over the ball sits on the sphere
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    double m = 0;
    for (int q = 0; q < 2000; ++q) {
        Vec Y(p);
        for (int j = 0; j < p; ++j) Y[j] = nd(rng);
        Y *= target.ballRadius / Y.norm();
        m = std::max(m, s.ktilde1(Y).norm());
    }
    s.tubeC2 = 4 * m;
    return s;
}

ManifoldResidual manifold_residual(const Trajectory& traj, const QuadraticSystem& sys, double tail_fraction) {
    ManifoldResidual r;
    if (traj.t.empty()) return r;
    const double t0 = traj.t.front(), t1 = traj.t.back();
    const double from = t1 - tail_fraction * (t1 - t0);
    long cnt = 0;
    for (size_t q = 0; q < traj.t.size(); ++q) {
        if (traj.t[q] < from) continue;
        const Vec& x = traj.x[q];
        const double v = (sys.fast(x) - sys.xi * sys.ktilde1(sys.slow(x))).norm() / sys.xi;
        r.sup = std::max(r.sup, v);
        r.mean += v;
        ++cnt;
    }
    if (cnt) r.mean /= cnt;
    return r;
}

FieldDiscrepancy reduced_field(const Vec& x, const QuadraticSystem& sys, const TargetField& target) {
    const Vec Y = sys.slow(x);
    const Vec w = target.W.eval(Y);
    FieldDiscrepancy d;
    d.leading = (sys.leading_slow_field(Y) - w).norm();
    d.empirical = (sys.field.eval(x).head(sys.p) - w).norm();
    return d;
}

FieldDiscrepancy field_discrepancy(const Trajectory& traj, const QuadraticSystem& sys, const TargetField& target,
                                   double tail_fraction) {
    FieldDiscrepancy out;
    if (traj.t.empty()) return out;
    const double t0 = traj.t.front(), t1 = traj.t.back();
    const double from = t1 - tail_fraction * (t1 - t0);
    for (size_t q = 0; q < traj.t.size(); ++q) {
        if (traj.t[q] < from) continue;
        FieldDiscrepancy d = reduced_field(traj.x[q], sys, target);
        out.leading = std::max(out.leading, d.leading);
        out.empirical = std::max(out.empirical, d.empirical);
    }
    return out;
}

Vec attractor_point(const TargetField& target, double transient, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-0.05, 0.05);
    Vec Y(target.p);
    for (int i = 0; i < target.p; ++i) Y[i] = ud(rng) * target.ballRadius;
    OdeSystem o = make_ode(target);
    IntegrateOptions io;
    io.tol = 1e-10;
    io.dt_out = transient;
    Trajectory tr = integrate(o, Y, 0, transient, io);
    return tr.x.back();
}

namespace {

Vec matched_state(const QuadraticSystem& sys, const Vec& Y0) {
    Vec x(sys.N);
    x.head(sys.p) = Y0;
    x.tail(sys.N - sys.p) = sys.xi * sys.ktilde1(Y0);
    return x;
}

}  // namespace

RealizationReport realize_target(const TargetField& target, const Tensor3& K, const WavenumberSet& ws,
                                 const RealizeOptions& opt) {
    RealizationReport rep;
    rep.p = ws.p;
    rep.N = ws.N();
    rep.xi = opt.xi;
    rep.ballRadius = target.ballRadius;

    QuadraticSystem sys = build_fast_slow(target, K, ws, opt.xi);
    const Vec Y0 = attractor_point(target, 200, opt.seed);

    IntegrateOptions io = opt.integ;
    if (io.blowup <= 0) io.blowup = 10 * target.ballRadius;

    // target and realized trajectories from matched data
    {
        IntegrateOptions it = io;
        it.tol = std::min(io.tol, 1e-10);
        OdeSystem to = make_ode(target);
        rep.target_traj = integrate(to, Y0, 0, opt.horizon, it);
        rep.realized_traj = integrate(sys, matched_state(sys, Y0), 0, opt.horizon, io);
        const size_t n = std::min(rep.target_traj.t.size(), rep.realized_traj.t.size());
        for (size_t q = 0; q < n; ++q)
            rep.supError = std::max(rep.supError, (sys.slow(rep.realized_traj.x[q]) - rep.target_traj.x[q]).norm());
        for (const auto& y : rep.target_traj.x)
            rep.leadingDiscrepancy =
                std::max(rep.leadingDiscrepancy, (sys.leading_slow_field(y) - target.W.eval(y)).norm());
        rep.manifoldResidual = manifold_residual(rep.realized_traj, sys);
    }

    // xi ladder, one trajectory per rung
    rep.ladder.resize(opt.xi_ladder.size());
    parallel_for(static_cast<int>(opt.xi_ladder.size()), opt.threads, [&](int q) {
        const double xi = opt.xi_ladder[q];
        QuadraticSystem s = build_fast_slow(target, K, ws, xi);
        Trajectory tr = integrate(s, matched_state(s, Y0), 0, opt.ladder_horizon, io);
        LadderEntry e;
        e.xi = xi;
        e.manifold = manifold_residual(tr, s);
        e.discrepancy = field_discrepancy(tr, s, target);
        e.c = e.discrepancy.empirical / std::sqrt(xi);
        for (const auto& x : tr.x) e.tube = std::max(e.tube, s.fast(x).norm() / xi);
        rep.ladder[q] = e;
    });

    if (opt.lyap_horizon > 0) {
        LyapunovOptions lo;
        lo.horizon = opt.lyap_horizon;
        lo.dt = opt.lyap_dt;
        lo.transient = 0;
        lo.seed = opt.seed;
        lo.renorm = std::max(1.0, opt.lyap_dt);
        lo.count = ws.p;
        std::vector<LyapunovReport> out(2);
        parallel_for(2, opt.threads, [&](int q) {
            if (q == 0)
                out[0] = lyapunov(target.W, Y0, lo);
            else
                out[1] = lyapunov(sys.field, sys.stiff_diagonal(), matched_state(sys, Y0), lo);
        });
        rep.lyapunovTarget = out[0].exponents;
        rep.lyapunovRealized = out[1].exponents;
    }
    return rep;
}

}  // namespace ob
