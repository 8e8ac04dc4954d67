#include <algorithm>
#include <cmath>

#include "ob/realize.hpp"

namespace ob {

OdeSystem make_ode(const QuadField& f) {
    OdeSystem s;
    s.dim = f.n;
    s.rhs = [&f](const Vec& x, Vec& out) { out = f.eval(x); };
    s.L = Vec::Zero(f.n);
    return s;
}

OdeSystem make_ode(const QuadraticSystem& q) {
    OdeSystem s;
    s.dim = q.N;
    s.rhs = [&q](const Vec& x, Vec& out) { out = q.field.eval(x); };
    s.L = q.stiff_diagonal();
    return s;
}

OdeSystem make_ode(const TargetField& t) {
    OdeSystem s;
    s.dim = t.p;
    s.rhs = [&t](const Vec& x, Vec& out) { out = t.eval(x); };
    s.L = Vec::Zero(t.p);
    return s;
}

Etdrk4::Etdrk4(const Vec& L, double h) : h_(h), L_(L) {
    const int n = static_cast<int>(L.size());
    constexpr int M = 32;
    E_.resize(n);
    E2_.resize(n);
    Q_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    f3_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double z = h * L[i];
        E_[i] = std::exp(z);
        E2_[i] = std::exp(z / 2);
        double q = 0, a = 0, b = 0, c = 0;
        for (int j = 0; j < M; ++j) {
            const cplx r = std::polar(1.0, M_PI * (j + 0.5) / M);
            const cplx lr = z + r;
            const cplx e = std::exp(lr);
            const cplx l3 = lr * lr * lr;
            q += ((std::exp(lr / 2.0) - 1.0) / lr).real();
            a += ((-4.0 - lr + e * (4.0 - 3.0 * lr + lr * lr)) / l3).real();
            b += ((2.0 + lr + e * (-2.0 + lr)) / l3).real();
            c += ((-4.0 - 3.0 * lr - lr * lr + e * (4.0 - lr)) / l3).real();
        }
        Q_[i] = h * q / M;
        f1_[i] = h * a / M;
        f2_[i] = h * b / M;
        f3_[i] = h * c / M;
    }
}

void Etdrk4::step(const OdeSystem& sys, Vec& x) const {
    Vec F(sys.dim);
    auto nl = [&](const Vec& v) {
        sys.rhs(v, F);
        return Vec(F - L_.cwiseProduct(v));
    };
    const Vec Nu = nl(x);
    const Vec a = E2_.cwiseProduct(x) + Q_.cwiseProduct(Nu);
    const Vec Na = nl(a);
    const Vec b = E2_.cwiseProduct(x) + Q_.cwiseProduct(Na);
    const Vec Nb = nl(b);
    const Vec c = E2_.cwiseProduct(a) + Q_.cwiseProduct(2 * Nb - Nu);
    const Vec Nc = nl(c);
    x = E_.cwiseProduct(x) + f1_.cwiseProduct(Nu) + 2 * f2_.cwiseProduct(Na + Nb) + f3_.cwiseProduct(Nc);
}

namespace {

double err_norm(const Vec& e, const Vec& x0, const Vec& x1, double tol) {
    double m = 0;
    for (int i = 0; i < e.size(); ++i) {
        const double sc = tol * (1 + std::max(std::abs(x0[i]), std::abs(x1[i])));
        m = std::max(m, std::abs(e[i]) / sc);
    }
    return m;
}

void check_state(const Vec& x, double t, const IntegrateOptions& opt) {
    if (!x.allFinite()) throw Error("realize", "trajectory became non-finite at t=" + std::to_string(t));
    if (opt.blowup > 0 && x.norm() > opt.blowup)
        throw Error("realize", "trajectory left the admissible region at t=" + std::to_string(t));
}

// Stores samples at t0 + k dt_out; steps are clipped to land on them.
struct Sampler {
    Trajectory& tr;
    double t0, t1, dt;
    long next = 1;
    double target() const { return std::min(t1, t0 + next * dt); }
    void push(double t, const Vec& x) {
        tr.t.push_back(t);
        tr.x.push_back(x);
        ++next;
    }
};

Trajectory run_dopri(const OdeSystem& sys, const Vec& x0, double t0, double t1, const IntegrateOptions& opt) {
    static const double a21 = 1. / 5;
    static const double a31 = 3. / 40, a32 = 9. / 40;
    static const double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    static const double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
    static const double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                        a65 = -5103. / 18656;
    static const double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84;
    static const double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                        e6 = 22. / 525, e7 = -1. / 40;

    Trajectory tr;
    tr.method = "dopri5";
    tr.tol = opt.tol;
    Sampler smp{tr, t0, t1, opt.dt_out};
    tr.t.push_back(t0);
    tr.x.push_back(x0);
    const int n = sys.dim;
    Vec x = x0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xn(n);
    sys.rhs(x, k1);
    double t = t0, h = std::min(opt.h0, opt.hmax);
    while (t < t1) {
        if (tr.steps + tr.rejected > opt.max_steps) throw Error("realize", "step budget exhausted");
        const double tt = smp.target();
        bool land = false;
        double hs = h;
        if (t + hs >= tt) {
            hs = tt - t;
            land = true;
        }
        sys.rhs(x + hs * a21 * k1, k2);
        sys.rhs(x + hs * (a31 * k1 + a32 * k2), k3);
        sys.rhs(x + hs * (a41 * k1 + a42 * k2 + a43 * k3), k4);
        sys.rhs(x + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
        sys.rhs(x + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
        xn = x + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        sys.rhs(xn, k7);
        Vec e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = err_norm(e, x, xn, opt.tol);
        if (!std::isfinite(err)) err = 1e10;
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 5.0);
        if (err <= 1) {
            t = land ? tt : t + hs;
            x = xn;
            k1 = k7;
            ++tr.steps;
            check_state(x, t, opt);
            if (land) smp.push(t, x);
            if (!land || hs >= h) h = std::min(opt.hmax, hs * fac);
        } else {
            ++tr.rejected;
            h = hs * std::max(0.2, fac);
            if (h < opt.hmin) throw Error("realize", "step size underflow at t=" + std::to_string(t));
        }
    }
    return tr;
}

// ETDRK4 with step doubling for the error estimate.
Trajectory run_etd(const OdeSystem& sys, const Vec& x0, double t0, double t1, const IntegrateOptions& opt) {
    Trajectory tr;
    tr.method = "etdrk4";
    tr.tol = opt.tol;
    Sampler smp{tr, t0, t1, opt.dt_out};
    tr.t.push_back(t0);
    tr.x.push_back(x0);
    Vec x = x0;
    double t = t0, h = std::min(opt.h0, opt.hmax);
    double cached = -1;
    std::optional<Etdrk4> full, half;
    while (t < t1) {
        if (tr.steps + tr.rejected > opt.max_steps) throw Error("realize", "step budget exhausted");
        const double tt = smp.target();
        bool land = false;
        double hs = h;
        if (t + hs >= tt) {
            hs = tt - t;
            land = true;
        }
        if (hs != cached) {
            full.emplace(sys.L, hs);
            half.emplace(sys.L, hs / 2);
            cached = hs;
        }
        Vec big = x;
        full->step(sys, big);
        Vec small = x;
        half->step(sys, small);
        half->step(sys, small);
        double err = err_norm(small - big, x, small, opt.tol) / 15;
        if (!std::isfinite(err)) err = 1e10;
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 4.0);
        if (err <= 1) {
            t = land ? tt : t + hs;
            x = small;
            ++tr.steps;
            check_state(x, t, opt);
            if (land) smp.push(t, x);
            if (!land || hs >= h) h = std::min(opt.hmax, hs * fac);
        } else {
            ++tr.rejected;
            h = hs * std::max(0.2, fac);
            if (h < opt.hmin) throw Error("realize", "step size underflow at t=" + std::to_string(t));
        }
    }
    return tr;
}

}  // namespace

Trajectory integrate(const OdeSystem& sys, const Vec& x0, double t0, double t1, const IntegrateOptions& opt) {
    if (x0.size() != sys.dim) throw Error("realize", "initial state has the wrong dimension");
    if (!(t1 > t0)) throw Error("realize", "integration interval is empty");
    if (!(opt.dt_out > 0) || !(opt.tol > 0)) throw Error("realize", "dt_out and tol must be positive");
    Integrator m = opt.method;
    if (m == Integrator::Auto) {
        const double rate = sys.L.size() ? sys.L.cwiseAbs().maxCoeff() : 0.0;
        m = rate * opt.stiff_threshold >= 1 - 1e-12 ? Integrator::ETDRK4 : Integrator::DormandPrince;
    }
    return m == Integrator::ETDRK4 ? run_etd(sys, x0, t0, t1, opt) : run_dopri(sys, x0, t0, t1, opt);
}

Trajectory integrate(const QuadraticSystem& sys, const Vec& x0, double t0, double t1, const IntegrateOptions& opt) {
    OdeSystem o = make_ode(sys);
    return integrate(o, x0, t0, t1, opt);
}

}  // namespace ob
