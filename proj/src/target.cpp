#include <algorithm>
#include <cmath>
#include <random>

#include "ob/realize.hpp"

namespace ob {

Vec QuadField::eval(const Vec& x) const {
    Vec out = M * x + f;
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < n; ++j) {
            const double xj = x[j];
            if (xj == 0.0) continue;
            double t = 0;
            for (int l = 0; l < n; ++l) t += K(i, j, l) * x[l];
            s += xj * t;
        }
        out[i] += s;
    }
    return out;
}

Mat QuadField::jacobian(const Vec& x) const {
    Mat J = M;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int l = 0; l < n; ++l) s += (K(i, j, l) + K(i, l, j)) * x[l];
            J(i, j) += s;
        }
    return J;
}

QuadField lorenz_field(double sigma, double rho, double beta) {
    QuadField q(3);
    q.M << -sigma, sigma, 0, rho, -1, 0, 0, 0, -beta;
    q.K(1, 0, 2) = q.K(1, 2, 0) = -0.5;  // -x z
    q.K(2, 0, 1) = q.K(2, 1, 0) = 0.5;   // x y
    return q;
}

QuadField contraction_field(int p, double rate) {
    QuadField q(p);
    q.M = -rate * Mat::Identity(p, p);
    return q;
}

namespace {

double smoothstep(double s) {
    if (s <= 0) return 0;
    if (s >= 1) return 1;
    return s * s * s * (10 - 15 * s + 6 * s * s);
}

Vec random_direction(int p, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vec v(p);
    do {
        for (int i = 0; i < p; ++i) v[i] = nd(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

Vec rk4_step(const QuadField& F, const Vec& x, double h) {
    Vec k1 = F.eval(x);
    Vec k2 = F.eval(x + 0.5 * h * k1);
    Vec k3 = F.eval(x + 0.5 * h * k2);
    Vec k4 = F.eval(x + h * k3);
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

Vec TargetField::eval(const Vec& Y) const {
    Vec w = W.eval(Y);
    if (!cutoff.active) return w;
    const double r = Y.norm();
    const double chi = smoothstep((r - cutoff.r0) / (cutoff.r1 - cutoff.r0));
    if (chi == 0.0) return w;
    return (1 - chi) * w - chi * cutoff.kappa * Y;
}

InwardCheck check_target(const TargetField& t, int boundary_samples, int interior_samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0, 1);
    InwardCheck c;
    c.max_dot = -std::numeric_limits<double>::infinity();
    const double R = t.ballRadius;
    for (int s = 0; s < boundary_samples; ++s) {
        Vec Y = R * random_direction(t.p, rng);
        c.max_dot = std::max(c.max_dot, t.eval(Y).dot(Y) / (R * R));
        c.sup_gradient = std::max(c.sup_gradient, t.W.jacobian(Y).operatorNorm());
    }
    for (int s = 0; s < interior_samples; ++s) {
        Vec Y = R * std::pow(ud(rng), 1.0 / t.p) * random_direction(t.p, rng);
        c.sup_gradient = std::max(c.sup_gradient, t.W.jacobian(Y).operatorNorm());
    }
    c.samples = boundary_samples;
    return c;
}

TargetField rescale_into_ball(const QuadField& raw, const Vec& x0, const RescaleOptions& opt) {
    const int p = raw.n;
    if (x0.size() != p) throw Error("realize", "initial point dimension does not match the raw field");
    TargetField id;
    id.p = p;
    id.W = raw;
    id.ballRadius = opt.ballRadius;
    id.center = Vec::Zero(p);
    InwardCheck c0 = check_target(id, opt.boundary_samples, opt.interior_samples, opt.seed);
    if (c0.inward() && c0.sup_gradient < 1) return id;

    // empirical attractor
    const double escape = 1e6;
    Vec x = x0;
    const long ntr = static_cast<long>(std::ceil(opt.transient / opt.dt));
    const long nsa = static_cast<long>(std::ceil(opt.horizon / opt.dt));
    for (long s = 0; s < ntr; ++s) {
        x = rk4_step(raw, x, opt.dt);
        if (!(x.norm() < escape)) throw Error("realize", "raw field escapes during the bounding run");
    }
    std::vector<Vec> pts;
    pts.reserve(nsa);
    Vec mean = Vec::Zero(p);
    for (long s = 0; s < nsa; ++s) {
        x = rk4_step(raw, x, opt.dt);
        if (!(x.norm() < escape)) throw Error("realize", "raw field escapes during the bounding run");
        pts.push_back(x);
        mean += x;
    }
    mean /= static_cast<double>(nsa);
    double rmax = 0;
    for (const auto& q : pts) rmax = std::max(rmax, (q - mean).norm());
    if (!(rmax > 0)) throw Error("realize", "empirical attractor is a point; nothing to rescale");

    TargetField t;
    t.p = p;
    t.identity = false;
    t.ballRadius = opt.ballRadius;
    t.center = mean;
    t.scale = rmax / (0.5 * opt.ballRadius);
    // F(c + S Y) = S^2 K(Y,Y) + S J_F(c) Y + F(c); then multiply by tau / S
    QuadField unit(p);
    const double S = t.scale;
    for (size_t q = 0; q < raw.K.a.size(); ++q) unit.K.a[q] = S * raw.K.a[q];
    unit.M = raw.jacobian(mean);
    unit.f = raw.eval(mean) / S;
    t.W = unit;
    InwardCheck cg = check_target(t, opt.boundary_samples, opt.interior_samples, opt.seed);
    t.tau = opt.gradient_target / cg.sup_gradient;
    for (double& v : t.W.K.a) v *= t.tau;
    t.W.M *= t.tau;
    t.W.f *= t.tau;

    InwardCheck c1 = check_target(t, opt.boundary_samples, 0, opt.seed);
    if (!c1.inward()) {
        t.cutoff.active = true;
        t.cutoff.r0 = 0.9 * opt.ballRadius;
        t.cutoff.r1 = opt.ballRadius;
        t.cutoff.kappa = opt.gradient_target;
    }
    return t;
}

}  // namespace ob
