#include <cmath>
#include <random>

#include "ob/spectral.hpp"

namespace ob {

namespace {

double state_norm(const Vec& v, const Grid& g) {
    const int n = g.n;
    Vec a = v.head(n).cwiseAbs2(), b = v.tail(n).cwiseAbs2();
    return std::sqrt(g.integrate(a) + g.integrate(b));
}

// BDF2 propagator for B v' = A v on the assembled (row-equilibrated) pencil.
// The constraint rows of B are zero, so each step enforces the boundary
// conditions exactly.
class Propagator {
public:
    Propagator(const Pencil& pc, double dt) : pc_(pc), dt_(dt) {
        be_.compute(pc.B - dt * pc.A);
        bdf2_.compute(3.0 * pc.B - 2.0 * dt * pc.A);
    }
    // Advances nsteps, calling obs(step, ||v||-log increment) after each.
    template <class Obs>
    void run(Vec v, int nsteps, const Grid& g, Obs&& obs) {
        double n0 = state_norm(v, g);
        double lognorm = std::log(n0);
        v /= n0;
        Vec prev = v;
        Vec cur = be_.solve(pc_.B * v);
        double s = state_norm(cur, g);
        lognorm += std::log(s);
        prev /= s;
        cur /= s;
        obs(1, lognorm);
        for (int step = 2; step <= nsteps; ++step) {
            Vec next = bdf2_.solve(pc_.B * (4.0 * cur - prev));
            double sn = state_norm(next, g);
            lognorm += std::log(sn);
            prev = cur / sn;
            cur = next / sn;
            obs(step, lognorm);
        }
    }

private:
    const Pencil& pc_;
    double dt_;
    Eigen::PartialPivLU<Mat> be_, bdf2_;
};

Vec project_off(Vec v, const std::vector<std::pair<EigenMode, ConjugateMode>>& kernel, const Grid& g,
                double nu) {
    const int n = g.n;
    for (const auto& [e, c] : kernel) {
        EigenMode probe;
        probe.k = e.k;
        probe.psi = v.head(n).cast<cplx>();
        probe.w = v.tail(n).cast<cplx>();
        cplx coef = pairing(probe, c, g, nu) / pairing(e, c, g, nu);
        v.head(n) -= (coef * e.psi).real();
        v.tail(n) -= (coef * e.w).real();
    }
    return v;
}

}  // namespace

DecayFit semigroup_decay(int k, const TemperatureProfile& profile, const Grid& grid, double horizon,
                         const SemigroupOptions& opt, const CVec* v0, unsigned seed) {
    const int n = grid.n;
    Pencil pc = assemble_pencil(k, profile, grid);
    Vec v(2 * n);
    if (v0) {
        v = v0->real();
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        // smooth random data: a few low modes in y, vanishing at the walls
        v.setZero();
        for (int m = 1; m <= 6; ++m) {
            double a = nd(rng), c = nd(rng);
            for (int i = 0; i < n; ++i) {
                double t = grid.y[i] / grid.h;
                double bump = std::sin(m * M_PI * t);
                v[i] += a * bump * bump;
                v[n + i] += c * bump;
            }
        }
    }
    v = project_off(v, opt.kernel, grid, profile.params().nu);

    const int nsteps = static_cast<int>(std::ceil(horizon / opt.dt));
    DecayFit fit;
    fit.t.reserve(nsteps);
    fit.log_norm.reserve(nsteps);
    Propagator prop(pc, opt.dt);
    prop.run(v, nsteps, grid, [&](int step, double ln) {
        fit.t.push_back(step * opt.dt);
        fit.log_norm.push_back(ln);
    });

    // least-squares line on the tail
    const size_t start = static_cast<size_t>((1.0 - opt.tail_fraction) * fit.t.size());
    const size_t m = fit.t.size() - start;
    if (m < 10) throw Error("spectral", "semigroup horizon too short for a tail fit");
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (size_t i = start; i < fit.t.size(); ++i) {
        st += fit.t[i];
        sl += fit.log_norm[i];
        stt += fit.t[i] * fit.t[i];
        stl += fit.t[i] * fit.log_norm[i];
    }
    double slope = (m * stl - st * sl) / (m * stt - st * st);
    double icpt = (sl - slope * st) / m;
    double res = 0;
    for (size_t i = start; i < fit.t.size(); ++i) {
        double e = fit.log_norm[i] - (icpt + slope * fit.t[i]);
        res = std::max(res, std::abs(e));
    }
    fit.rate = -slope;
    fit.fit_residual = res;
    if (res > opt.fit_tol)
        throw Error("spectral", "semigroup tail is not exponential (fit residual " + std::to_string(res) +
                                    "); lengthen the horizon");
    return fit;
}

std::vector<double> propagate_norms(int k, const TemperatureProfile& profile, const Grid& grid,
                                    const CVec& v0, double horizon, double dt) {
    Pencil pc = assemble_pencil(k, profile, grid);
    const int nsteps = static_cast<int>(std::ceil(horizon / dt));
    Vec v = v0.real();
    double base = std::log(state_norm(v, grid));
    std::vector<double> out{1.0};
    Propagator prop(pc, dt);
    prop.run(v, nsteps, grid, [&](int, double ln) { out.push_back(std::exp(ln - base)); });
    return out;
}

}  // namespace ob
