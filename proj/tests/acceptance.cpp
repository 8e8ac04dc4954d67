// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code
// is nonzero when any selected criterion fails. `--only N` runs one of them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>

#include "ob/realize.hpp"

using namespace ob;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string f(const char* fmt, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, a);
    return buf;
}

int threads() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

TemperatureProfile designed(double b, const std::vector<double>& d = {0, 0}) {
    auto p = derive_scales(b, 0.98, 0.05);
    return make_profile(p, designed_polynomial({1, 7}, d, p));
}

Mat random_T(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> N;
    Mat T(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) T(i, j) = N(rng);
    return T;
}

// 1. Sidon construction
Outcome c1() {
    bool ok = true;
    for (int p = 1; p <= 12; ++p) {
        auto b = sidon_set(p);
        std::set<int> sums;
        for (size_t a = 0; a < b.size(); ++a) {
            if (b[a] % 5 == 0) ok = false;
            for (size_t c = a; c < b.size(); ++c) ok &= sums.insert(b[a] + b[c]).second;
        }
    }
    return {ok, "p = 1..12 exhaustive"};
}

// 2. Green function
Outcome c2() {
    auto p = derive_scales(30, 0.98, 0.05);
    Grid g = make_grid(400, p.h, 1.0);
    double worst = 0;
    for (double k : {1.0, 5.0, 20.0}) {
        GreenOperator G = green_numeric(cplx(k, 0), p.beta, 0.0, g);
        double err = 0, gmax = 0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) {
                if (std::exp(-k * (2 * p.h - g.y[i] - g.y[j])) >= 1e-8) continue;
                const cplx gc = green_closed(cplx(k, 0), p.beta, g.y[i], g.y[j]);
                gmax = std::max(gmax, std::abs(gc));
                err = std::max(err, std::abs(G.G(i, j) - gc));
            }
        worst = std::max(worst, err / gmax);
    }
    return {worst < 1e-6, f("max relative deviation %.3e (limit 1e-6)", worst)};
}

double cross_method(double b, Closure cl, const std::vector<int>& ks, std::string* log) {
    auto prof = designed(b);
    Grid g = make_grid(240, prof.params().h, 1.0);
    ScalarOptions so;
    so.closure = cl;
    so.n = 240;
    double worst = 0;
    for (int k : ks) {
        EigenMode m = leading_mode(k, assemble_pencil(k, prof, g), g);
        auto rr = find_root_z(k, prof, so);
        const double d = std::abs(m.lambda - rr.lambda) / std::max(1.0, std::abs(m.lambda));
        worst = std::max(worst, d);
        if (log) *log += " k" + std::to_string(k) + f("=%.2e", d);
    }
    return worst;
}

// 3. Cross-method eigenvalues
Outcome c3() {
    const std::vector<int> ks{1, 2, 7, 8, 14};
    std::string log;
    const double full30 = cross_method(30, Closure::Full, ks, &log);
    const double lead30 = cross_method(30, Closure::Leading, ks, nullptr);
    std::vector<double> ladder;
    for (double b : {20.0, 40.0, 80.0}) ladder.push_back(cross_method(b, Closure::Leading, ks, nullptr));
    const bool mono = ladder[1] < ladder[0] && ladder[2] < ladder[1];
    std::string d = "b=30 full closure" + log + f(" (leading %.2e)", lead30) + "; leading ladder b=20,40,80:" +
                    f(" %.2e", ladder[0]) + f(" %.2e", ladder[1]) + f(" %.2e", ladder[2]);
    return {full30 <= 1e-2 && mono, d};
}

// 4. Engineered spectrum
Outcome c4() {
    auto p = derive_scales(30, 0.98, 0.05);
    CalibrationResult cal = calibrate_offsets({1, 7}, p);
    std::vector<double> d = cal.ok() ? cal.d : std::vector<double>{0, 0};
    auto prof = make_profile(p, designed_polynomial({1, 7}, d, p));
    SpectrumOptions so;
    so.pencil_kmax = 0;
    so.threads = threads();
    auto rep = spectrum_report({1, 7}, 21, prof, so);
    bool stable = true;
    for (const auto& r : rep.records)
        if (!r.in_kernel_set && r.lambda_scalar && !(r.lambda_scalar->real() < 0)) stable = false;
    std::string det = "calibration " + to_string(cal.status) + f(", kernelResidual %.3e (limit 1e-6)", rep.kernelResidual) +
                      f(", gap %.3e", rep.gap);
    return {cal.ok() && rep.kernelResidual < 1e-6 && stable, det};
}

// 5. Biorthogonality
Outcome c5() {
    auto prof = designed(30);
    Grid g = make_grid(240, prof.params().h, 1.0);
    ModeBasis mb = kernel_basis({1, 7, 2, 8, 14}, prof, g, threads());
    const int n = static_cast<int>(mb.gram.rows());
    const double dev = (mb.gram - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
    bool raised = false;
    try {
        biorthogonalize({mb.modes[0], mb.modes[0]}, {mb.conjugates[0], mb.conjugates[0]}, g, mb.nu);
    } catch (const Error&) {
        raised = true;
    }
    return {dev < 1e-8 && raised,
            f("|Gram - I|max %.3e (limit 1e-8), ", dev) + (raised ? "duplicate raises" : "duplicate accepted")};
}

// 6. K-tensor structure
Outcome c6() {
    auto prof = designed(50);
    auto ws = extended_set(2);
    Grid g = make_grid(240, prof.params().h, 1.0);
    ReductionBasis rb = reduction_basis(kernel_basis(ws.full, prof, g, threads()), prof.params());
    Tensor3 K2 = compute_K_2d(rb);
    auto sp = sparsity_report(K2, rb.k);
    // sign pattern on the unsymmetrized tensor, resonant sums of base pairs
    Tensor3 raw = compute_K_raw(rb);
    int agree = 0, total = 0;
    for (int j = 0; j < ws.p; ++j)
        for (int l = 0; l < ws.p; ++l) {
            if (j == l) continue;
            const int i = ws.sumIndex.at({j, l});
            const int want = ws.base[j] - 5 * ws.base[l] > 0 ? 1 : -1;
            const int got = raw(i, j, l) > 0 ? 1 : -1;
            agree += want == got;
            ++total;
        }
    const bool signs = agree == total || agree == 0;
    return {sp.ratio() < 1e-3 && signs, f("nonresonant/resonant %.3e (limit 1e-3), ", sp.ratio()) + "sign pattern " +
                                            std::to_string(agree) + "/" + std::to_string(total) +
                                            " off-diagonal pairs agree"};
}

double control_error(double b, ControlMethod method) {
    auto prof = designed(b);
    auto ws = extended_set(2);
    Grid g = make_grid(240, prof.params().h, 1.0);
    ReductionBasis rb = reduction_basis(kernel_basis(ws.full, prof, g, threads()), prof.params());
    Mat T = random_T(ws.N(), 3);
    auto cs = synthesize_u1(T, rb, method);
    return (compute_M(cs.profiles, rb) - T).norm() / T.norm();
}

// 7. Control round trip, through the moment construction
Outcome c7() {
    const double e50 = control_error(50, ControlMethod::Moments), e80 = control_error(80, ControlMethod::Moments);
    const double p50 = control_error(50, ControlMethod::Projected);
    return {e50 < 0.05 && e80 < e50, f("moments: b=50 %.3e", e50) + f(", b=80 %.3e (limit 0.05, improving)", e80) +
                                         f("; projected b=50 %.3e", p50)};
}

// 8. Moment profiles
Outcome c8() {
    double merr = 0, bres = 0;
    {
        Grid g = make_grid(240, 34.0, 1.0);
        auto mp = moment_profile({{1, 0, 1.0}}, g);
        merr = std::max(merr, std::abs(moment(mp.W, 1, 0, g) - 1.0));
        bres = std::max(bres, mp.boundary_residual);
    }
    auto p = derive_scales(30, 0.98, 0.05);
    Grid g = make_grid(240, p.h, 1.0);
    auto rb = asymptotic_basis({1, 7}, p, g);
    auto cs = synthesize_u1(random_T(2, 5), rb, ControlMethod::Moments);
    for (const auto& [idx, list] : cs.constraints) {
        auto it = cs.profiles.entries.find(idx);
        for (const auto& c : list) {
            const double v = it == cs.profiles.entries.end() ? 0.0 : moment(it->second, c.m, c.p, g);
            merr = std::max(merr, std::abs(v - c.value));
        }
    }
    bres = std::max(bres, cs.max_boundary_residual);
    return {merr < 1e-8 && bres < 1e-10, f("moment error %.3e (limit 1e-8)", merr) + f(", boundary %.3e (limit 1e-10)", bres)};
}

struct LorenzSetup {
    TargetField target;
    WavenumberSet ws = extended_set(3);
    Tensor3 K;
};

LorenzSetup lorenz_setup() {
    LorenzSetup s;
    Vec x0(3);
    x0 << 1, 1, 20;
    s.target = rescale_into_ball(lorenz_field(), x0);
    auto prof = designed(30);
    Grid g = make_grid(240, prof.params().h, 1.0);
    s.K = compute_K(reduction_basis(kernel_basis(s.ws.full, prof, g, threads()), prof.params()));
    return s;
}

// 9. Fast-slow realization
Outcome c9() {
    LorenzSetup s = lorenz_setup();
    RealizeOptions ro;
    ro.lyap_horizon = 0;
    ro.threads = threads();
    auto rep = realize_target(s.target, s.K, s.ws, ro);
    const double limit = 0.05 * s.target.ballRadius;
    bool decreasing = true, stable = true;
    std::string lad;
    for (size_t q = 0; q < rep.ladder.size(); ++q) {
        const auto& e = rep.ladder[q];
        lad += f(" xi=%.0e:", e.xi) + f(" W %.2e", e.manifold.sup) + f(" c %.4f", e.c);
        if (q > 0) {
            decreasing &= e.manifold.sup < rep.ladder[q - 1].manifold.sup;
            stable &= e.c <= 1.25 * rep.ladder[q - 1].c;
        }
    }
    std::string d = f("supError %.3e", rep.supError) + f(" (limit %.3e);", limit) + lad +
                    (decreasing ? "; W decreasing" : "; W not decreasing") +
                    (stable ? "; c stable" : "; c grows by more than 25% between rungs");
    return {rep.supError < limit && decreasing && stable, d};
}

// 10. Chaos transfer
Outcome c10() {
    Vec x0(3);
    x0 << 1, 1, 20;
    LyapunovOptions lo;
    lo.horizon = 1000;
    lo.dt = 0.01;
    lo.transient = 20;
    const double raw = lyapunov(lorenz_field(), x0, lo).exponents[0];

    LorenzSetup s = lorenz_setup();
    RealizeOptions ro;
    ro.horizon = 1;
    ro.xi_ladder.clear();
    ro.threads = threads();
    auto rep = realize_target(s.target, s.K, s.ws, ro);
    const double lt = rep.lyapunovTarget[0], lr = rep.lyapunovRealized[0];
    const double rel = std::abs(lr - lt) / std::abs(lt);
    const bool raw_ok = std::abs(raw - 0.9056) < 0.05 * 0.9056;
    return {raw_ok && lt > 0 && rel < 0.15, f("raw LLE %.4f", raw) + f(" (0.9056 +- 5%%); target %.5f", lt) +
                                                f(", realized %.5f", lr) + f(", relative gap %.3e (limit 0.15)", rel)};
}

// 11. Semigroup decay
Outcome c11() {
    auto prof = designed(30);
    Grid g = make_grid(120, prof.params().h, 1.0);
    std::string d;
    bool ok = true;
    for (int k : {2, 8}) {
        EigenMode m = leading_mode(k, assemble_pencil(k, prof, g), g);
        SemigroupOptions so;
        so.dt = k == 2 ? 2e-3 : 2e-4;
        DecayFit fit = semigroup_decay(k, prof, g, k == 2 ? 20.0 : 5.0, so);
        const double rel = std::abs(fit.rate + m.lambda.real()) / std::abs(m.lambda.real());
        ok &= rel < 0.02;
        d += "k=" + std::to_string(k) + f(" rate %.4f", fit.rate) + f(" vs %.4f", -m.lambda.real()) + f(" (%.2e); ", rel);
    }
    // kernel-set modes: norm drift over unit time
    double drift = 0;
    for (int k : {1, 7}) {
        EigenMode m = leading_mode(k, assemble_pencil(k, prof, g), g);
        CVec v0(2 * g.n);
        v0 << m.psi, m.w;
        auto norms = propagate_norms(k, prof, g, v0, 1.0, 1e-3);
        drift = std::max(drift, std::abs(norms.back() - 1.0));
    }
    ok &= drift < 1e-4;
    d += f("kernel drift %.3e (limit 1e-4)", drift);
    return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int a = 1; a < argc; ++a)
        if (!std::strcmp(argv[a], "--only") && a + 1 < argc) only = std::atoi(argv[++a]);
    const std::vector<std::function<Outcome()>> checks{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
    int failed = 0;
    for (int i = 1; i <= 11; ++i) {
        if (only && i != only) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = checks[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.1fs]\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
