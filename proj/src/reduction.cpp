#include <algorithm>
#include <cmath>
#include <set>

#include "ob/reduction.hpp"

namespace ob {

AsymptoticProfiles asymptotic_profiles(int k, const ScaleParams& params, const Grid& grid) {
    AsymptoticProfiles a;
    const int n = grid.n;
    a.Psi.resize(n);
    a.Theta.resize(n);
    a.ThetaStar.resize(n);
    for (int i = 0; i < n; ++i) {
        const double y = grid.y[i];
        const double e = std::exp(-k * y);
        a.Psi[i] = y * y * e;
        a.Theta[i] = std::exp(-params.b * y) - e;
        a.ThetaStar[i] = (k * y * y + y) * e;
    }
    return a;
}

ReductionBasis asymptotic_basis(const std::vector<int>& kset, const ScaleParams& params, const Grid& grid) {
    ReductionBasis rb;
    rb.grid = grid;
    rb.k = kset;
    rb.nu = params.nu;
    const int N = static_cast<int>(kset.size());
    rb.abar = Vec::Ones(N);
    rb.bbar = Vec::Ones(N);
    rb.betal = Vec::Ones(N);
    for (int k : kset) {
        auto a = asymptotic_profiles(k, params, grid);
        rb.Psi.push_back(a.Psi);
        rb.Theta.push_back(a.Theta);
        rb.ThetaStar.push_back(a.ThetaStar);
    }
    return rb;
}

ModeBasis kernel_basis(const std::vector<int>& kset, const TemperatureProfile& profile, const Grid& grid,
                       int threads) {
    const int N = static_cast<int>(kset.size());
    std::vector<EigenMode> modes(N);
    std::vector<ConjugateMode> conj(N);
    parallel_for(N, threads, [&](int i) {
        Pencil pc = assemble_pencil(kset[i], profile, grid);
        modes[i] = leading_mode(kset[i], pc, grid);
        conj[i] = solve_conjugate_modes(kset[i], profile, grid, modes[i].lambda);
    });
    return biorthogonalize(std::move(modes), std::move(conj), grid, profile.params().nu);
}

ReductionBasis reduction_basis(const ModeBasis& basis, const ScaleParams& params) {
    ReductionBasis rb;
    rb.grid = basis.grid;
    rb.nu = basis.nu;
    const int N = static_cast<int>(basis.modes.size());
    rb.abar.resize(N);
    rb.bbar.resize(N);
    rb.betal.resize(N);
    const auto& g = rb.grid;
    for (int i = 0; i < N; ++i) {
        const auto& m = basis.modes[i];
        const auto& c = basis.conjugates[i];
        rb.k.push_back(m.k);
        rb.Psi.push_back(m.psi.real());
        rb.Theta.push_back(m.w.real());
        rb.ThetaStar.push_back(c.wtilde.real());
        rb.abar[i] = g.D1.row(0).dot(rb.ThetaStar.back());
        rb.bbar[i] = 0.5 * g.D2.row(0).dot(rb.Psi.back());
        rb.betal[i] = g.D1.row(0).dot(rb.Theta.back()) / (m.k - params.b);
    }
    return rb;
}

ZetaPair zeta_profiles(int i, int j, const ReductionBasis& basis) {
    const auto& g = basis.grid;
    const double ki = basis.k[i], kj = basis.k[j];
    Vec dT = g.D1 * basis.ThetaStar[i];
    Vec dP = g.D1 * basis.Psi[j];
    Vec a = kj * basis.Psi[j].cwiseProduct(dT);
    Vec b = ki * dP.cwiseProduct(basis.ThetaStar[i]);
    return {a + b, a - b};
}

Mat compute_M(const FourierProfileSet& u1, const ReductionBasis& basis) {
    const int N = basis.size();
    const auto& g = basis.grid;
    Mat M = Mat::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const Vec* us = u1.get(basis.k[i] + basis.k[j]);
            const Vec* ud = u1.get(std::abs(basis.k[i] - basis.k[j]));
            if (!us && !ud) continue;
            ZetaPair z = zeta_profiles(i, j, basis);
            double v = 0;
            if (us) v += g.integrate(Vec(z.zeta_tilde.cwiseProduct(*us)));
            if (ud) v += g.integrate(Vec(z.zeta.cwiseProduct(*ud)));
            M(i, j) = 0.5 * v;
        }
    return M;
}

namespace {

int default_nx(const ReductionBasis& basis, int fourier_max) {
    int kmax = *std::max_element(basis.k.begin(), basis.k.end());
    return 4 * (2 * kmax + fourier_max) + 16;
}

// (1/pi) int_0^{2pi} int_0^h {psi_j, theta*_i} u dx dy with u given on the
// (x, y) tensor grid.
double bracket_pairing(int i, int j, const ReductionBasis& basis, const Mat& u, const Vec& x) {
    const auto& g = basis.grid;
    const double ki = basis.k[i], kj = basis.k[j];
    Vec dT = g.D1 * basis.ThetaStar[i];
    Vec dP = g.D1 * basis.Psi[j];
    const int nx = static_cast<int>(x.size());
    const double dx = 2 * M_PI / nx;
    double total = 0;
    for (int a = 0; a < nx; ++a) {
        const double cj = std::cos(kj * x[a]), sj = std::sin(kj * x[a]);
        const double ci = std::cos(ki * x[a]), si = std::sin(ki * x[a]);
        double col = 0;
        for (int b = 0; b < g.n; ++b) {
            double psi_x = kj * basis.Psi[j][b] * cj;
            double psi_y = dP[b] * sj;
            double th_x = -ki * basis.ThetaStar[i][b] * si;
            double th_y = dT[b] * ci;
            col += g.w[b] * (psi_x * th_y - psi_y * th_x) * u(a, b);
        }
        total += col * dx;
    }
    return total / M_PI;
}

Vec periodic_nodes(int nx) {
    Vec x(nx);
    for (int a = 0; a < nx; ++a) x[a] = 2 * M_PI * a / nx;
    return x;
}

}  // namespace

Mat compute_M_2d(const FourierProfileSet& u1, const ReductionBasis& basis, int nx) {
    const int N = basis.size();
    const auto& g = basis.grid;
    int fmax = 0;
    for (const auto& [n, v] : u1.entries) fmax = std::max(fmax, n);
    if (nx <= 0) nx = default_nx(basis, fmax);
    Vec x = periodic_nodes(nx);
    Mat u = Mat::Zero(nx, g.n);
    for (const auto& [n, prof] : u1.entries) {
        const double c0 = n == 0 ? 0.5 : 1.0;
        for (int a = 0; a < nx; ++a) u.row(a) += c0 * std::cos(n * x[a]) * prof.transpose();
    }
    Mat M(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) M(i, j) = bracket_pairing(i, j, basis, u, x);
    return M;
}

Tensor3 compute_K_raw(const ReductionBasis& basis) {
    const int N = basis.size();
    Tensor3 K(N);
    for (int l = 0; l < N; ++l) {
        FourierProfileSet th;
        th.entries[basis.k[l]] = basis.Theta[l];
        Mat M = compute_M(th, basis);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) K(i, j, l) = -M(i, j);
    }
    return K;
}

Tensor3 compute_K_2d(const ReductionBasis& basis, int nx) {
    const int N = basis.size();
    const auto& g = basis.grid;
    int kmax = *std::max_element(basis.k.begin(), basis.k.end());
    if (nx <= 0) nx = default_nx(basis, kmax);
    Vec x = periodic_nodes(nx);
    Tensor3 K(N);
    for (int l = 0; l < N; ++l) {
        Mat u(nx, g.n);
        for (int a = 0; a < nx; ++a) u.row(a) = std::cos(basis.k[l] * x[a]) * basis.Theta[l].transpose();
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) K(i, j, l) = -bracket_pairing(i, j, basis, u, x);
    }
    return K;
}

Tensor3 symmetrize(const Tensor3& K) {
    Tensor3 S(K.n);
    for (int i = 0; i < K.n; ++i)
        for (int j = 0; j < K.n; ++j)
            for (int l = 0; l < K.n; ++l) S(i, j, l) = 0.5 * (K(i, j, l) + K(i, l, j));
    return S;
}

Tensor3 compute_K(const ReductionBasis& basis) { return symmetrize(compute_K_raw(basis)); }

Vec compute_f(const FourierProfileSet& eta1, const ReductionBasis& basis) {
    const int N = basis.size();
    Vec f = Vec::Zero(N);
    for (int i = 0; i < N; ++i) {
        const Vec* e = eta1.get(basis.k[i]);
        if (e) f[i] = basis.grid.integrate(Vec(basis.ThetaStar[i].cwiseProduct(*e)));
    }
    return f;
}

FourierProfileSet eta_for_f(const Vec& f, const ReductionBasis& basis) {
    std::set<int> seen(basis.k.begin(), basis.k.end());
    if (static_cast<int>(seen.size()) != basis.size())
        throw Error("reduction", "eta_for_f needs distinct wavenumbers");
    FourierProfileSet out;
    for (int i = 0; i < basis.size(); ++i) {
        const Vec& t = basis.ThetaStar[i];
        double nn = basis.grid.integrate(Vec(t.cwiseAbs2()));
        out.entries[basis.k[i]] = (f[i] / nn) * t;
    }
    return out;
}

double resonance_J(int kj, int kl) {
    const double s = 2.0 * (kj + kl);
    return 2.0 / (s * s * s) * (kj - 5.0 * kl);
}

bool is_resonant(int ki, int kj, int kl) { return ki == kj + kl || ki == std::abs(kj - kl); }

SparsityReport sparsity_report(const Tensor3& K, const std::vector<int>& kset) {
    SparsityReport r;
    for (int i = 0; i < K.n; ++i)
        for (int j = 0; j < K.n; ++j)
            for (int l = 0; l < K.n; ++l) {
                double v = std::abs(K(i, j, l));
                if (is_resonant(kset[i], kset[j], kset[l]))
                    r.max_resonant = std::max(r.max_resonant, v);
                else
                    r.max_nonresonant = std::max(r.max_nonresonant, v);
            }
    return r;
}

}  // namespace ob
