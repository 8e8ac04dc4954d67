#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ob/control.hpp"

namespace ob {

namespace {

// Sums and nonzero differences of the base, together with the base itself,
// must be pairwise distinct so every resonance picks a single index.
bool clean_resonances(const std::vector<int>& base) {
    std::set<int> seen(base.begin(), base.end());
    if (seen.size() != base.size()) return false;
    for (size_t a = 0; a < base.size(); ++a)
        for (size_t c = a; c < base.size(); ++c) {
            if (!seen.insert(base[a] + base[c]).second) return false;
            if (a != c && !seen.insert(std::abs(base[a] - base[c])).second) return false;
        }
    return true;
}

}  // namespace

std::string to_string(ControlMethod m) { return m == ControlMethod::Projected ? "projected" : "moments"; }

ControlMethod control_method_from_string(const std::string& s) {
    if (s == "moments") return ControlMethod::Moments;
    if (s == "projected") return ControlMethod::Projected;
    throw Error("control", "unknown control method '" + s + "' (expected moments|projected)");
}

std::vector<int> sidon_set(int p) {
    if (p < 1) throw Error("control", "sidon_set needs p >= 1");
    std::vector<int> base{1};
    while (static_cast<int>(base.size()) < p) {
        int top = 0;
        for (int a : base)
            for (int c : base) top = std::max(top, a + c);
        int cand = top + 1;
        for (;; ++cand) {
            if (cand % 2 == 0 || cand % 5 == 0) continue;
            base.push_back(cand);
            if (clean_resonances(base)) break;
            base.pop_back();
        }
    }
    return base;
}

bool has_distinct_sums(const std::vector<int>& base) {
    std::set<int> sums;
    for (size_t a = 0; a < base.size(); ++a)
        for (size_t c = a; c < base.size(); ++c)
            if (!sums.insert(base[a] + base[c]).second) return false;
    return true;
}

WavenumberSet extended_set(const std::vector<int>& base) {
    if (base.empty()) throw Error("control", "empty wavenumber base");
    for (int k : base)
        if (k < 1) throw Error("control", "wavenumbers must be positive");
    if (!has_distinct_sums(base)) throw Error("control", "base pairwise sums are not distinct");
    WavenumberSet ws;
    ws.p = static_cast<int>(base.size());
    ws.base = base;
    std::vector<int> sums;
    for (int a = 0; a < ws.p; ++a)
        for (int c = a; c < ws.p; ++c) sums.push_back(base[a] + base[c]);
    std::sort(sums.begin(), sums.end());
    ws.full = base;
    for (int s : sums) {
        if (std::find(base.begin(), base.end(), s) != base.end())
            throw Error("control", "pairwise sum " + std::to_string(s) + " coincides with a base element");
        ws.full.push_back(s);
    }
    for (int a = 0; a < ws.p; ++a)
        for (int c = 0; c < ws.p; ++c) {
            int s = base[a] + base[c];
            int idx = static_cast<int>(std::find(ws.full.begin() + ws.p, ws.full.end(), s) - ws.full.begin());
            ws.sumIndex[{a, c}] = idx;
        }
    return ws;
}

WavenumberSet extended_set(int p) { return extended_set(sidon_set(p)); }

bool pair_map_injective(const std::vector<int>& k) {
    std::set<std::pair<int, int>> img;
    for (size_t i = 0; i < k.size(); ++i)
        for (size_t j = 0; j <= i; ++j)
            if (!img.insert({std::abs(k[i] - k[j]), k[i] + k[j]}).second) return false;
    return true;
}

DecompositionResult verify_decomposition(const Tensor3& K, const WavenumberSet& ws, const Mat& rhs) {
    const int p = ws.p, N = ws.N();
    if (K.n != N) throw Error("control", "K tensor size does not match the wavenumber set");
    if (rhs.rows() != p || rhs.cols() != p) throw Error("control", "decomposition rhs must be p x p");
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (resonance_J(ws.base[j], ws.base[l]) == 0.0)
                throw Error("control", "vanishing resonant coefficient J(" + std::to_string(ws.base[j]) + "," +
                                           std::to_string(ws.base[l]) + "): a base element is 5 times another");
    const Mat b = 0.5 * (rhs + rhs.transpose());
    const double kmax = K.max_abs();
    DecompositionResult r;
    r.chi = Vec::Zero(N - p);
    for (int j = 0; j < p; ++j)
        for (int l = j; l < p; ++l) {
            const int i = ws.sumIndex.at({j, l});
            const double c = 0.5 * (K(i, j, l) + K(i, l, j));
            if (!(std::abs(c) > 1e-12 * kmax))
                throw Error("control", "resonant coefficient K(" + std::to_string(i) + "," + std::to_string(j) + "," +
                                           std::to_string(l) + ") vanishes");
            r.chi[i - p] = b(j, l) / c;
        }
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) {
            double s = 0;
            for (int i = p; i < N; ++i) s += K(i, j, l) * r.chi[i - p];
            r.residual = std::max(r.residual, std::abs(s - b(j, l)));
        }
    return r;
}

std::vector<MomentTarget> solve_moment_targets(const Mat& T, const std::vector<int>& k, const Normalizers& nz) {
    const int N = static_cast<int>(k.size());
    if (T.rows() != N || T.cols() != N) throw Error("control", "target matrix must be N x N");
    auto tbar = [&](int i, int j) { return 2.0 * T(i, j) / (nz.abar[i] * nz.bbar[j]); };
    std::vector<MomentTarget> out;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) {
            MomentTarget t;
            t.i = i;
            t.j = j;
            t.n = std::abs(k[i] - k[j]);
            t.m = k[i] + k[j];
            const double ki = k[i], kj = k[j];
            if (i == j) {
                t.X = tbar(i, i) / (3.0 * ki);
                t.Y = 0;
            } else {
                Eigen::Matrix2d A;
                A << kj + 2 * ki, 2 * ki * ki, ki + 2 * kj, 2 * kj * kj;
                t.det = A.determinant();
                if (std::abs(t.det) < 1e-12 * A.cwiseAbs().maxCoeff())
                    throw Error("control", "singular 2x2 control block for pair (" + std::to_string(i) + "," +
                                               std::to_string(j) + ")");
                Eigen::Vector2d s = A.partialPivLu().solve(Eigen::Vector2d(tbar(i, j), tbar(j, i)));
                t.X = s[0];
                t.Y = s[1];
            }
            out.push_back(t);
        }
    return out;
}

double moment(const Vec& W, int m, int p, const Grid& grid) {
    Vec f(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double y = grid.y[i];
        f[i] = std::pow(y, 2 + p) * std::exp(-m * y) * W[i];
    }
    return grid.integrate(f);
}

MomentProfile least_norm_profile(const Mat& F, const Vec& targets, const Grid& grid,
                                 const MomentProfileOptions& opt) {
    const int C = static_cast<int>(F.rows());
    const int n = grid.n;
    MomentProfile out;
    out.W = Vec::Zero(n);
    if (C == 0 || targets.cwiseAbs().maxCoeff() == 0.0) return out;

    // y^2 (h-y)^2 P_q(s(y)), with s the grid's boundary-clustered coordinate,
    // so the basis resolves the exp(-m y) weights near the wall
    const int nb = opt.basis_factor * C;
    const double h = grid.h;
    Mat Phi(n, nb);
    for (int i = 0; i < n; ++i) {
        const double y = grid.y[i], t = grid.s[i];
        const double bump = (y / h) * (y / h) * (1 - y / h) * (1 - y / h);
        double p0 = 1, p1 = t;
        for (int q = 0; q < nb; ++q) {
            double pq = q == 0 ? p0 : (q == 1 ? p1 : 0);
            if (q >= 2) {
                pq = ((2 * q - 1) * t * p1 - (q - 1) * p0) / q;
                p0 = p1;
                p1 = pq;
            }
            Phi(i, q) = bump * pq;
        }
    }
    // Orthonormalize the basis in the quadrature inner product; the least
    // L2-norm W then has coordinates d of least Euclidean norm.
    const Vec sw = grid.w.cwiseSqrt();
    Eigen::HouseholderQR<Mat> qr(sw.asDiagonal() * Phi);
    Mat Q = qr.householderQ() * Mat::Identity(n, nb);
    Mat R = qr.matrixQR().topRows(nb).triangularView<Eigen::Upper>();
    Vec rdiag = R.diagonal().cwiseAbs();
    if (rdiag.minCoeff() < opt.regularization * rdiag.maxCoeff())
        throw Error("control", "profile basis is degenerate on this grid");

    Mat A(C, nb);
    Vec a = targets;
    for (int c = 0; c < C; ++c) {
        A.row(c) = F.row(c).cwiseProduct(sw.transpose()) * Q;
        double s = A.row(c).norm();
        if (s > 0) {
            A.row(c) /= s;
            a[c] /= s;
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
    if (cod.rank() < C) throw Error("control", "profile functionals are numerically dependent; enlarge the basis");
    Vec d = cod.solve(a);
    // Two evaluations of the same W: Phi R^-1 d keeps the bump's boundary
    // structure exactly but inherits the conditioning of R; Q d / sqrt(w)
    // keeps the moments but carries round-off into W'(0). Keep whichever
    // is better against the moment (1e-8) and boundary (1e-10) scales.
    auto assess = [&](const Vec& W, double& merr, double& bres) {
        merr = (F * grid.w.cwiseProduct(W) - targets).cwiseAbs().maxCoeff();
        double wm = W.cwiseAbs().maxCoeff();
        double d0 = std::abs(grid.D1.row(0).dot(W)), dh = std::abs(grid.D1.row(n - 1).dot(W));
        bres = wm > 0 ? std::max({std::abs(W[0]), std::abs(W[n - 1]), d0, dh}) / wm : 0.0;
    };
    Vec Wphi = Phi * R.triangularView<Eigen::Upper>().solve(d);
    Vec Wq = (Q * d).cwiseQuotient(sw);
    Wq[0] = 0;
    Wq[n - 1] = 0;
    double m1, b1, m2, b2;
    assess(Wphi, m1, b1);
    assess(Wq, m2, b2);
    const bool take_phi = std::max(m1 / 1e-8, b1 / 1e-10) <= std::max(m2 / 1e-8, b2 / 1e-10);
    out.W = take_phi ? Wphi : Wq;
    out.max_moment_error = take_phi ? m1 : m2;
    out.boundary_residual = take_phi ? b1 : b2;
    return out;
}

MomentProfile moment_profile(const std::vector<MomentConstraint>& constraints, const Grid& grid,
                             const MomentProfileOptions& opt) {
    std::set<std::pair<int, int>> keys;
    for (const auto& c : constraints)
        if (!keys.insert({c.m, c.p}).second) throw Error("control", "duplicate moment functional");
    const int C = static_cast<int>(constraints.size());
    Mat F(C, grid.n);
    Vec t(C);
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < grid.n; ++i) {
            const double y = grid.y[i];
            F(c, i) = std::pow(y, 2 + constraints[c].p) * std::exp(-constraints[c].m * y);
        }
        t[c] = constraints[c].value;
    }
    return least_norm_profile(F, t, grid, opt);
}

namespace {

ControlSolution synthesize_projected(const Mat& T, const ReductionBasis& basis, const MomentProfileOptions& opt) {
    ControlSolution cs;
    cs.targetT = T;
    cs.method = ControlMethod::Projected;
    const int N = basis.size();
    // per Fourier index: rows (1/2) zeta or (1/2) zetatilde, with targets
    std::map<int, std::vector<std::pair<Vec, double>>> rows;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            ZetaPair z = zeta_profiles(i, j, basis);
            rows[std::abs(basis.k[i] - basis.k[j])].push_back({0.5 * z.zeta, T(i, j)});
            if (z.zeta_tilde.cwiseAbs().maxCoeff() > 0)
                rows[basis.k[i] + basis.k[j]].push_back({0.5 * z.zeta_tilde, 0.0});
        }
    for (const auto& [idx, list] : rows) {
        Mat F(list.size(), basis.grid.n);
        Vec t(list.size());
        for (size_t r = 0; r < list.size(); ++r) {
            F.row(r) = list[r].first.transpose();
            t[r] = list[r].second;
        }
        MomentProfile mp = least_norm_profile(F, t, basis.grid, opt);
        cs.max_moment_error = std::max(cs.max_moment_error, mp.max_moment_error);
        cs.max_boundary_residual = std::max(cs.max_boundary_residual, mp.boundary_residual);
        if (mp.W.cwiseAbs().maxCoeff() > 0) cs.profiles.entries[idx] = mp.W;
    }
    return cs;
}

}  // namespace

ControlSolution synthesize_u1(const Mat& T, const ReductionBasis& basis, ControlMethod method,
                              const MomentProfileOptions& opt) {
    if (method == ControlMethod::Projected) return synthesize_projected(T, basis, opt);
    ControlSolution cs;
    cs.targetT = T;
    cs.momentTargets = solve_moment_targets(T, basis.k, {basis.abar, basis.bbar});
    auto add = [&](int idx, int m, int p, double v) {
        auto& list = cs.constraints[idx];
        for (const auto& c : list)
            if (c.m == m && c.p == p) {
                if (c.value != v)
                    throw Error("control", "conflicting moment targets on Fourier index " + std::to_string(idx));
                return;
            }
        list.push_back({m, p, v});
    };
    for (const auto& t : cs.momentTargets) {
        add(t.n, t.m, 0, t.X);
        add(t.n, t.m, 1, t.Y);
        add(t.n, t.m, 2, 0.0);
        // the zetatilde slot of the pair carries no moments
        for (int p = 0; p < 3; ++p) add(t.m, t.m, p, 0.0);
    }
    for (const auto& [idx, list] : cs.constraints) {
        MomentProfile mp = moment_profile(list, basis.grid, opt);
        cs.max_moment_error = std::max(cs.max_moment_error, mp.max_moment_error);
        cs.max_boundary_residual = std::max(cs.max_boundary_residual, mp.boundary_residual);
        if (mp.W.cwiseAbs().maxCoeff() > 0) cs.profiles.entries[idx] = mp.W;
    }
    return cs;
}

double evaluate_field(const FourierProfileSet& f, const Grid& grid, double x, double y) {
    double v = 0;
    for (const auto& [n, prof] : f.entries) {
        double c = n == 0 ? 0.5 : std::cos(n * x);
        v += c * grid.interp(prof, y);
    }
    return v;
}

G1Field::G1Field(FourierProfileSet u1, Grid grid, TemperatureProfile profile, double u0, double gamma)
    : u1_(std::move(u1)), grid_(std::move(grid)), profile_(std::move(profile)), u0_(u0), gamma_(gamma) {}

double G1Field::u1(double x, double y) const { return evaluate_field(u1_, grid_, x, y); }

double G1Field::g1(double x, double y) const {
    const double u = u1(x, y);
    const double den = (profile_.U(y) - u0_) + gamma_ * u;
    if (std::abs(den) < 1e-12 * std::max(1.0, std::abs(u0_)))
        throw Error("control", "g1 denominator vanishes; enlarge u0");
    return -u / den;
}

double G1Field::u1_from_g1(double x, double y) const {
    const double g = g1(x, y);
    return -g * (profile_.U(y) - u0_) / (1 + gamma_ * g);
}

double default_u0(const TemperatureProfile& profile, const Grid& grid) {
    double m = 0;
    for (int i = 0; i < grid.n; ++i) m = std::max(m, std::abs(profile.U(grid.y[i])));
    return 1.1 * m + 1.0;
}

G1Field g1_from_u1(const FourierProfileSet& u1, const Grid& grid, const TemperatureProfile& profile, double u0,
                   double gamma) {
    double m = 0;
    for (int i = 0; i < grid.n; ++i) m = std::max(m, std::abs(profile.U(grid.y[i])));
    if (!(u0 > m)) throw Error("control", "u0 must exceed sup|U| so that U - u0 has no roots");
    G1Field g(u1, grid, profile, u0, gamma);
    // denominator bound on the grid
    for (int i = 0; i < grid.n; ++i)
        for (int a = 0; a < 16; ++a) (void)g.g1(2 * M_PI * a / 16, grid.y[i]);
    return g;
}

}  // namespace ob
