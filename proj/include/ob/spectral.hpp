#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ob/common.hpp"
#include "ob/profile.hpp"

namespace ob {

// Chebyshev-Gauss-Lobatto nodes mapped to [0,h] by
// y = l (1+s) / (1 + 2l/h - s), which clusters nodes near y = 0.
struct Grid {
    int n = 0;
    double h = 0;
    double l = 1;
    Vec y;      // nodes, increasing
    Vec w;      // Clenshaw-Curtis weights in y
    Vec s;      // reference nodes in [-1,1]
    Mat D1;     // d/dy
    Mat D2;     // d^2/dy^2

    double integrate(const Vec& f) const { return w.dot(f); }
    cplx integrate(const CVec& f) const { return w.cast<cplx>().dot(f); }
    // Barycentric interpolation of nodal values at an arbitrary y.
    double interp(const Vec& f, double yq) const;
    cplx interp(const CVec& f, double yq) const;
};

Grid make_grid(int n, double h, double l = 1.0);

// Closed-form half-line Green function with Robin condition at 0. Positive
// convention: -(D^2 - kbar^2) G = delta, so dG/dy jumps by -1 across y0.
cplx green_closed(cplx kbar, double beta, double y, double y0);

struct GreenOperator {
    Grid grid;
    CMat G;   // G(i,j) = Gamma(y_i, y_j)
    double rcond = 0;  // reciprocal condition estimate of the correction solve
};

// Green function of the Robin problem on [0,h] built from the two
// homogeneous solutions (Robin at 0, Robin at h). Same sign as green_closed.
GreenOperator green_numeric(cplx kbar, double beta, double beta1, const Grid& grid);

struct Pencil {
    int k = 0;
    Mat A;  // lambda B v = A v, v = (psi, w)
    Mat B;
};

Pencil assemble_pencil(int k, const TemperatureProfile& profile, const Grid& grid);

struct EigenMode {
    int k = 0;
    cplx lambda;
    CVec psi;
    CVec w;
    cplx rho2;  // psi''(0)/2
    bool refined = false;
};

struct ModeOptions {
    double halfplane = 0.5;
    double shift = 0.37;
    int refine_factor = 2;     // filter grid n -> refine_factor * n
    double refine_tol = 1e-4;  // relative eigenvalue movement
    bool filter = true;
    int max_modes = 8;
};

// Eigenvalues of the pencil with Re lambda > -halfplane, sorted by
// decreasing real part, rho2-normalized.
std::vector<EigenMode> solve_modes(int k, const Pencil& pencil, const Grid& grid,
                                   const TemperatureProfile& profile, const ModeOptions& opt = {});

// Least-stable eigenpair (refined, rho2-normalized) with no half-plane cut.
EigenMode leading_mode(int k, const Pencil& pencil, const Grid& grid, double shift = 0.37);

// All finite eigenvalues (no filter), sorted by decreasing real part.
CVec pencil_eigenvalues(const Pencil& pencil, double shift = 0.37);

// One inverse-iteration refinement of an eigenvalue guess on a pencil.
cplx refine_eigenvalue(const Pencil& pencil, cplx guess, CVec* vec = nullptr, int iters = 4);

struct BoundaryResidual {
    double psi = 0;  // max of |psi(0)|,|psi(h)|,|psi'(0)|,|psi'(h)| relative to max|psi|
    double w = 0;    // Robin residuals relative to max|w|
};
BoundaryResidual boundary_residual(const EigenMode& m, const Grid& grid, double beta, double beta1);

// ---- scalar eigenvalue equation ----

enum class Closure { Leading, Full };
std::string to_string(Closure c);
Closure closure_from_string(const std::string& s);

struct ScalarEigenContext {
    cplx z;
    double a = 0;
    cplx xi_tilde;
    cplx Hk;        // only populated by the full closure
    cplx Hk_tilde;  // leading polynomial part
    cplx Yk;
};

struct ScalarOptions {
    Closure closure = Closure::Leading;
    int n = 200;      // own grid for the full closure
    double l = 0.6;
    int max_iter = 60;
    double tol = 1e-12;
    double step_tol = 1e-13;
};

// Scalar residual (z+1)^2 - Lambda/(1+az) - Y_k(z). With the full closure Y_k
// is the exact perturbation of the discretized problem, so the residual is
// (z+1)^2 (1 - rho2(z)).
cplx scalar_residual(ScalarEigenContext& ctx, int k, const TemperatureProfile& profile,
                     const ScalarOptions& opt = {});

struct RootResult {
    cplx z;
    cplx lambda;
    int iterations = 0;
    bool converged = false;
    double residual = 0;
};

RootResult find_root_z(int k, const TemperatureProfile& profile, const ScalarOptions& opt = {});

// Full-closure residual cache: the bordered system depends on k and the
// profile only, so the grid and operators are built once.
class FullClosure {
public:
    FullClosure(int k, const TemperatureProfile& profile, int n, double l);
    cplx rho2(cplx lambda) const;
    int k() const { return k_; }

private:
    int k_;
    Grid grid_;
    Mat L_, L2_;
    Vec Uy_, src_;
    double beta_, beta1_, nu_;
};

// ---- conjugate modes and biorthogonal basis ----

struct ConjugateMode {
    int k = 0;
    cplx lambda;
    CVec phi;     // printed convention
    CVec wtilde;
    CVec phi_scaled;  // nu/k^2 * phi, well scaled for quadrature
};

// Adjoint eigenpair at the eigenvalue nearest `target`.
ConjugateMode solve_conjugate_modes(int k, const TemperatureProfile& profile, const Grid& grid,
                                    cplx target, double shift = 0.37);

CVec conjugate_eigenvalues(int k, const TemperatureProfile& profile, const Grid& grid,
                           double shift = 0.37);

struct ModeBasis {
    std::vector<EigenMode> modes;
    std::vector<ConjugateMode> conjugates;
    CMat gram;
    CMat raw_gram;
    Grid grid;
    double nu = 1;
};

// Pairing <e, e*> = nu^-1 int psi L phi_scaled... in x-normalized form;
// zero when the wavenumbers differ.
cplx pairing(const EigenMode& e, const ConjugateMode& c, const Grid& grid, double nu);

ModeBasis biorthogonalize(std::vector<EigenMode> modes, std::vector<ConjugateMode> conjugates,
                          const Grid& grid, double nu, double singular_tol = 1e-10);

// ---- semigroup ----

struct DecayFit {
    double rate = 0;        // fitted -d/dt log||v||
    double fit_residual = 0;
    std::vector<double> t;
    std::vector<double> log_norm;
};

struct SemigroupOptions {
    double dt = 1e-3;
    double tail_fraction = 0.5;
    double fit_tol = 1e-2;
    // Initial data: projected off these modes (if any).
    std::vector<std::pair<EigenMode, ConjugateMode>> kernel;
};

// BDF2 integration of B v' = A v with constraint rows, initial data random
// (seeded) or given.
DecayFit semigroup_decay(int k, const TemperatureProfile& profile, const Grid& grid, double horizon,
                         const SemigroupOptions& opt = {}, const CVec* v0 = nullptr,
                         unsigned seed = 1);

// Norm history of the propagated state, ||v(t)|| / ||v(0)||.
std::vector<double> propagate_norms(int k, const TemperatureProfile& profile, const Grid& grid,
                                    const CVec& v0, double horizon, double dt);

// ---- report ----

struct SpectrumRecord {
    int k = 0;
    bool in_kernel_set = false;
    std::optional<cplx> lambda_pencil;
    std::optional<cplx> lambda_scalar;
    std::optional<cplx> lambda_full;
    bool apriori_gapped = false;
};

struct SpectrumReport {
    std::vector<SpectrumRecord> records;
    double gap = 0;             // min over k not in K of -Re lambda (scalar)
    double kernelResidual = 0;  // max over k in K of |lambda| (scalar)
    double tol = 1e-6;
    bool pass() const { return kernelResidual < tol && gap > 0; }
};

struct SpectrumOptions {
    int pencil_kmax = 21;
    int pencil_n = 240;
    double grid_l = 1.0;
    bool full_closure = false;
    int threads = 1;
    double apriori_c1 = 1.0;  // |kbar| < c1 h r b
    ModeOptions modes;
    ScalarOptions scalar;
};

SpectrumReport spectrum_report(const std::vector<int>& kset, int kmax, const TemperatureProfile& profile,
                               const SpectrumOptions& opt = {});

}  // namespace ob
