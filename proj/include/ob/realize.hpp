#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ob/common.hpp"
#include "ob/control.hpp"

namespace ob {

// Q(x)_i = sum_{jl} K_ijl x_j x_l + (M x)_i + f_i
struct QuadField {
    int n = 0;
    Tensor3 K;
    Mat M;
    Vec f;

    QuadField() = default;
    explicit QuadField(int n_) : n(n_), K(n_), M(Mat::Zero(n_, n_)), f(Vec::Zero(n_)) {}
    Vec eval(const Vec& x) const;
    Mat jacobian(const Vec& x) const;
    double divergence(const Vec& x) const { return jacobian(x).trace(); }
};

QuadField lorenz_field(double sigma = 10, double rho = 28, double beta = 8.0 / 3.0);
QuadField contraction_field(int p, double rate = 0.5);

// Smooth radial cutoff: the field is blended into -kappa (Y - 0) between
// r0 and ballRadius so the boundary of the ball is inward.
struct Cutoff {
    bool active = false;
    double r0 = 0;
    double r1 = 0;
    double kappa = 1;
};

struct TargetField {
    int p = 0;
    QuadField W;         // D, R, f in the ball coordinates
    double ballRadius = 1;
    Cutoff cutoff;
    // affine map to the raw coordinates: x = center + scale * Y, t = tau * s
    Vec center;
    double scale = 1;
    double tau = 1;
    bool identity = true;

    Vec eval(const Vec& Y) const;  // with the cutoff, if active
};

struct InwardCheck {
    double max_dot = 0;        // max of W(Y).Y / |Y|^2 over the boundary net
    double sup_gradient = 0;   // max spectral norm of grad W over the ball samples
    int samples = 0;
    bool inward() const { return max_dot < 0; }
};

InwardCheck check_target(const TargetField& t, int boundary_samples, int interior_samples, unsigned seed);

struct RescaleOptions {
    double ballRadius = 1;
    double transient = 50;      // raw time discarded before sampling
    double horizon = 500;       // raw sampling time
    double dt = 1e-3;           // raw sampling step (RK4)
    double gradient_target = 0.9;
    int boundary_samples = 10000;
    int interior_samples = 4000;
    unsigned seed = 1;
};

// Centers the empirical attractor, scales it into radius R/2 and rescales
// time so sup |grad W| < 1 on the ball; applies the cutoff beyond 0.9 R
// when the boundary net finds outward points.
TargetField rescale_into_ball(const QuadField& raw, const Vec& x0, const RescaleOptions& opt = {});

// ---- fast-slow system ----

struct QuadraticSystem {
    int N = 0;
    int p = 0;
    double xi = 0;
    QuadField field;    // full N-dimensional field
    Mat T;              // p x (N-p), P = T / xi
    Mat R;              // p x p
    Tensor3 Ktilde1;    // (N-p) x p x p block, stored in an N-sized tensor's corner
    double tubeC2 = 0;  // |Z| < C2 xi defines the tube

    Vec slow(const Vec& x) const { return x.head(p); }
    Vec fast(const Vec& x) const { return x.tail(N - p); }
    // Ktilde^(1)(Y), length N - p
    Vec ktilde1(const Vec& Y) const;
    // K^(1)(Y) + R Y + T Ktilde^(1)(Y) + f
    Vec leading_slow_field(const Vec& Y) const;
    // diagonal of the stiff linear part (0 on Y, -1/xi on Z)
    Vec stiff_diagonal() const;
};

// Solves for T (per slow row through verify_decomposition) so that the
// leading slow field equals the target, then assembles the blocks.
QuadraticSystem build_fast_slow(const TargetField& target, const Tensor3& K, const WavenumberSet& ws, double xi,
                                double T_bound = 1e8);

// ---- integration ----

enum class Integrator { Auto, DormandPrince, ETDRK4 };

struct IntegrateOptions {
    double tol = 1e-9;
    double dt_out = 0.05;     // sampling interval of the stored trajectory
    double h0 = 1e-3;
    double hmax = 0.5;
    double hmin = 1e-12;
    long max_steps = 50000000;
    double blowup = 0;        // abort when |x| exceeds this (0: off)
    Integrator method = Integrator::Auto;
    double stiff_threshold = 1e-3;  // Auto: ETDRK4 when the stiff rate exceeds 1/threshold
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> x;
    long steps = 0;
    long rejected = 0;
    double tol = 0;
    std::string method;
};

// Right-hand side F(x) = diag(L) x + N(x); L is the stiff diagonal (zeros
// for a non-stiff field). F must be the full field.
struct OdeSystem {
    int dim = 0;
    std::function<void(const Vec&, Vec&)> rhs;
    Vec L;
};

OdeSystem make_ode(const QuadField& f);
OdeSystem make_ode(const QuadraticSystem& s);
OdeSystem make_ode(const TargetField& t);

Trajectory integrate(const OdeSystem& sys, const Vec& x0, double t0, double t1, const IntegrateOptions& opt = {});
Trajectory integrate(const QuadraticSystem& sys, const Vec& x0, double t0, double t1, const IntegrateOptions& opt = {});

// Fixed-step ETDRK4 (Cox-Matthews) with diagonal linear part; coefficient
// functions are evaluated by contour integrals (Kassam-Trefethen).
class Etdrk4 {
public:
    Etdrk4(const Vec& L, double h);
    void step(const OdeSystem& sys, Vec& x) const;
    double h() const { return h_; }

private:
    double h_;
    Vec L_, E_, E2_, Q_, f1_, f2_, f3_;
};

// ---- diagnostics ----

struct ManifoldResidual {
    double sup = 0;   // sup |Z - xi Ktilde1(Y)| / xi over the tail
    double mean = 0;
};

ManifoldResidual manifold_residual(const Trajectory& traj, const QuadraticSystem& sys, double tail_fraction = 0.5);

struct FieldDiscrepancy {
    double leading = 0;    // |S_leading(Y) - W(Y)| (0 by construction of T)
    double empirical = 0;  // |dY/dt of the full system - W(Y)|
};

FieldDiscrepancy reduced_field(const Vec& x, const QuadraticSystem& sys, const TargetField& target);

// sup over the tail of a trajectory
FieldDiscrepancy field_discrepancy(const Trajectory& traj, const QuadraticSystem& sys, const TargetField& target,
                                   double tail_fraction = 0.5);

struct LyapunovOptions {
    double horizon = 1000;
    double transient = 10;
    double dt = 0.01;
    double renorm = 1.0;   // QR interval
    int count = 0;         // exponents to compute (0: all)
    unsigned seed = 1;
    int trace_every = 100; // renormalizations between trace entries
};

struct LyapunovReport {
    std::vector<double> exponents;  // descending
    double horizon = 0;
    double renorm = 0;
    double mean_divergence = 0;
    std::vector<std::pair<double, double>> trace;  // (t, largest exponent estimate)
};

LyapunovReport lyapunov(const QuadField& field, const Vec& stiff_diag, const Vec& x0, const LyapunovOptions& opt);
LyapunovReport lyapunov(const QuadField& field, const Vec& x0, const LyapunovOptions& opt);

// ---- end-to-end ----

struct RealizeOptions {
    double xi = 1e-3;
    std::vector<double> xi_ladder{1e-1, 1e-2, 1e-3};
    double horizon = 50;          // comparison horizon in ball time units
    double ladder_horizon = 200;  // horizon of the ladder runs
    double lyap_horizon = 1e5;
    double lyap_dt = 0.05;
    IntegrateOptions integ;
    unsigned seed = 1;
    int threads = 1;
};

struct LadderEntry {
    double xi = 0;
    ManifoldResidual manifold;
    FieldDiscrepancy discrepancy;
    double c = 0;   // empirical discrepancy / sqrt(xi)
    double tube = 0;  // sup |Z| / xi
};

struct RealizationReport {
    int p = 0;
    int N = 0;
    double xi = 0;
    double ballRadius = 1;
    double supError = 0;
    double leadingDiscrepancy = 0;
    ManifoldResidual manifoldResidual;
    std::vector<LadderEntry> ladder;
    std::vector<double> lyapunovTarget;
    std::vector<double> lyapunovRealized;
    Trajectory target_traj;
    Trajectory realized_traj;
};

RealizationReport realize_target(const TargetField& target, const Tensor3& K, const WavenumberSet& ws,
                                 const RealizeOptions& opt);

// A point on the target attractor (after a transient) used as matched
// initial data.
Vec attractor_point(const TargetField& target, double transient, unsigned seed);

}  // namespace ob
