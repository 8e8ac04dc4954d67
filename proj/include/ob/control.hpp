#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ob/common.hpp"
#include "ob/profile.hpp"
#include "ob/reduction.hpp"

namespace ob {

struct WavenumberSet {
    int p = 0;
    std::vector<int> base;  // kbar_1..kbar_p
    std::vector<int> full;  // base, then the sorted unordered pairwise sums
    std::map<std::pair<int, int>, int> sumIndex;  // (j,l) -> i with k_i = kbar_j + kbar_l, both orders

    int N() const { return static_cast<int>(full.size()); }
};

// Base of p odd integers not divisible by 5, each larger than every
// pairwise sum of its predecessors.
std::vector<int> sidon_set(int p);

// Extended set over an arbitrary base (validated: distinct sums).
WavenumberSet extended_set(const std::vector<int>& base);
WavenumberSet extended_set(int p);

bool has_distinct_sums(const std::vector<int>& base);

// The pair map (i,j), i >= j -> (|k_i - k_j|, k_i + k_j) is injective.
bool pair_map_injective(const std::vector<int>& k);

// Solves sum_i Ktilde1_{ijl} chi_i = b_{jl} (j,l base indices, i over the
// sum block). The right-hand side acts as a quadratic form, so only its
// symmetric part is used. Throws when a resonant coefficient vanishes.
struct DecompositionResult {
    Vec chi;            // length N - p
    double residual = 0;  // max |sum_i K chi_i - sym(b)|
};
DecompositionResult verify_decomposition(const Tensor3& K, const WavenumberSet& ws, const Mat& rhs);

struct MomentTarget {
    int i = 0, j = 0;   // index pair, i >= j
    int n = 0, m = 0;   // |k_i - k_j|, k_i + k_j
    double X = 0;       // V^(0)_{n,m}
    double Y = 0;       // V^(1)_{n,m}
    double det = 0;     // 2x2 determinant (0 for diagonal pairs)
};

struct Normalizers {
    Vec abar;
    Vec bbar;
};

// Per unordered pair: (k_j + 2k_i) X + 2 k_i^2 Y = Tbar_ij and the swapped
// equation, Tbar = 2 T / (abar_i bbar_j). Diagonal pairs: X = Tbar/(3k), Y = 0.
std::vector<MomentTarget> solve_moment_targets(const Mat& T, const std::vector<int>& k, const Normalizers& nz);

// int_0^h y^(2+p) exp(-m y) W(y) dy = value
struct MomentConstraint {
    int m = 0;
    int p = 0;
    double value = 0;
};

struct MomentProfileOptions {
    int basis_factor = 4;
    double regularization = 1e-12;
};

struct MomentProfile {
    Vec W;
    double max_moment_error = 0;
    double boundary_residual = 0;  // max(|W(0)|,|W(h)|,|W'(0)|,|W'(h)|) / max|W|
};

MomentProfile moment_profile(const std::vector<MomentConstraint>& constraints, const Grid& grid,
                             const MomentProfileOptions& opt = {});

double moment(const Vec& W, int m, int p, const Grid& grid);

// Least-norm W with int F_c(y) W(y) dy = targets_c for sampled functionals
// F (rows on the grid nodes), over the same bump basis.
MomentProfile least_norm_profile(const Mat& F, const Vec& targets, const Grid& grid,
                                 const MomentProfileOptions& opt = {});

// Moments: the printed route through solve_moment_targets and the
// asymptotic weights y^(2+p) exp(-m y). Projected: the pairings of u1
// against the basis's own zeta profiles are prescribed directly.
enum class ControlMethod { Moments, Projected };
std::string to_string(ControlMethod m);
ControlMethod control_method_from_string(const std::string& s);

struct ControlSolution {
    Mat targetT;
    ControlMethod method = ControlMethod::Moments;
    std::vector<MomentTarget> momentTargets;
    std::map<int, std::vector<MomentConstraint>> constraints;  // per Fourier index
    FourierProfileSet profiles;
    double max_moment_error = 0;
    double max_boundary_residual = 0;
    double u0 = 0;
    double gamma = 0;
};

// Fourier profiles of u1 realizing M(u1) ~ T through the moment targets.
ControlSolution synthesize_u1(const Mat& T, const ReductionBasis& basis,
                              ControlMethod method = ControlMethod::Moments, const MomentProfileOptions& opt = {});

// u1(x,y) = (1/2) u_0(y) + sum_n u_n(y) cos(n x)
double evaluate_field(const FourierProfileSet& f, const Grid& grid, double x, double y);

// g1 = -u1 / ((U - u0) + gamma u1), the exact inverse of
// u1 = -g1 (U - u0) / (1 + gamma g1).
class G1Field {
public:
    G1Field(FourierProfileSet u1, Grid grid, TemperatureProfile profile, double u0, double gamma);
    double u1(double x, double y) const;
    double g1(double x, double y) const;
    // u1 recomputed from g1 through the defining relation.
    double u1_from_g1(double x, double y) const;
    double u0() const { return u0_; }
    double gamma() const { return gamma_; }

private:
    FourierProfileSet u1_;
    Grid grid_;
    TemperatureProfile profile_;
    double u0_, gamma_;
};

// Smallest admissible reference temperature: 1.1 sup|U| + 1 over the grid.
double default_u0(const TemperatureProfile& profile, const Grid& grid);

G1Field g1_from_u1(const FourierProfileSet& u1, const Grid& grid, const TemperatureProfile& profile, double u0,
                   double gamma);

}  // namespace ob
