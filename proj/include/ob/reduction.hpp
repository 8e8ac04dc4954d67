#pragma once

#include <map>
#include <vector>

#include "ob/common.hpp"
#include "ob/profile.hpp"
#include "ob/spectral.hpp"

namespace ob {

// Fourier profiles of a field f(x,y) = (1/2) f_0(y) + sum_n f_n(y) cos(n x),
// sampled on a Grid. A missing n means f_n == 0.
struct FourierProfileSet {
    std::map<int, Vec> entries;

    const Vec* get(int n) const {
        auto it = entries.find(n);
        return it == entries.end() ? nullptr : &it->second;
    }
};

// Real mode data used by the quadratures: psi_j = Psi_j(y) sin(k_j x),
// theta_j = Theta_j(y) cos(k_j x), theta*_i = ThetaStar_i(y) cos(k_i x).
struct ReductionBasis {
    Grid grid;
    std::vector<int> k;
    std::vector<Vec> Psi, Theta, ThetaStar;
    Vec abar;    // ThetaStar_i'(0)
    Vec bbar;    // rho2 of Psi_j (1 after normalization)
    Vec betal;   // Theta_l'(0) / (k_l - b), the amplitude of exp(-by) - exp(-k y)
    double nu = 1;

    int size() const { return static_cast<int>(k.size()); }
};

struct AsymptoticProfiles {
    Vec Psi;        // y^2 exp(-k y)
    Vec Theta;      // exp(-b y) - exp(-k y)
    Vec ThetaStar;  // (k y^2 + y) exp(-k y)
};

AsymptoticProfiles asymptotic_profiles(int k, const ScaleParams& params, const Grid& grid);

// Basis of leading-order profiles with unit constants.
ReductionBasis asymptotic_basis(const std::vector<int>& kset, const ScaleParams& params, const Grid& grid);

// Leading pencil mode and its adjoint at every k, biorthogonalized.
ModeBasis kernel_basis(const std::vector<int>& kset, const TemperatureProfile& profile, const Grid& grid,
                       int threads = 1);

// Real parts of a biorthogonalized ModeBasis in the layout above.
ReductionBasis reduction_basis(const ModeBasis& basis, const ScaleParams& params);

struct ZetaPair {
    Vec zeta;        // k_j Psi_j ThetaStar_i' + k_i Psi_j' ThetaStar_i
    Vec zeta_tilde;  // k_j Psi_j ThetaStar_i' - k_i Psi_j' ThetaStar_i
};

ZetaPair zeta_profiles(int i, int j, const ReductionBasis& basis);

// M_ij = (1/2) int (zetatilde_ij u_{k_i+k_j} + zeta_ij u_{|k_i-k_j|}) dy
Mat compute_M(const FourierProfileSet& u1, const ReductionBasis& basis);

// Same pairing evaluated as a 2-D tensor quadrature of the bracket
// {psi_j, theta*_i} u1 over [0,2pi] x [0,h]; nx periodic trapezoid nodes.
Mat compute_M_2d(const FourierProfileSet& u1, const ReductionBasis& basis, int nx = 0);

// K_ijl = -M_ij(theta_l), not symmetrized.
Tensor3 compute_K_raw(const ReductionBasis& basis);
Tensor3 compute_K_2d(const ReductionBasis& basis, int nx = 0);
Tensor3 symmetrize(const Tensor3& K);
Tensor3 compute_K(const ReductionBasis& basis);

// f_i = <theta*_i, eta_1> = int ThetaStar_i eta_{k_i} dy
Vec compute_f(const FourierProfileSet& eta1, const ReductionBasis& basis);

// eta_1 supported on the basis cosines with compute_f(eta_1) = f.
FourierProfileSet eta_for_f(const Vec& f, const ReductionBasis& basis);

// Printed leading resonant coefficient J(kj, kl) = 2 (2 (kj + kl))^-3 (kj - 5 kl).
double resonance_J(int kj, int kl);

// k_i = k_j + k_l or k_i = |k_j - k_l|
bool is_resonant(int ki, int kj, int kl);

struct SparsityReport {
    double max_resonant = 0;
    double max_nonresonant = 0;
    double ratio() const { return max_resonant > 0 ? max_nonresonant / max_resonant : 0.0; }
};

SparsityReport sparsity_report(const Tensor3& K, const std::vector<int>& kset);

struct ReducedSystem {
    int N = 0;
    Tensor3 K;
    Mat M;
    Vec f;
    std::vector<int> kset;
    double R0 = 1;
};

}  // namespace ob
