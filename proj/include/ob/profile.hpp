#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ob/common.hpp"

namespace ob {

// Which amplitude constant C_U the profile uses. `Literal` reproduces the
// printed closed form 3 C_U = -8 (1 - 1/nu) / (1 + r); `Consistent` uses
// C_U = 4 (1 - 1/nu), the value for which the clamped/Robin pencil has its
// boundary-layer mode at z = 1 (see README, "Profile amplitude").
enum class CuConvention { Consistent, Literal };

struct ScaleParams {
    double b = 30;
    double s0 = 0.98;
    double s2 = 0.05;
    double r = 0;
    double beta = 0;
    double beta1 = 0;
    double mu = 0;
    double h = 0;
    double nu = 0;
    double C_U = 0;
    double Cbar_U = 0;
    double gamma = 1e-3;
    double kappa = 0;
    CuConvention convention = CuConvention::Consistent;

    // Leading constant of the scalar equation, C_U / (1 - 1/nu); equals 4
    // for the consistent convention.
    double lambda_main() const { return C_U / (1.0 - 1.0 / nu); }
};

// nu_override <= 0 means nu = b^10.
ScaleParams derive_scales(double b, double s0, double s2,
                          CuConvention conv = CuConvention::Consistent,
                          double nu_override = 0.0);

struct DesignPolynomial {
    int degree = -1;                // -1 encodes P == 0
    std::vector<double> coeffs;     // rbar_0..rbar_degree
    std::vector<double> offsets;    // d_1..d_N
    std::vector<double> targetQ;    // q_0..q_degree, Z_N(p) = sum q_n p^n
};

// a_n = 3 (3(n+4)/2 + (n+4)(n+5)/4)^-1
double tilde_coefficient(int n);

// rbar_n from q_n, exact (the identity in k is diagonal in powers of 1/k).
DesignPolynomial design_polynomial(const std::vector<double>& targetQ, const ScaleParams& params);

// Coefficients of Z(p,d) = -(prod_j (p - 1/(k_j + d_j)))^2 in powers of p.
std::vector<double> z_coefficients(const std::vector<int>& kset, const std::vector<double>& d);

double poly_eval(const std::vector<double>& c, double x);

// Ztilde(p) = sum a_n q_n p^n
double ztilde_eval(const std::vector<double>& q, double p);

// Leading-order perturbation Y_k = mu k^-6 (Z(1/k) + k/(beta+k) Ztilde(1/k)).
double y_leading(int k, const ScaleParams& params, const std::vector<double>& q);

class TemperatureProfile {
public:
    TemperatureProfile() = default;
    TemperatureProfile(ScaleParams params, DesignPolynomial poly);

    double U(double y) const;
    double Uy(double y) const;
    Vec Uy(const Vec& y) const;

    const ScaleParams& params() const { return params_; }
    const DesignPolynomial& poly() const { return poly_; }
    // log|beta1| survives even when beta1 itself underflows to 0.
    double log_abs_beta1() const { return log_abs_beta1_; }
    void set_beta1(double beta1, double log_abs) {
        params_.beta1 = beta1;
        log_abs_beta1_ = log_abs;
    }

private:
    ScaleParams params_;
    DesignPolynomial poly_;
    double log_abs_beta1_ = -std::numeric_limits<double>::infinity();
};

TemperatureProfile build_profile(const ScaleParams& params, const DesignPolynomial& poly);

struct Beta1 {
    double value = 0;
    double log_abs = 0;  // natural log of |beta1|
};

// U_y(h)/U(h), evaluated in extended precision so b^(-10b) does not vanish
// before the division.
Beta1 compute_beta1(const ScaleParams& params, const DesignPolynomial& poly);

// Builds the profile and fixes beta1 so the upper Robin identity holds.
TemperatureProfile make_profile(const ScaleParams& params, const DesignPolynomial& poly);

enum class CalibrationStatus { Converged, NotConverged, OutOfRegime };
std::string to_string(CalibrationStatus s);

struct CalibrationResult {
    std::vector<double> d;
    std::vector<double> residual;
    CalibrationStatus status = CalibrationStatus::NotConverged;
    int iterations = 0;
    std::string message;

    bool ok() const { return status == CalibrationStatus::Converged; }
};

using OffsetResidual = std::function<std::vector<double>(const std::vector<double>& d)>;

struct CalibrationOptions {
    int max_iter = 80;
    double tol = 1e-12;
    double fd_step = 1e-7;
};

// Damped Newton from d = 0 on an arbitrary residual map.
CalibrationResult solve_offsets(const OffsetResidual& residual, int n,
                                const CalibrationOptions& opt = {});

// Scalar residual at z = 1 with the leading closure:
// 4 - Lambda/(1+a) - Y_k(d), a = k/beta.
std::vector<double> leading_offset_residual(const std::vector<int>& kset, const ScaleParams& params,
                                            const std::vector<double>& d);

CalibrationResult calibrate_offsets(const std::vector<int>& kset, const ScaleParams& params,
                                    const CalibrationOptions& opt = {});

// Design polynomial for the offsets d: Z(p,d) -> rbar.
DesignPolynomial designed_polynomial(const std::vector<int>& kset, const std::vector<double>& d,
                                     const ScaleParams& params);

}  // namespace ob
