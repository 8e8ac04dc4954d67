#include "ob/profile.hpp"

#include <cmath>

namespace ob {

ScaleParams derive_scales(double b, double s0, double s2, CuConvention conv, double nu_override) {
    if (!(b > 1.0)) throw Error("profile", "b must exceed 1");
    if (!(s0 > 0.0 && s0 < 1.0)) throw Error("profile", "s0 must lie in (0,1)");
    if (!(s2 > 0.0 && s2 < 1.0)) throw Error("profile", "s2 must lie in (0,1)");

    ScaleParams p;
    p.b = b;
    p.s0 = s0;
    p.s2 = s2;
    p.convention = conv;
    p.r = std::pow(b, -s0);
    p.beta = p.r * b;
    p.mu = std::pow(b, -s2);
    p.h = 10.0 * std::log(b);
    p.nu = std::pow(b, 10.0);
    if (nu_override > 0) {
        if (nu_override < p.nu) throw Error("profile", "nu must be at least b^10");
        p.nu = nu_override;
    }
    p.kappa = p.nu;
    if (conv == CuConvention::Literal)
        p.C_U = -8.0 * (1.0 - 1.0 / p.nu) / (3.0 * (1.0 + p.r));
    else
        p.C_U = 4.0 * (1.0 - 1.0 / p.nu);
    p.Cbar_U = p.C_U * p.r * std::pow(b, 4) / p.beta;
    p.beta1 = 0.0;
    return p;
}

double tilde_coefficient(int n) {
    double m = n;
    return 3.0 / (1.5 * (m + 4.0) + 0.25 * (m + 4.0) * (m + 5.0));
}

namespace {

long double factorial(int n) {
    long double f = 1.0L;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

DesignPolynomial design_polynomial(const std::vector<double>& targetQ, const ScaleParams&) {
    DesignPolynomial poly;
    poly.targetQ = targetQ;
    poly.degree = static_cast<int>(targetQ.size()) - 1;
    poly.coeffs.resize(targetQ.size());
    for (size_t n = 0; n < targetQ.size(); ++n) {
        if (!std::isfinite(targetQ[n])) throw Error("profile", "non-finite target coefficient");
        int m = static_cast<int>(n);
        long double c = 1.5L * factorial(m + 4) + 0.25L * factorial(m + 5);
        long double two = std::pow(2.0L, m + 6);
        poly.coeffs[n] = static_cast<double>(targetQ[n] * two / c);
    }
    return poly;
}

std::vector<double> z_coefficients(const std::vector<int>& kset, const std::vector<double>& d) {
    std::vector<double> c{1.0};
    for (size_t j = 0; j < kset.size(); ++j) {
        double root = 1.0 / (kset[j] + d[j]);
        std::vector<double> next(c.size() + 1, 0.0);
        for (size_t n = 0; n < c.size(); ++n) {
            next[n + 1] += c[n];
            next[n] -= root * c[n];
        }
        c = std::move(next);
    }
    std::vector<double> sq(2 * c.size() - 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i)
        for (size_t j = 0; j < c.size(); ++j) sq[i + j] -= c[i] * c[j];
    return sq;
}

double poly_eval(const std::vector<double>& c, double x) {
    double v = 0;
    for (size_t n = c.size(); n-- > 0;) v = v * x + c[n];
    return v;
}

double ztilde_eval(const std::vector<double>& q, double p) {
    double v = 0;
    for (size_t n = q.size(); n-- > 0;) v = v * p + tilde_coefficient(static_cast<int>(n)) * q[n];
    return v;
}

double y_leading(int k, const ScaleParams& params, const std::vector<double>& q) {
    double p = 1.0 / k;
    double k6 = std::pow(static_cast<double>(k), -6.0);
    return params.mu * k6 * (poly_eval(q, p) + k / (params.beta + k) * ztilde_eval(q, p));
}

TemperatureProfile::TemperatureProfile(ScaleParams params, DesignPolynomial poly)
    : params_(params), poly_(std::move(poly)) {}

double TemperatureProfile::U(double y) const {
    const auto& p = params_;
    double v = p.Cbar_U - p.C_U * p.r * p.b * p.b * p.b * std::expm1(-p.b * y);
    double s = 0;
    for (int n = poly_.degree; n >= 0; --n) s = s * y + poly_.coeffs[n] / (n + 2);
    return v + p.mu * s * y * y;
}

double TemperatureProfile::Uy(double y) const {
    const auto& p = params_;
    double v = p.C_U * p.r * std::pow(p.b, 4) * std::exp(-p.b * y);
    double s = 0;
    for (int n = poly_.degree; n >= 0; --n) s = s * y + poly_.coeffs[n];
    return v + p.mu * y * s;
}

Vec TemperatureProfile::Uy(const Vec& y) const {
    Vec out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = Uy(y[i]);
    return out;
}

TemperatureProfile build_profile(const ScaleParams& params, const DesignPolynomial& poly) {
    for (double c : poly.coeffs)
        if (!std::isfinite(c)) throw Error("profile", "non-finite polynomial coefficient");
    if (static_cast<int>(poly.coeffs.size()) != poly.degree + 1)
        throw Error("profile", "coefficient count does not match degree");
    return TemperatureProfile(params, poly);
}

Beta1 compute_beta1(const ScaleParams& params, const DesignPolynomial& poly) {
    TemperatureProfile prof(params, poly);
    const long double h = params.h;
    long double Uh = prof.U(params.h);
    if (std::fabs(static_cast<double>(Uh)) < 1e-300)
        throw Error("profile", "degenerate profile: U(h) vanishes");

    long double s = 0;
    for (int n = poly.degree; n >= 0; --n) s = s * h + poly.coeffs[n];
    long double polypart = static_cast<long double>(params.mu) * h * s;

    long double amp = static_cast<long double>(params.C_U) * params.r * std::pow((long double)params.b, 4);
    long double log_exp = std::log(std::fabs(amp)) - static_cast<long double>(params.b) * h;

    Beta1 out;
    if (polypart == 0.0L) {
        long double logb = log_exp - std::log(std::fabs(Uh));
        double sign = ((amp > 0) == (Uh > 0)) ? 1.0 : -1.0;
        out.log_abs = static_cast<double>(logb);
        out.value = sign * static_cast<double>(std::exp(logb));
    } else {
        long double num = polypart + (amp > 0 ? 1 : -1) * std::exp(log_exp);
        long double v = num / Uh;
        out.value = static_cast<double>(v);
        out.log_abs = static_cast<double>(std::log(std::fabs(v)));
    }
    return out;
}

TemperatureProfile make_profile(const ScaleParams& params, const DesignPolynomial& poly) {
    TemperatureProfile prof = build_profile(params, poly);
    Beta1 b1 = compute_beta1(params, poly);
    prof.set_beta1(b1.value, b1.log_abs);
    return prof;
}

std::string to_string(CalibrationStatus s) {
    switch (s) {
        case CalibrationStatus::Converged: return "converged";
        case CalibrationStatus::NotConverged: return "infeasible";
        case CalibrationStatus::OutOfRegime: return "out_of_regime";
    }
    return "unknown";
}

CalibrationResult solve_offsets(const OffsetResidual& residual, int n, const CalibrationOptions& opt) {
    using Eigen::Map;
    CalibrationResult res;
    std::vector<double> d(n, 0.0);
    auto norm = [](const std::vector<double>& r) {
        double m = 0;
        for (double v : r) m = std::max(m, std::abs(v));
        return m;
    };
    std::vector<double> r = residual(d);
    double lm = 1e-6;
    int it = 0;
    for (; it < opt.max_iter && norm(r) >= opt.tol; ++it) {
        Mat J(n, n);
        for (int l = 0; l < n; ++l) {
            auto dp = d, dm = d;
            dp[l] += opt.fd_step;
            dm[l] -= opt.fd_step;
            auto rp = residual(dp), rm = residual(dm);
            for (int j = 0; j < n; ++j) J(j, l) = (rp[j] - rm[j]) / (2 * opt.fd_step);
        }
        Vec rv = Map<const Vec>(r.data(), n);
        Mat JtJ = J.transpose() * J;
        Vec g = J.transpose() * rv;
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            Mat Ad = JtJ;
            Ad.diagonal().array() += lm * (1.0 + JtJ.diagonal().array());
            Vec step = -Ad.ldlt().solve(g);
            // halve the step while the residual grows, then raise damping
            for (double damp = 1.0; damp > 1.0 / 64; damp *= 0.5) {
                std::vector<double> trial(n);
                for (int j = 0; j < n; ++j) trial[j] = d[j] + damp * step[j];
                auto rt = residual(trial);
                if (norm(rt) < norm(r)) {
                    d = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            if (accepted)
                lm = std::max(lm * 0.3, 1e-15);
            else
                lm *= 10;
        }
        if (!accepted) break;
    }
    res.d = d;
    res.residual = r;
    res.iterations = it;
    if (norm(r) < opt.tol) {
        res.status = CalibrationStatus::Converged;
        for (double v : d)
            if (std::abs(v) >= 0.1) {
                res.status = CalibrationStatus::OutOfRegime;
                res.message = "offset |d_j| >= 1/10";
            }
    } else {
        res.status = CalibrationStatus::NotConverged;
        res.message = "no offsets reach the target residual; max |residual| = " + std::to_string(norm(r));
    }
    return res;
}

std::vector<double> leading_offset_residual(const std::vector<int>& kset, const ScaleParams& params,
                                            const std::vector<double>& d) {
    auto q = z_coefficients(kset, d);
    std::vector<double> out(kset.size());
    for (size_t j = 0; j < kset.size(); ++j) {
        double a = kset[j] / params.beta;
        out[j] = 4.0 - params.lambda_main() / (1.0 + a) - y_leading(kset[j], params, q);
    }
    return out;
}

CalibrationResult calibrate_offsets(const std::vector<int>& kset, const ScaleParams& params,
                                    const CalibrationOptions& opt) {
    if (kset.empty()) throw Error("profile", "empty wavenumber set");
    auto f = [&](const std::vector<double>& d) { return leading_offset_residual(kset, params, d); };
    return solve_offsets(f, static_cast<int>(kset.size()), opt);
}

DesignPolynomial designed_polynomial(const std::vector<int>& kset, const std::vector<double>& d,
                                     const ScaleParams& params) {
    auto poly = design_polynomial(z_coefficients(kset, d), params);
    poly.offsets = d;
    return poly;
}

}  // namespace ob
