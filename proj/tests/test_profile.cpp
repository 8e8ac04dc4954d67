#include <doctest.h>

#include <cmath>

#include "ob/profile.hpp"
#include "ob/spectral.hpp"
#include "oracles.hpp"

using namespace ob;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

DesignPolynomial zero_poly() { return DesignPolynomial{}; }

}  // namespace

TEST_CASE("derive_scales: direct evaluations") {
    auto p = derive_scales(10, 0.9, 0.05);
    CHECK(p.r == doctest::Approx(0.125893).epsilon(1e-5));
    CHECK(p.beta == doctest::Approx(1.25893).epsilon(1e-5));
    CHECK(p.mu == doctest::Approx(0.891251).epsilon(1e-6));
    CHECK(p.beta == p.r * p.b);
    CHECK(p.h == doctest::Approx(10 * std::log(10.0)));
    CHECK(p.nu == std::pow(10.0, 10));
    CHECK(p.kappa == p.nu);
}

TEST_CASE("derive_scales: C_U conventions") {
    auto lit = derive_scales(1e6, 0.99, 0.05, CuConvention::Literal);
    CHECK(std::abs(lit.C_U + 8.0 / 3.0) < 1e-5);
    CHECK(3 * lit.C_U == doctest::Approx(-8 * (1 - 1 / lit.nu) / (1 + lit.r)));
    auto con = derive_scales(30, 0.98, 0.05);
    CHECK(con.C_U == doctest::Approx(4 * (1 - 1 / con.nu)));
    CHECK(con.lambda_main() == doctest::Approx(4.0));
    for (const auto& p : {lit, con}) CHECK(rel(p.Cbar_U, p.C_U * p.r * std::pow(p.b, 4) / p.beta) < 1e-14);
}

TEST_CASE("derive_scales: input validation") {
    CHECK_THROWS_AS(derive_scales(1.0, 0.5, 0.05), Error);
    CHECK_THROWS_AS(derive_scales(30, 1.5, 0.05), Error);
    CHECK_THROWS_AS(derive_scales(30, 0.5, 0.0), Error);
    CHECK_THROWS_AS(derive_scales(30, 0.5, 0.05, CuConvention::Consistent, 1.0), Error);
}

TEST_CASE("build_profile: zero polynomial values") {
    auto p = derive_scales(30, 0.98, 0.05);
    auto prof = make_profile(p, zero_poly());
    CHECK(rel(prof.U(0), p.Cbar_U) < 1e-14);
    CHECK(rel(prof.Uy(0), p.C_U * p.r * std::pow(p.b, 4)) < 1e-14);
    CHECK(rel(prof.Uy(0), p.beta * prof.U(0)) < 1e-12);
    CHECK(rel(prof.U(p.h), p.Cbar_U + p.C_U * p.r * std::pow(p.b, 3)) < 1e-14);
}

TEST_CASE("build_profile: analytic U_y integrates to U") {
    auto p = derive_scales(30, 0.95, 0.05);
    DesignPolynomial P1;
    P1.degree = 0;
    P1.coeffs = {1.0};
    auto prof = make_profile(p, P1);
    const double expect = p.C_U * p.r * std::pow(p.b, 4) * std::exp(-30.0) + p.mu * 1.0;
    CHECK(rel(prof.Uy(1.0), expect) < 1e-12);
    // differencing U loses digits to cancellation, so integrate U_y instead (composite 5-point Gauss)
    const double gx[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    const double gw[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                          0.2369268850561891};
    for (double y : {0.05, 0.3, 1.0, 2.5, 7.0}) {
        const double a = 0.5 * y, c = 1.5 * y;
        const int panels = 400;
        const double w = (c - a) / panels;
        double I = 0, Iabs = 0;
        for (int q = 0; q < panels; ++q)
            for (int g = 0; g < 5; ++g) {
                const double v = prof.Uy(a + w * (q + 0.5 + 0.5 * gx[g]));
                I += 0.5 * w * gw[g] * v;
                Iabs += 0.5 * w * gw[g] * std::abs(v);
            }
        const double scale = std::abs(prof.U(a)) + std::abs(prof.U(c)) + Iabs;
        CHECK(std::abs(prof.U(c) - prof.U(a) - I) < 1e-12 * scale);
    }
}

TEST_CASE("compute_beta1") {
    auto p = derive_scales(30, 0.98, 0.05);
    Beta1 b0 = compute_beta1(p, zero_poly());
    // direct substitution, in logs because exp(-b h) underflows
    const double lognum = std::log(p.C_U * p.r * std::pow(p.b, 4)) - p.b * p.h;
    const double den = p.Cbar_U + p.C_U * p.r * std::pow(p.b, 3);
    CHECK(std::abs(b0.log_abs - (lognum - std::log(den))) < 1e-9);
    CHECK(b0.log_abs < std::log(std::pow(p.b, -10) * p.beta));
    CHECK(b0.value < p.beta);

    auto poly = designed_polynomial({1, 7}, {0, 0}, p);
    auto prof = make_profile(p, poly);
    CHECK(prof.params().beta1 < p.beta);
    CHECK(std::abs(prof.Uy(p.h) - prof.params().beta1 * prof.U(p.h)) <= 1e-12 * std::abs(prof.Uy(p.h)));
    CHECK(std::abs(prof.Uy(0) - p.beta * prof.U(0)) <= 1e-12 * std::abs(p.beta * prof.U(0)));
}

TEST_CASE("tilde coefficients") {
    CHECK(tilde_coefficient(0) == doctest::Approx(3.0 / 11.0).epsilon(1e-15));
    CHECK(tilde_coefficient(1) == doctest::Approx(0.2).epsilon(1e-15));
    for (int n = 0; n < 10; ++n) CHECK(tilde_coefficient(n) > 0);
}

TEST_CASE("design_polynomial re-expands to k^-6 Z(1/k)") {
    auto p = derive_scales(30, 0.98, 0.05);
    std::vector<double> q{0.3, -1.2, 0.7, 2.0, -0.4};
    auto dp = design_polynomial(q, p);
    REQUIRE(dp.coeffs.size() == q.size());
    for (int k = 1; k <= 20; ++k) {
        long double lhs = 0, rhs = 0;
        for (size_t l = 0; l < q.size(); ++l) lhs += q[l] * std::pow((long double)k, -(long double)l);
        lhs *= std::pow((long double)k, -6.0L);
        for (size_t n = 0; n < dp.coeffs.size(); ++n) {
            const long double f4 = std::tgamma((long double)n + 5), f5 = std::tgamma((long double)n + 6);
            rhs += dp.coeffs[n] * std::pow(2.0L * k, -(long double)n - 6) * (1.5L * f4 + 0.25L * f5);
        }
        CHECK(std::abs((double)((lhs - rhs) / lhs)) < 1e-12);
    }
}

// The printed identity is the kernel integral int V rho; the oracle shows it
// equals Psi'''(0) of the clamped problem. The claim that it equals Psi''(0)
// is kept in test_asymptotic_claims.cpp.
TEST_CASE("design_polynomial: r0 = 1 against the boundary-value oracle") {
    auto p = derive_scales(30, 0.98, 0.05);
    auto dp = design_polynomial({66.0 / 64.0}, p);
    CHECK(dp.coeffs[0] == doctest::Approx(1.0).epsilon(1e-14));

    Grid g = make_grid(200, 40.0, 2.0);
    Vec v(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double y = g.y[i];
        v[i] = std::pow(y, 3) * std::exp(-2 * y) * (0.75 * y + 0.25 * y * y);
    }
    CHECK(std::abs(g.integrate(v) - 66.0 / 64.0) < 1e-12);

    auto o = oracle::clamped_bvp_k1();
    CHECK(std::abs(o.d3 - 66.0 / 64.0) < 1e-6);
    CHECK(std::abs(o.d2 + 42.0 / 64.0) < 1e-6);
}

TEST_CASE("z_coefficients vanish at the unshifted wavenumbers") {
    auto q = z_coefficients({1, 7}, {0, 0});
    for (int k : {1, 7}) CHECK(std::abs(poly_eval(q, 1.0 / k)) < 1e-15);
    CHECK(poly_eval(q, 0.5) < 0);
}

TEST_CASE("offset Jacobian is invertible away from d = 0") {
    const std::vector<int> ks{1, 7};
    auto Zat = [&](const std::vector<double>& d, int j) { return poly_eval(z_coefficients(ks, d), 1.0 / ks[j]); };
    const std::vector<double> d0{0.01, -0.02};
    Mat J(2, 2);
    const double e = 1e-7;
    for (int l = 0; l < 2; ++l) {
        auto dp = d0, dm = d0;
        dp[l] += e;
        dm[l] -= e;
        for (int j = 0; j < 2; ++j) J(j, l) = (Zat(dp, j) - Zat(dm, j)) / (2 * e);
    }
    CHECK(std::abs(J.determinant()) > 1e-8);
}

TEST_CASE("solve_offsets: fixed point on a solvable map") {
    OffsetResidual f = [](const std::vector<double>& d) {
        return std::vector<double>{d[0] + 0.5 * d[1] * d[1] - 0.02, std::sin(d[1]) - 0.3 * d[0] + 0.01};
    };
    auto r = solve_offsets(f, 2);
    REQUIRE(r.ok());
    auto res = f(r.d);
    for (double v : res) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("solve_offsets: out-of-regime and infeasible signals") {
    OffsetResidual far = [](const std::vector<double>& d) { return std::vector<double>{d[0] - 0.5}; };
    CHECK(solve_offsets(far, 1).status == CalibrationStatus::OutOfRegime);
    OffsetResidual none = [](const std::vector<double>& d) { return std::vector<double>{d[0] * d[0] + 1.0}; };
    auto r = solve_offsets(none, 1);
    CHECK(r.status == CalibrationStatus::NotConverged);
    CHECK(!r.message.empty());
}
