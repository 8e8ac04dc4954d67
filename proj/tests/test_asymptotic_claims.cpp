// Statements that hold as b -> infinity, checked at desk-scale b with the
// tolerances they are usually quoted with. Failures here are expected and
// listed in the README; each claim is paired with its trend in b where one
// exists, and the trend is what should hold.

#include <doctest.h>

#include <cmath>

#include "ob/control.hpp"
#include "oracles.hpp"

using namespace ob;

namespace {

TemperatureProfile designed(double b) {
    auto p = derive_scales(b, 0.98, 0.05);
    return make_profile(p, designed_polynomial({1, 7}, {0, 0}, p));
}

double leading_gap(double b, int k) {
    auto prof = designed(b);
    Grid g = make_grid(240, prof.params().h, 1.0);
    EigenMode m = leading_mode(k, assemble_pencil(k, prof, g), g);
    auto rr = find_root_z(k, prof);
    return std::abs(m.lambda - rr.lambda) / std::max(1.0, std::abs(m.lambda));
}

double rel_inf(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

// shape distance: both scaled to unit sup norm, sign aligned
double shape_gap(Vec a, Vec b) {
    Eigen::Index ia, ib;
    a.cwiseAbs().maxCoeff(&ia);
    b.cwiseAbs().maxCoeff(&ib);
    a /= a[ia];
    b /= b[ib];
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("leading closure matches the pencil to 1e-2 at b = 30") {
    for (int k : {1, 2, 7}) CHECK(leading_gap(30, k) <= 1e-2);
}

TEST_CASE("leading closure gap shrinks with b") {
    for (int k : {1, 2}) {
        const double g20 = leading_gap(20, k), g40 = leading_gap(40, k), g80 = leading_gap(80, k);
        CHECK(g40 < g20);
        CHECK(g80 < g40);
    }
}

TEST_CASE("offset calibration puts k = 1, 7 in the kernel at b = 30") {
    auto p = derive_scales(30, 0.98, 0.05);
    auto cal = calibrate_offsets({1, 7}, p);
    CHECK(cal.ok());
    auto prof = designed(30);
    Grid g = make_grid(240, p.h, 1.0);
    for (int k : {1, 7}) CHECK(std::abs(leading_mode(k, assemble_pencil(k, prof, g), g).lambda) < 1e-6);
}

TEST_CASE("required offset residual shrinks with b") {
    double prev = INFINITY;
    for (double b : {30.0, 100.0, 1000.0, 1e5}) {
        auto p = derive_scales(b, 0.98, 0.05);
        auto r = leading_offset_residual({1, 7}, p, {0, 0});
        const double m = std::max(std::abs(r[0]), std::abs(r[1]));
        CHECK(m < prev);
        prev = m;
    }
}

TEST_CASE("moment block determinant for the pair (7, 1) is 930") {
    Normalizers nz{Vec::Ones(2), Vec::Ones(2)};
    auto t = solve_moment_targets(Mat::Identity(2, 2), {1, 7}, nz);
    for (const auto& m : t)
        if (m.i != m.j) CHECK(m.det == doctest::Approx(930.0));
}

TEST_CASE("numeric kernel profiles approach the boundary-layer shapes") {
    double prev = INFINITY;
    for (double b : {30.0, 50.0}) {
        auto prof = designed(b);
        const auto& p = prof.params();
        Grid g = make_grid(240, p.h, 1.0);
        ReductionBasis nb = reduction_basis(kernel_basis({1, 7}, prof, g), p);
        ReductionBasis ab = asymptotic_basis({1, 7}, p, g);
        const double dpsi = rel_inf(nb.Psi[0], ab.Psi[0]);
        const double dzeta = shape_gap(zeta_profiles(1, 0, nb).zeta_tilde, zeta_profiles(1, 0, ab).zeta_tilde);
        if (b == 50.0) {
            CHECK(dpsi < 0.1);
            CHECK(dzeta < 0.15);
        }
        CHECK(dpsi < prev);
        prev = dpsi;
    }
}

TEST_CASE("resonant coefficients carry the sign of k_j - 5 k_l") {
    auto prof = designed(50);
    const auto& p = prof.params();
    auto ws = extended_set(2);
    Grid g = make_grid(240, p.h, 1.0);
    Tensor3 raw = compute_K_raw(reduction_basis(kernel_basis(ws.full, prof, g), p));
    const int i = ws.sumIndex.at({0, 1});
    const double a = raw(i, 0, 1), c = raw(i, 1, 0);  // (k_j, k_l) = (1, 7) and (7, 1)
    CHECK(a * c < 0);
    CHECK((a > 0) == (resonance_J(1, 7) > 0));
}

TEST_CASE("clamped perturbation: Psi''(0) equals the kernel integral 66/64") {
    auto o = oracle::clamped_bvp_k1();
    CHECK(std::abs(o.d2 - 66.0 / 64.0) < 1e-6);
}
