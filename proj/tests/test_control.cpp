#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ob/control.hpp"

using namespace ob;

namespace {

// Independent check of the wavenumber rules: odd, not a multiple of 5,
// above every pairwise sum of the predecessors, base/sums/differences distinct.
bool admissible(const std::vector<int>& b) {
    std::set<int> seen;
    for (size_t i = 0; i < b.size(); ++i) {
        if (b[i] % 2 == 0 || b[i] % 5 == 0) return false;
        for (size_t a = 0; a < i; ++a)
            for (size_t c = 0; c < i; ++c)
                if (b[i] <= b[a] + b[c]) return false;
    }
    std::vector<int> all(b.begin(), b.end());
    for (size_t a = 0; a < b.size(); ++a)
        for (size_t c = a; c < b.size(); ++c) {
            all.push_back(b[a] + b[c]);
            if (a != c) all.push_back(std::abs(b[a] - b[c]));
        }
    return std::set<int>(all.begin(), all.end()).size() == all.size();
}

Mat random_matrix(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> N;
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = N(rng);
    return m;
}

}  // namespace

TEST_CASE("sidon_set: small cases") {
    CHECK(sidon_set(1) == std::vector<int>{1});
    CHECK(sidon_set(2) == std::vector<int>{1, 7});
    CHECK(sidon_set(3) == std::vector<int>{1, 7, 17});
    CHECK_THROWS_AS(sidon_set(0), Error);
}

TEST_CASE("sidon_set: greedy minimality by brute force") {
    for (int p = 1; p <= 12; ++p) {
        auto b = sidon_set(p);
        REQUIRE(static_cast<int>(b.size()) == p);
        CHECK(admissible(b));
        CHECK(has_distinct_sums(b));
        CHECK(pair_map_injective(b));
        // no smaller last element keeps the prefix admissible
        std::vector<int> prefix(b.begin(), b.end() - 1);
        for (int c = prefix.empty() ? 1 : prefix.back() + 1; c < b.back(); ++c) {
            auto t = prefix;
            t.push_back(c);
            CHECK_FALSE(admissible(t));
        }
    }
}

TEST_CASE("extended_set") {
    auto ws = extended_set(2);
    CHECK(ws.full == std::vector<int>{1, 7, 2, 8, 14});
    CHECK(ws.N() == 5);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) CHECK(ws.full[ws.sumIndex.at({a, c})] == ws.base[a] + ws.base[c]);
    CHECK(extended_set(3).N() == 9);
    CHECK_THROWS_AS(extended_set(std::vector<int>{1, 2, 3}), Error);
    CHECK_THROWS_AS(extended_set(std::vector<int>{1, 2}), Error);
    CHECK_THROWS_AS(extended_set(std::vector<int>{}), Error);
    CHECK(pair_map_injective({1, 2, 3, 4}));
    CHECK(!pair_map_injective({1, 1, 2}));
}

TEST_CASE("verify_decomposition") {
    auto ws = extended_set(2);
    auto p = derive_scales(30, 0.98, 0.05);
    Grid g = make_grid(160, p.h, 1.0);
    Tensor3 K = compute_K(asymptotic_basis(ws.full, p, g));

    auto zero = verify_decomposition(K, ws, Mat::Zero(2, 2));
    CHECK(zero.chi.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.residual == 0.0);

    auto r = verify_decomposition(K, ws, random_matrix(2, 5));
    CHECK(r.residual < 1e-8);

    auto w5 = extended_set(std::vector<int>{1, 5});
    Tensor3 K5 = compute_K(asymptotic_basis(w5.full, p, g));
    CHECK_THROWS_AS(verify_decomposition(K5, w5, random_matrix(2, 6)), Error);
    CHECK_THROWS_AS(verify_decomposition(K, ws, Mat::Zero(3, 3)), Error);
}

TEST_CASE("solve_moment_targets") {
    const std::vector<int> k{1, 7};
    Normalizers nz{Vec::Ones(2), Vec::Ones(2)};
    for (const auto& t : solve_moment_targets(Mat::Zero(2, 2), k, nz)) {
        CHECK(t.X == 0.0);
        CHECK(t.Y == 0.0);
    }
    Mat T = random_matrix(2, 7);
    auto targets = solve_moment_targets(T, k, nz);
    bool seen = false;
    for (const auto& t : targets) {
        const int ki = k[t.i], kj = k[t.j];
        if (t.i == t.j) {
            CHECK(t.X == doctest::Approx(2 * T(t.i, t.i) / (3.0 * ki)));
            CHECK(t.Y == 0.0);
            continue;
        }
        seen = true;
        CHECK(t.n == std::abs(ki - kj));
        CHECK(t.m == ki + kj);
        CHECK(t.det == doctest::Approx(-852.0));
        CHECK((kj + 2.0 * ki) * t.X + 2.0 * ki * ki * t.Y == doctest::Approx(2 * T(t.i, t.j)));
        CHECK((ki + 2.0 * kj) * t.X + 2.0 * kj * kj * t.Y == doctest::Approx(2 * T(t.j, t.i)));
    }
    CHECK(seen);
}

TEST_CASE("moment_profile") {
    Grid g = make_grid(160, 34.0, 1.0);
    auto zero = moment_profile({{1, 0, 0.0}}, g);
    CHECK(zero.W.cwiseAbs().maxCoeff() == 0.0);

    auto mp = moment_profile({{1, 0, 1.0}}, g);
    CHECK(std::abs(moment(mp.W, 1, 0, g) - 1.0) < 1e-8);
    CHECK(mp.max_moment_error < 1e-8);
    CHECK(mp.boundary_residual < 1e-10);

    CHECK_THROWS_AS(moment_profile({{1, 0, 1.0}, {1, 0, 2.0}}, g), Error);
}

TEST_CASE("moment: quadrature against the Gamma function") {
    Grid g = make_grid(200, 34.0, 1.0);
    Vec one = Vec::Ones(g.n);
    for (int m : {1, 3, 8})
        for (int p : {0, 1, 2}) {
            const double exact = std::tgamma(3.0 + p) / std::pow(double(m), 3.0 + p);
            CHECK(moment(one, m, p, g) == doctest::Approx(exact).epsilon(1e-9));
        }
}

TEST_CASE("projected control reproduces the target") {
    auto p = derive_scales(30, 0.98, 0.05);
    Grid g = make_grid(200, p.h, 1.0);
    auto basis = asymptotic_basis({1, 7, 2, 8, 14}, p, g);
    Mat T = random_matrix(5, 11);
    auto cs = synthesize_u1(T, basis, ControlMethod::Projected);
    Mat M = compute_M(cs.profiles, basis);
    CHECK((M - T).cwiseAbs().maxCoeff() < 1e-6 * T.cwiseAbs().maxCoeff());
    CHECK(cs.max_boundary_residual < 1e-8);
}

TEST_CASE("moment route on the asymptotic basis") {
    auto p = derive_scales(30, 0.98, 0.05);
    Grid g = make_grid(240, p.h, 1.0);
    auto basis = asymptotic_basis({1, 7}, p, g);
    Mat T = random_matrix(2, 13);
    auto cs = synthesize_u1(T, basis, ControlMethod::Moments);
    CHECK(cs.max_moment_error < 1e-8);
    Mat M = compute_M(cs.profiles, basis);
    CHECK((M - T).cwiseAbs().maxCoeff() < 1e-4 * T.cwiseAbs().maxCoeff());
}

TEST_CASE("g1 inversion") {
    auto p = derive_scales(30, 0.98, 0.05);
    auto prof = make_profile(p, designed_polynomial({1, 7}, {0, 0}, p));
    Grid g = make_grid(120, p.h, 1.0);
    const double u0 = default_u0(prof, g);
    CHECK_THROWS_AS(g1_from_u1({}, g, prof, 0.0, 1e-3), Error);

    G1Field empty = g1_from_u1({}, g, prof, u0, 1e-3);
    CHECK(empty.g1(0.3, 0.5) == 0.0);

    FourierProfileSet u;
    Vec v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = g.y[i] * g.y[i] * std::exp(-g.y[i]);
    u.entries[6] = v;
    u.entries[0] = -0.5 * v;
    for (double gamma : {0.0, 1e-3}) {
        G1Field f = g1_from_u1(u, g, prof, u0, gamma);
        for (double x : {0.0, 0.7, 2.9})
            for (double y : {0.01, 0.4, 3.0, 20.0}) {
                const double g1 = f.g1(x, y), u1 = f.u1(x, y);
                CHECK(std::abs(f.u1_from_g1(x, y) - u1) < 1e-12 * std::max(1.0, std::abs(u1)));
                if (gamma == 0.0) CHECK(g1 == doctest::Approx(-u1 / (prof.U(y) - u0)));
            }
    }
}
