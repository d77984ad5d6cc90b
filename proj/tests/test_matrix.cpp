#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lyapkit/matrix.hpp"

using namespace lyapkit;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m(0, 0) = a; m(0, 1) = b;
    m(1, 0) = c; m(1, 1) = d;
    return m;
}

Matrix rotation2(double theta) {
    return mat2(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta));
}

Matrix random_matrix(std::mt19937& rng, int k, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = dist(rng);
    return m;
}

}

TEST_CASE("singular values of a symmetric positive matrix equal its eigenvalues") {
    // [[2,1],[1,1]] has spectrum (3 +- sqrt(5))/2.
    Matrix m = mat2(2, 1, 1, 1);
    auto sv = singular_values(m);
    REQUIRE(sv.size() == 2);
    CHECK(sv[0] == Catch::Approx(2.618033988749895).epsilon(1e-12));
    CHECK(sv[1] == Catch::Approx(0.3819660112501051).epsilon(1e-12));
    CHECK(op_norm(m) == Catch::Approx(2.618033988749895).epsilon(1e-12));
}

TEST_CASE("singular values of a rotation are all one") {
    auto sv = singular_values(rotation2(1.0));
    CHECK(sv[0] == Catch::Approx(1.0).margin(1e-13));
    CHECK(sv[1] == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("singular values are sorted descending on random matrices") {
    std::mt19937 rng(12345);
    for (int rep = 0; rep < 50; ++rep) {
        int k = 2 + int(rng() % 5);
        Matrix m = random_matrix(rng, k);
        auto sv = singular_values(m);
        REQUIRE(int(sv.size()) == k);
        for (int i = 0; i + 1 < k; ++i) CHECK(sv[i] >= sv[i + 1]);
        for (double s : sv) CHECK(s >= 0.0);
    }
}

TEST_CASE("op_norm matches the largest singular value and is submultiplicative") {
    std::mt19937 rng(777);
    for (int rep = 0; rep < 30; ++rep) {
        Matrix a = random_matrix(rng, 3), b = random_matrix(rng, 3);
        double na = op_norm(a), nb = op_norm(b), nab = op_norm(a * b);
        CHECK(nab <= na * nb * (1 + 1e-12));
        CHECK(na == Catch::Approx(singular_values(a)[0]).epsilon(1e-12));
    }
}

TEST_CASE("inverse and determinant on a frozen case") {
    Matrix m = mat2(2, 1, 1, 1);
    CHECK(determinant(m) == Catch::Approx(1.0).epsilon(1e-13));
    Matrix inv = inverse(m);
    CHECK(inv(0, 0) == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(inv(0, 1) == Catch::Approx(-1.0).epsilon(1e-13));
    CHECK(inv(1, 0) == Catch::Approx(-1.0).epsilon(1e-13));
    CHECK(inv(1, 1) == Catch::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("inverse of singular matrix raises") {
    Matrix m = mat2(1, 2, 2, 4);
    CHECK_THROWS_AS(inverse(m), numeric_error);
}

TEST_CASE("singular values of the inverse are the reversed reciprocals") {
    std::mt19937 rng(4242);
    for (int rep = 0; rep < 25; ++rep) {
        int k = 2 + int(rng() % 4);
        Matrix m = random_matrix(rng, k);
        if (std::abs(determinant(m)) < 1e-3) continue;
        auto sv = singular_values(m);
        auto si = singular_values(inverse(m));
        for (int i = 0; i < k; ++i)
            CHECK(si[i] == Catch::Approx(1.0 / sv[k - 1 - i]).epsilon(1e-8));
    }
}

TEST_CASE("exterior power of a 2x2 at level 2 is the determinant") {
    Matrix m = mat2(2, 1, 1, 1);
    Matrix w = exterior_power(m, 2);
    REQUIRE(w.rows == 1);
    REQUIRE(w.cols == 1);
    CHECK(w(0, 0) == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exterior power of a 3x3 at level 2, frozen minors") {
    Matrix m(3, 3);
    m(0, 0) = 1; m(0, 1) = 2; m(0, 2) = 0;
    m(1, 0) = 0; m(1, 1) = 1; m(1, 2) = 3;
    m(2, 0) = 4; m(2, 1) = 0; m(2, 2) = 1;
    Matrix w = exterior_power(m, 2);
    REQUIRE(w.rows == 3);
    double expect[9] = {1, 3, 6, -8, 1, 2, -4, -12, 1};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(w(i, j) == Catch::Approx(expect[3 * i + j]).margin(1e-12));
}

TEST_CASE("exterior powers are functorial and their norm is a singular value product") {
    std::mt19937 rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        int k = 2 + int(rng() % 4);  // up to 5
        Matrix a = random_matrix(rng, k), b = random_matrix(rng, k);
        auto sv = singular_values(a);
        for (int l = 1; l <= k; ++l) {
            Matrix wa = exterior_power(a, l);
            Matrix wb = exterior_power(b, l);
            Matrix wab = exterior_power(a * b, l);
            Matrix prod = wa * wb;
            double scale = op_norm(wab) + 1.0;
            for (int i = 0; i < wab.rows; ++i)
                for (int j = 0; j < wab.cols; ++j)
                    CHECK(wab(i, j) == Catch::Approx(prod(i, j)).margin(1e-9 * scale));
            double sprod = 1.0;
            for (int i = 0; i < l; ++i) sprod *= sv[i];
            CHECK(op_norm(wa) == Catch::Approx(sprod).epsilon(1e-9));
        }
    }
}

TEST_CASE("eigen moduli of a symmetric matrix, frozen") {
    auto em = eigen_moduli(mat2(2, 1, 1, 1));
    REQUIRE(em.moduli.size() == 2);
    CHECK(em.moduli[0] == Catch::Approx(2.618033988749895).epsilon(1e-10));
    CHECK(em.moduli[1] == Catch::Approx(0.3819660112501051).epsilon(1e-10));
    CHECK(em.simple[0]);
    CHECK(em.simple[1]);
}

TEST_CASE("eigen moduli of a companion matrix with spectrum 1,2,3") {
    // Companion of x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3).
    Matrix c(3, 3);
    c(0, 0) = 6; c(0, 1) = -11; c(0, 2) = 6;
    c(1, 0) = 1; c(1, 1) = 0;  c(1, 2) = 0;
    c(2, 0) = 0; c(2, 1) = 1;  c(2, 2) = 0;
    auto em = eigen_moduli(c);
    CHECK(em.moduli[0] == Catch::Approx(3.0).epsilon(1e-9));
    CHECK(em.moduli[1] == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(em.moduli[2] == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(em.simple[0]);
}

TEST_CASE("a complex conjugate pair yields two equal moduli flagged non-simple") {
    auto em = eigen_moduli(rotation2(1.0));
    CHECK(em.moduli[0] == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(em.moduli[1] == Catch::Approx(1.0).epsilon(1e-10));
    CHECK_FALSE(em.simple[0]);
    CHECK_FALSE(em.simple[1]);
}

TEST_CASE("a defective repeated eigenvalue is flagged non-simple") {
    auto em = eigen_moduli(mat2(2, 1, 0, 2));
    CHECK(em.moduli[0] == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(em.moduli[1] == Catch::Approx(2.0).epsilon(1e-8));
    CHECK_FALSE(em.simple[0]);
}

TEST_CASE("eigen moduli agree with random diagonal spectra under orthogonal similarity") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dist(0.2, 5.0);
    for (int rep = 0; rep < 25; ++rep) {
        int k = 2 + int(rng() % 4);
        std::vector<double> spec(k);
        for (auto& s : spec) s = dist(rng);
        // well separated spectra only
        std::sort(spec.begin(), spec.end(), std::greater<>());
        bool ok = true;
        for (int i = 0; i + 1 < k; ++i)
            if (spec[i] - spec[i + 1] < 0.2) ok = false;
        if (!ok) continue;
        Matrix d = Matrix::zero(k, k);
        for (int i = 0; i < k; ++i) d(i, i) = spec[i];
        // orthogonalize a random matrix by repeated Gram-Schmidt through QR of M M^T trick:
        // use rotations built from random Givens angles instead, always orthogonal.
        Matrix q = Matrix::identity(k);
        std::uniform_real_distribution<double> ang(0.0, 3.14);
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                double th = ang(rng);
                Matrix g = Matrix::identity(k);
                g(i, i) = std::cos(th); g(j, j) = std::cos(th);
                g(i, j) = -std::sin(th); g(j, i) = std::sin(th);
                q = q * g;
            }
        Matrix m = q * d * q.transpose();
        auto em = eigen_moduli(m);
        for (int i = 0; i < k; ++i)
            CHECK(em.moduli[i] == Catch::Approx(spec[i]).epsilon(1e-8));
    }
}

TEST_CASE("real eigenvector extraction has small residual") {
    Matrix m = mat2(2, 1, 1, 1);
    double lam = 2.618033988749895;
    auto v = real_eigenvector(m, lam);
    REQUIRE(v.size() == 2);
    double r0 = m(0, 0) * v[0] + m(0, 1) * v[1] - lam * v[0];
    double r1 = m(1, 0) * v[0] + m(1, 1) * v[1] - lam * v[1];
    CHECK(std::abs(r0) < 1e-9);
    CHECK(std::abs(r1) < 1e-9);
    double norm = std::hypot(v[0], v[1]);
    CHECK(norm == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scaled product tracks twenty doublings exactly") {
    // Plain doubles overflow past 1e6 here in spirit; the scaled form never does.
    Matrix a = mat2(2, 0, 0, 0.5);
    ScaledProduct p = ScaledProduct::identity(2);
    for (int i = 0; i < 20; ++i) p = scaled_multiply(p, a);
    CHECK(p.log_norm() == Catch::Approx(20.0 * std::log(2.0)).margin(1e-12));
    CHECK(op_norm(p.mat) >= 0.5);
    CHECK(op_norm(p.mat) <= 2.0);
}

TEST_CASE("alternating seesaw factors cancel to the identity with log norm exactly zero") {
    Matrix a = mat2(2, 0, 0, 0.5), b = mat2(0.5, 0, 0, 2);
    ScaledProduct p = ScaledProduct::identity(2);
    for (int i = 0; i < 7; ++i) {
        p = scaled_multiply(p, a);
        p = scaled_multiply(p, b);
    }
    CHECK(p.log_norm() == 0.0);
    CHECK(p.mat(0, 0) == 1.0);
    CHECK(p.mat(0, 1) == 0.0);
    CHECK(p.mat(1, 1) == 1.0);
}

TEST_CASE("a thousand rotations keep log norm near zero") {
    Matrix r = rotation2(0.7);
    ScaledProduct p = ScaledProduct::identity(2);
    for (int i = 0; i < 1000; ++i) p = scaled_multiply(p, r);
    CHECK(std::abs(p.log_norm()) < 1e-9);
}

TEST_CASE("scaled product of a singular factor raises") {
    Matrix z = Matrix::zero(2, 2);
    ScaledProduct p = ScaledProduct::identity(2);
    CHECK_THROWS_AS(scaled_multiply(p, z), numeric_error);
}

TEST_CASE("binomial and subset enumeration") {
    CHECK(binomial(6, 3) == 20);
    CHECK(binomial(5, 0) == 1);
    auto subs = lex_subsets(4, 2);
    REQUIRE(subs.size() == 6);
    CHECK(subs[0] == std::vector<int>{0, 1});
    CHECK(subs[1] == std::vector<int>{0, 2});
    CHECK(subs[5] == std::vector<int>{2, 3});
}
