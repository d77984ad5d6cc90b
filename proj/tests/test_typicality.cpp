#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lyapkit/typicality.hpp"

using namespace lyapkit;
using Catch::Matchers::WithinAbs;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

Matrix rotation(double theta) {
    return mat2(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta));
}

TransitionMatrix full_shift(int q) {
    std::vector<std::vector<int>> rows(q, std::vector<int>(q, 1));
    return TransitionMatrix(rows);
}

// diag(2, 1/2) next to a one radian rotation; the single insert loop map is
// diag(1/2, 2) R(1), dense in the eigenbasis of the period matrix
CocycleSpec mixed_pair() {
    return CocycleSpec("mixed_pair", full_shift(2), {mat2(2, 0, 0, 0.5), rotation(1.0)});
}

CocycleSpec diag_pair() {
    return CocycleSpec("diag_pair", full_shift(2), {mat2(2, 0, 0, 0.5), mat2(0.5, 0, 0, 2)});
}

CocycleSpec identity_pair() {
    return CocycleSpec("identity_pair", full_shift(2), {Matrix::identity(2), Matrix::identity(2)});
}

CocycleSpec golden_identity() {
    return CocycleSpec("golden_identity", {{1, 1}, {1, 0}},
                       {Matrix::identity(2), Matrix::identity(2)});
}

}  // namespace

TEST_CASE("periodic products follow the cocycle orientation") {
    CocycleSpec pos("pos", full_shift(2), {mat2(2, 1, 1, 1), mat2(1, 1, 1, 2)});
    auto p0 = periodic_product(pos, {0});
    CHECK(p0(0, 0) == 2.0);
    CHECK(p0(1, 1) == 1.0);
    // word 01 reads left to right in time, so the symbol 1 factor acts last
    auto p01 = periodic_product(pos, {0, 1});
    CHECK(p01(0, 0) == 3.0);
    CHECK(p01(0, 1) == 2.0);
    CHECK(p01(1, 0) == 4.0);
    CHECK(p01(1, 1) == 3.0);

    CHECK_THROWS_AS(periodic_product(pos, {}), validation_error);
    CHECK_THROWS_AS(periodic_product(golden_identity(), {1}), validation_error);
    CHECK(periodic_product(golden_identity(), {0, 1})(0, 0) == 1.0);
}

TEST_CASE("holonomy loop of a single insert") {
    const double c = std::cos(1.0), s = std::sin(1.0);
    auto spec = mixed_pair();

    // insert at time zero: the loop map is diag(1/2, 2) R(1)
    auto psi = holonomy_loop(spec, {{0}, {1}, 0});
    CHECK_THAT(psi(0, 0), WithinAbs(0.5 * c, 1e-12));
    CHECK_THAT(psi(0, 1), WithinAbs(-0.5 * s, 1e-12));
    CHECK_THAT(psi(1, 0), WithinAbs(2.0 * s, 1e-12));
    CHECK_THAT(psi(1, 1), WithinAbs(2.0 * c, 1e-12));

    // insert in the past: the same loop transported one step, R(1) diag(1/2, 2)
    auto past = holonomy_loop(spec, {{0}, {1}, -1});
    CHECK_THAT(past(0, 0), WithinAbs(0.5 * c, 1e-12));
    CHECK_THAT(past(0, 1), WithinAbs(-2.0 * s, 1e-12));
    CHECK_THAT(past(1, 0), WithinAbs(0.5 * s, 1e-12));
    CHECK_THAT(past(1, 1), WithinAbs(2.0 * c, 1e-12));

    auto diag = holonomy_loop(diag_pair(), {{0}, {1}, 0});
    CHECK_THAT(diag(0, 0), WithinAbs(0.25, 1e-14));
    CHECK_THAT(diag(0, 1), WithinAbs(0.0, 1e-14));
    CHECK_THAT(diag(1, 0), WithinAbs(0.0, 1e-14));
    CHECK_THAT(diag(1, 1), WithinAbs(4.0, 1e-14));

    auto ident = holonomy_loop(identity_pair(), {{0}, {1}, 0});
    CHECK(ident(0, 0) == 1.0);
    CHECK(ident(0, 1) == 0.0);
    CHECK(ident(1, 0) == 0.0);
    CHECK(ident(1, 1) == 1.0);
}

TEST_CASE("pinching accepts exactly the real simple spectra") {
    CHECK(pinching_check(mat2(2, 0, 0, 0.5)));
    CHECK(pinching_check(mat2(2, 1, 1, 1)));
    CHECK_FALSE(pinching_check(rotation(1.0)));
    CHECK_FALSE(pinching_check(Matrix::identity(2)));
    // distinct eigenvalues of equal modulus fail the moduli gap
    CHECK_FALSE(pinching_check(mat2(2, 0, 0, -2)));
}

TEST_CASE("moduli products can collide at intermediate levels") {
    const std::vector<double> moduli = {8.0, 4.0, 2.0, 1.0};
    CHECK(level_pinching(moduli, 1));
    // 8 * 1 equals 4 * 2
    CHECK_FALSE(level_pinching(moduli, 2));
    CHECK(level_pinching(moduli, 3));
    CHECK(level_pinching(moduli, 4));

    Matrix d4(4, 4);
    d4(0, 0) = 8.0;
    d4(1, 1) = 4.0;
    d4(2, 2) = 2.0;
    d4(3, 3) = 1.0;
    CocycleSpec solo("solo", full_shift(1), {d4});
    auto rep = typicality_report(solo, {{0}, {0}, 0});
    REQUIRE(rep.levels.size() == 3);
    CHECK(rep.levels[0].pinched);
    CHECK_FALSE(rep.levels[1].pinched);
    CHECK(rep.levels[2].pinched);
    CHECK_FALSE(rep.typical);
}

TEST_CASE("twisting needs every eigenbasis coefficient") {
    Matrix dense = mat2(1, 1, 1, 1);
    CHECK(twisting_check(dense, 1));
    CHECK_FALSE(twisting_check(mat2(2, 0, 0, 0.5), 1));
    CHECK_FALSE(twisting_check(mat2(1, 1e-12, 1, 1), 1));
    // the determinant is the only level two coefficient of a 2 by 2 map
    CHECK(twisting_check(mat2(2, 0, 0, 0.5), 2));
    CHECK_FALSE(twisting_check(mat2(1, 1, 1, 1), 2));
}

TEST_CASE("typicality ground truths") {
    auto rep = typicality_report(mixed_pair(), {{0}, {1}, 0});
    REQUIRE(rep.levels.size() == 1);
    CHECK(rep.typical);
    CHECK(rep.levels[0].level == 1);
    CHECK(rep.levels[0].pinched);
    REQUIRE(rep.levels[0].twisted.has_value());
    CHECK(*rep.levels[0].twisted);
    REQUIRE(rep.moduli.size() == 2);
    CHECK_THAT(rep.moduli[0], WithinAbs(2.0, 1e-12));
    CHECK_THAT(rep.moduli[1], WithinAbs(0.5, 1e-12));

    // diagonal generators commute, the loop map stays diagonal
    auto diag = typicality_report(diag_pair(), {{0}, {1}, 0});
    CHECK_FALSE(diag.typical);
    CHECK(diag.levels[0].pinched);
    REQUIRE(diag.levels[0].twisted.has_value());
    CHECK_FALSE(*diag.levels[0].twisted);

    // identity period matrix has no eigenvalue gap at all
    auto ident = typicality_report(identity_pair(), {{0}, {1}, 0});
    CHECK_FALSE(ident.typical);
    CHECK_FALSE(ident.levels[0].pinched);
    CHECK_FALSE(ident.levels[0].twisted.has_value());

    // scalar cocycles carry no transversality obstruction
    Matrix two(1, 1), half(1, 1);
    two(0, 0) = 2.0;
    half(0, 0) = 0.5;
    CocycleSpec scalar("scalar", full_shift(2), {two, half});
    auto sc = typicality_report(scalar, {{0}, {1}, 0});
    CHECK(sc.typical);
    CHECK(sc.levels.empty());
    REQUIRE(sc.moduli.size() == 1);
    CHECK_THAT(sc.moduli[0], WithinAbs(2.0, 1e-12));
}

TEST_CASE("spliced sequences must be admissible") {
    auto golden = golden_identity();
    CHECK_THROWS_AS(holonomy_loop(golden, {{0}, {1, 1}, 0}), validation_error);
    CHECK_THROWS_AS(holonomy_loop(golden, {{0, 1}, {1}, 0}), validation_error);
    CHECK_THROWS_AS(holonomy_loop(golden, {{0}, {}, 0}), validation_error);
    CHECK_THROWS_AS(holonomy_loop(golden, {{}, {1}, 0}), validation_error);
    CHECK_THROWS_AS(holonomy_loop(golden, {{0}, {7}, 0}), validation_error);

    // the same insert is fine one step later, after the periodic 1 has passed
    auto ok = holonomy_loop(golden, {{0, 1}, {1}, 1});
    CHECK(ok(0, 0) == 1.0);
    CHECK(ok(1, 1) == 1.0);
    auto single = holonomy_loop(golden, {{0}, {1}, 0});
    CHECK(single(0, 1) == 0.0);
}
