#include <doctest.h>

#include <cmath>

#include "bve/errors.hpp"
#include "bve/geometry.hpp"
#include "support.hpp"

using namespace bve;

namespace {

bool columns_equal(const RotationMatrix& r, const Vec3& c0, const Vec3& c1, const Vec3& c2, double tol = 1e-12) {
    return (r.col(0) - c0).norm() < tol && (r.col(1) - c1).norm() < tol && (r.col(2) - c2).norm() < tol;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("unit vectors") {
    CHECK((unit(Vec3(2, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((unit(Vec3(1, 1, 1)) - Vec3(1, 1, 1) / std::sqrt(3.0)).norm() < 1e-15);
    CHECK_THROWS_AS(unit(Vec3::Zero().eval()), DegenerateDirection);
    CHECK_THROWS_AS(unit(Vec3(1e-13, 0, 0)), DegenerateDirection);
    CHECK(std::abs(unit(Vec3(3e-12, 0, 4e-12)).norm() - 1.0) < 1e-12);
}

TEST_CASE("look-at rotation worked cases") {
    const Vec3 o = Vec3::Zero();
    CHECK(look_at_rotation(Vec3(1, 0, 0), o).isApprox(RotationMatrix::Identity(), 1e-15));
    CHECK(columns_equal(look_at_rotation(Vec3(0, 1, 0), o), {0, 1, 0}, {-1, 0, 0}, {0, 0, 1}));
    CHECK(columns_equal(look_at_rotation(Vec3(0, 0, 1), o), {0, 0, 1}, {0, 1, 0}, {-1, 0, 0}));
    CHECK_THROWS_AS(look_at_rotation(Vec3(0.3, 0.2, 0.1), Vec3(0.3, 0.2, 0.1)), DegenerateDirection);
}

TEST_CASE("look-at rotation looking straight down") {
    const RotationMatrix r = look_at_rotation(Vec3(0.5, 0.5, -1.0), Vec3(0.5, 0.5, 1.0));
    CHECK(columns_equal(r, {0, 0, -1}, {0, 1, 0}, {1, 0, 0}));
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
}

TEST_CASE("look-at rotation properties on random pairs") {
    std::mt19937_64 rng(11);
    for (int n = 0; n < 10000; ++n) {
        const Vec3 k = testing::uniform_in_box(rng, 2.0);
        const Vec3 c = testing::uniform_in_box(rng, 2.0);
        const RotationMatrix r = look_at_rotation(k, c);
        REQUIRE((r.transpose() * r - RotationMatrix::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE(std::abs(r.determinant() - 1.0) < 1e-9);
        REQUIRE((r * Vec3::UnitX() - (k - c).normalized()).norm() < 1e-9);
        REQUIRE(std::abs(r(2, 1)) < 1e-12);
    }
}

TEST_CASE("look-at rotation near the vertical tie-break stays orthonormal") {
    for (double eps : {1e-6, 1e-9, 1e-10, 1e-14}) {
        const RotationMatrix r = look_at_rotation(Vec3(eps, -eps, 1.0), Vec3::Zero().eval());
        CHECK((r.transpose() * r - RotationMatrix::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(std::abs(r.determinant() - 1.0) < 1e-9);
    }
}

TEST_CASE("look-at rotation in single precision") {
    const Eigen::Vector3f k(0.3f, -0.2f, 0.5f);
    const Eigen::Matrix3f r = look_at_rotation(k, Eigen::Vector3f::Zero().eval());
    CHECK((r.transpose() * r - Eigen::Matrix3f::Identity()).cwiseAbs().maxCoeff() < 1e-5f);
}

TEST_CASE("perpendicular vector conventions") {
    CHECK((perp_in_paper_convention(Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((perp_in_paper_convention(Vec3(0, 1, 0)) - Vec3(-1, 0, 0)).norm() < 1e-15);
    CHECK((perp_in_paper_convention(Vec3(0.6, 0, 0.8)) - Vec3(0, 0.6, 0.8).normalized()).norm() < 1e-15);

    // printed convention is off-perpendicular by e_z^2
    const Vec3 e = Vec3(0.6, 0, 0.8);
    CHECK(std::abs(perp_in_paper_convention(e).dot(e) - 0.64) < 1e-12);
    CHECK(std::abs(perp_in_paper_convention(e, PerpMode::Orthogonal).dot(e)) < 1e-12);

    std::mt19937_64 rng(5);
    for (int n = 0; n < 1000; ++n) {
        const Vec3 d = testing::random_direction(rng);
        const Vec3 p = perp_in_paper_convention(d, PerpMode::Orthogonal);
        REQUIRE(std::abs(p.norm() - 1.0) < 1e-12);
        REQUIRE(std::abs(p.dot(d)) < 1e-12);
    }
    CHECK(std::abs(perp_in_paper_convention(Vec3(0, 0, 1), PerpMode::Orthogonal).dot(Vec3(0, 0, 1))) < 1e-12);
}

}
