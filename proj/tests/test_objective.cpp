#include <doctest.h>

#include <cmath>

#include "bve/errors.hpp"
#include "bve/objective.hpp"
#include "support.hpp"

using namespace bve;

namespace {

// Independent evaluation: explicit frame, LU inverses, determinant product.
double dispersion_reference(const Vec3& c, const Vec3& k, const Covariance3& so, const Covariance3& sc) {
    const Vec3 x = (k - c).normalized();
    Vec3 y(-x.y(), x.x(), 0.0);
    y = y.norm() < 1e-9 ? Vec3::UnitY().eval() : y.normalized();
    Eigen::Matrix3d r;
    r << x, y, x.cross(y).normalized();
    const Eigen::Matrix3d sn = r * sc.matrix() * r.transpose();
    const Eigen::Matrix3d info = sn.fullPivLu().inverse() + so.matrix().fullPivLu().inverse();
    return -std::log(info.determinant());
}

Vec3 shell_point(std::mt19937_64& rng, const Vec3& k) {
    std::uniform_real_distribution<double> d(0.9, 1.1);
    return k + d(rng) * testing::random_direction(rng);
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("isotropic closed forms") {
    const double s = 0.1;
    const Covariance3 iso = Covariance3::isotropic(s * s);
    const Vec3 k(0.2, -0.1, 0.4);
    CHECK(loss_dispersion(Vec3(1.2, 0.0, 0.4), k, iso, iso) == doctest::Approx(-3 * std::log(200.0)).epsilon(1e-12));
    CHECK(std::abs(loss_dispersion(Vec3(1.2, 0.0, 0.4), k, iso, iso) - (-15.89495)) < 1e-5);
    CHECK(loss_max_eig(Vec3(1.2, 0.0, 0.4), k, iso, iso) == doctest::Approx(s * s / 2).epsilon(1e-12));

    const Covariance3 vague = Covariance3::diagonal(1e12, 1e12, 1e12);
    const Covariance3 camera = Covariance3::diagonal(25e-4, 1e-4, 1e-4);
    CHECK(loss_max_eig(Vec3(1, 2, 3), k, vague, camera) == doctest::Approx(25e-4).epsilon(1e-9));
}

TEST_CASE("isotropic losses are constant over directions") {
    std::mt19937_64 rng(1);
    const Covariance3 iso = Covariance3::isotropic(0.01);
    const Vec3 k(0.1, 0.2, 0.3);
    const double ref_d = loss_dispersion(Vec3(k + Vec3::UnitX()), k, iso, iso);
    const double ref_e = loss_max_eig(Vec3(k + Vec3::UnitX()), k, iso, iso);
    for (int n = 0; n < 100; ++n) {
        const Vec3 c = k + testing::random_direction(rng);
        REQUIRE(std::abs(loss_dispersion(c, k, iso, iso) - ref_d) < 1e-9);
        REQUIRE(std::abs(loss_max_eig(c, k, iso, iso) - ref_e) < 1e-9);
    }
}

TEST_CASE("dispersion matches an independent evaluation") {
    std::mt19937_64 rng(2);
    for (int n = 0; n < 500; ++n) {
        const Vec3 k = testing::uniform_in_box(rng, 1.0);
        const Vec3 c = shell_point(rng, k);
        const Covariance3 so = testing::random_spd(rng);
        const Covariance3 sc = testing::random_spd(rng);
        REQUIRE(std::abs(loss_dispersion(c, k, so, sc) - dispersion_reference(c, k, so, sc)) < 1e-9);
    }
}

TEST_CASE("dispersion is symmetric in prior and observation") {
    std::mt19937_64 rng(4);
    for (int n = 0; n < 100; ++n) {
        const Vec3 k = testing::uniform_in_box(rng, 1.0);
        const Vec3 c = shell_point(rng, k);
        const Covariance3 so = testing::random_spd(rng);
        const Covariance3 sc = testing::random_spd(rng);
        const Covariance3 sn = rotate_covariance(look_at_rotation(k, c), sc);
        const double lhs = loss_dispersion(c, k, so, sc);
        const double rhs = -std::log((sn.inverse() + so.inverse()).determinant());
        const double swapped = -std::log((so.inverse() + sn.inverse()).determinant());
        REQUIRE(std::abs(lhs - rhs) < 1e-9);
        REQUIRE(std::abs(lhs - swapped) < 1e-12);
    }
}

TEST_CASE("adding information lowers the dispersion") {
    std::mt19937_64 rng(6);
    for (int n = 0; n < 100; ++n) {
        const Vec3 k = testing::uniform_in_box(rng, 1.0);
        const Vec3 c = shell_point(rng, k);
        const Covariance3 so = testing::random_spd(rng);
        const Covariance3 sc = testing::random_spd(rng);
        const Covariance3 more = fuse(so, testing::random_spd(rng));
        REQUIRE(loss_dispersion(c, k, more, sc) < loss_dispersion(c, k, so, sc));
        REQUIRE(loss_max_eig(c, k, so, sc) <= so.eigenvalues().maxCoeff() * (1 + 1e-12));
    }
}

TEST_CASE("analytic dispersion gradient agrees with central differences") {
    std::mt19937_64 rng(8);
    const double h = 1e-6;
    for (int n = 0; n < 100; ++n) {
        const Vec3 k = testing::uniform_in_box(rng, 1.0);
        const Vec3 c = shell_point(rng, k);
        const Covariance3 so = testing::random_spd(rng);
        const Covariance3 sc = Covariance3::diagonal(25e-4, 1e-4, 1e-4);
        const ViewpointLoss loss(LossKind::dispersion(), k, so, sc);
        Vec3 fd;
        for (int j = 0; j < 3; ++j) {
            const Vec3 e = h * Vec3::Unit(j);
            fd(j) = (dispersion_reference(c + e, k, so, sc) - dispersion_reference(c - e, k, so, sc)) / (2 * h);
        }
        const Vec3 an = loss.dispersion_gradient(c);
        INFO("analytic ", an.transpose(), " numeric ", fd.transpose());
        REQUIRE((an - fd).norm() <= 1e-4 * an.norm() + 1e-7);
    }
}

TEST_CASE("loss at the target is degenerate") {
    const Covariance3 iso = Covariance3::isotropic(0.01);
    CHECK_THROWS_AS(loss_dispersion(Vec3(0.1, 0.1, 0.1), Vec3(0.1, 0.1, 0.1), iso, iso), DegenerateDirection);
}

TEST_CASE("sigmoid activation") {
    const SigmoidParams p{1.0, 10.0};
    CHECK(sigmoid_act(10, p) == doctest::Approx(0.5));
    CHECK(sigmoid_act(0, p) == doctest::Approx(1.0 / (1.0 + std::exp(10.0))).epsilon(1e-12));
    CHECK(std::abs(sigmoid_act(0, p) - 4.54e-5) < 1e-7);
    double prev = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double a = sigmoid_act(i, SigmoidParams{});
        REQUIRE(a >= prev);
        REQUIRE(a > 0.0);
        REQUIRE(a <= 1.0);
        prev = a;
    }
}

TEST_CASE("approach loss adds the activated distance") {
    std::mt19937_64 rng(9);
    const SigmoidParams p{};
    const Vec3 k(0.3, 0.1, 0.2);
    const Vec3 c = shell_point(rng, k);
    const Covariance3 so = testing::random_spd(rng);
    const Covariance3 sc = Covariance3::diagonal(25e-4, 1e-4, 1e-4);
    const double base = loss_dispersion(c, k, so, sc);
    const double dist = (k - c).norm();

    CHECK(loss_with_approach(c, k, so, sc, 10, p) == doctest::Approx(base + 0.5 * dist).epsilon(1e-12));
    const double d = loss_with_approach(c, k, so, sc, 7, p) - loss_with_approach(c, k, so, sc, 3, p);
    CHECK(std::abs(d - (sigmoid_act(7, p) - sigmoid_act(3, p)) * dist) < 1e-12);

    const SigmoidParams steep{1e3, 10.0};
    CHECK(loss_with_approach(c, k, so, sc, 50, steep) == doctest::Approx(base + dist).epsilon(1e-12));

    const ViewpointLoss via_kind(LossKind::with_approach(p), k, so, sc, 10);
    CHECK(via_kind(c) == doctest::Approx(base + 0.5 * dist).epsilon(1e-12));
}

}
