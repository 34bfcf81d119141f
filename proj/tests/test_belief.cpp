#include <doctest.h>

#include <numbers>
#include <vector>

#include "bve/belief.hpp"
#include "bve/errors.hpp"
#include "support.hpp"

using namespace bve;

namespace {

Covariance3 diag4(double a, double b, double c) { return Covariance3::diagonal(a * 1e-4, b * 1e-4, c * 1e-4); }

double max_abs_diff(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("belief") {

TEST_CASE("covariance construction symmetrizes") {
    Eigen::Matrix3d m;
    m << 2, 1, 0, 0.5, 3, 0, 0, 0, 1;
    const Covariance3 c(m);
    CHECK(c(0, 1) == doctest::Approx(0.75));
    CHECK(c(1, 0) == c(0, 1));
    CHECK(c.positive_definite());
    CHECK_FALSE(Covariance3::diagonal(1, 1, -1).positive_definite());
    CHECK_THROWS_AS(Covariance3::diagonal(1, 1, 0).inverse(), SingularCovariance);
    CHECK_THROWS_AS(Covariance3::diagonal(1, 1, 1e-13).inverse(), SingularCovariance);
}

TEST_CASE("rotate covariance worked cases") {
    CHECK(max_abs_diff(rotate_covariance(RotationMatrix::Identity(), diag4(4, 1, 1)).matrix(), diag4(4, 1, 1).matrix()) <
          1e-18);
    const RotationMatrix rz = Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()).toRotationMatrix();
    CHECK(max_abs_diff(rotate_covariance(rz, diag4(4, 1, 1)).matrix(), diag4(1, 4, 1).matrix()) < 1e-18);

    std::mt19937_64 rng(3);
    const Covariance3 iso = Covariance3::isotropic(0.01);
    for (int n = 0; n < 100; ++n) {
        REQUIRE(max_abs_diff(rotate_covariance(testing::random_rotation(rng), iso).matrix(), iso.matrix()) < 1e-15);
    }
}

TEST_CASE("fuse worked cases") {
    const double s2 = 0.01;
    CHECK(max_abs_diff(fuse(Covariance3::isotropic(s2), Covariance3::isotropic(s2)).matrix(),
                       Covariance3::isotropic(s2 / 2).matrix()) < 1e-15);
    CHECK(max_abs_diff(fuse(Covariance3::isotropic(1.0), Covariance3::diagonal(1e12, 1e12, 1e12)).matrix(),
                       Eigen::Matrix3d::Identity()) < 1e-11);
    CHECK(max_abs_diff(fuse(diag4(4, 1, 1), diag4(1, 4, 1)).matrix(), diag4(0.8, 0.8, 0.5).matrix()) < 1e-16);
    CHECK_THROWS_AS(fuse(Covariance3::isotropic(1.0), Covariance3::diagonal(1, 1, 0)), SingularCovariance);
}

TEST_CASE("fuse chain") {
    const std::vector<Covariance3> five(5, Covariance3::isotropic(0.02));
    CHECK(max_abs_diff(fuse_chain<double>(five).matrix(), Covariance3::isotropic(0.004).matrix()) < 1e-15);

    const std::vector<Covariance3> one{diag4(4, 2, 1)};
    CHECK(fuse_chain<double>(one) == one.front());

    CHECK_THROWS_AS(fuse_chain<double>(std::span<const Covariance3>{}), EmptyInput);

    std::mt19937_64 rng(17);
    for (int n = 0; n < 100; ++n) {
        const std::vector<Covariance3> three{testing::random_spd(rng), testing::random_spd(rng), testing::random_spd(rng)};
        const Covariance3 folded = fuse(fuse(three[0], three[1]), three[2]);
        REQUIRE(max_abs_diff(fuse_chain<double>(three).matrix(), folded.matrix()) < 1e-10);
    }
}

TEST_CASE("fusion properties on random SPD pairs") {
    std::mt19937_64 rng(23);
    for (int n = 0; n < 1000; ++n) {
        const Covariance3 a = testing::random_spd(rng);
        const Covariance3 b = testing::random_spd(rng);
        const Covariance3 f = fuse(a, b);

        REQUIRE(max_abs_diff(f.matrix(), testing::fuse_reference(a.matrix(), b.matrix())) < 1e-12);
        REQUIRE(testing::min_eigenvalue(a.matrix() - f.matrix()) >= -1e-10);
        REQUIRE(testing::min_eigenvalue(b.matrix() - f.matrix()) >= -1e-10);
        REQUIRE(f.matrix().determinant() <= std::min(a.matrix().determinant(), b.matrix().determinant()));
        REQUIRE(max_abs_diff(f.matrix(), fuse(b, a).matrix()) < 1e-10);
        REQUIRE(f.positive_definite());

        const RotationMatrix r = testing::random_rotation(rng);
        Vec3 before = a.eigenvalues();
        Vec3 after = rotate_covariance(r, a).eigenvalues();
        std::sort(before.data(), before.data() + 3);
        std::sort(after.data(), after.data() + 3);
        REQUIRE((before - after).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("gaussian belief carries its covariance") {
    const GaussianBelief g{Vec3(0.1, 0.2, 0.3), Covariance3::isotropic(0.01)};
    CHECK(g.cov.positive_definite());
    CHECK(g.mean.y() == doctest::Approx(0.2));
}

}
