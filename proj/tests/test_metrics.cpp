#include <parapath/metrics.hpp>
#include <parapath/models.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace parapath;
using V = Vector<double>;

namespace {

V v1(double a) { return (V(1) << a).finished(); }

} // namespace

TEST_CASE("mean_square_error")
{
    CHECK(mean_square_error(std::vector<V>{V::Zero(3), V::Zero(3)}) == 0.0);
    CHECK(mean_square_error(std::vector<V>{v1(0.3), v1(0.4)}) == doctest::Approx(0.35355339059327376220).epsilon(1e-15));
    const V v = (V(3) << 1, -2, 2).finished();
    CHECK(mean_square_error(std::vector<V>{v}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(mean_square_error(std::vector<V>{}), ConfigError);
}

TEST_CASE("mean_square_error is permutation invariant and positively homogeneous")
{
    std::mt19937_64 gen(4);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<V> diffs;
        for (int i = 0; i < 30; ++i) diffs.push_back(V::NullaryExpr(3, [&] { return normal(gen); }));
        const double base = mean_square_error(diffs);
        auto shuffled = diffs;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        CHECK(mean_square_error(shuffled) == doctest::Approx(base).epsilon(1e-14));
        const double s = std::exp(normal(gen));
        for (auto& d : shuffled) d *= s;
        CHECK(mean_square_error(shuffled) == doctest::Approx(s * base).epsilon(1e-13));
    }
}

TEST_CASE("invariant_error_series")
{
    const auto kubo = make_model<double>("kubo", {{"c", 0.5}});
    const Trajectory<double> on{(V(2) << 1, 0).finished(), (V(2) << 0, 1).finished()};
    CHECK(invariant_error_series(kubo, on, v1(0.5)).cwiseAbs().maxCoeff() == 0.0);
    const auto off = invariant_error_series(kubo, Trajectory<double>{(V(2) << 1.1, 0).finished()}, v1(0.5));
    CHECK(off(0, 0) == doctest::Approx(0.105).epsilon(1e-14));

    const auto lv = make_model<double>("lotka_volterra", {{"c", 0.5}});
    const auto e = invariant_error_series(lv, Trajectory<double>{lv.default_x0}, (V(2) << 4, 2).finished());
    CHECK(e.rows() == 1);
    CHECK(e.cols() == 2);
    CHECK(e.cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(invariant_error_series(kubo, Trajectory<double>{}, v1(0.5)), ConfigError);
    CHECK_THROWS_AS(invariant_error_series(kubo, on, (V(2) << 0.5, 0).finished()), ModelError);
}

TEST_CASE("strong_order_fit")
{
    const std::vector<double> h{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    std::vector<double> lin, sqrt_h;
    for (double x : h) {
        lin.push_back(3.0 * x);
        sqrt_h.push_back(0.2 * std::sqrt(x));
    }
    CHECK(strong_order_fit(h, lin) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(strong_order_fit(h, sqrt_h) == doctest::Approx(0.5).epsilon(1e-12));

    // invariant under scaling of the errors
    std::vector<double> noisy{0.03, 0.017, 0.0081, 0.0042};
    const double slope = strong_order_fit(h, noisy);
    for (double& e : noisy) e *= 7.5;
    CHECK(strong_order_fit(h, noisy) == doctest::Approx(slope).epsilon(1e-12));

    CHECK_THROWS_AS(strong_order_fit(std::vector<double>{0.1, 0.1, 0.1}, std::vector<double>{1, 2, 3}), ConfigError);
    CHECK_THROWS_AS(strong_order_fit(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 2}), ConfigError);
    CHECK_THROWS_AS(strong_order_fit(std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{1, 0, 3}), ConfigError);
}
