#include <parapath/models.hpp>
#include <parapath/projection.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace parapath;
using V = Vector<double>;

namespace {

V v1(double a) { return (V(1) << a).finished(); }
V v2(double a, double b) { return (V(2) << a, b).finished(); }
V v3(double a, double b, double c) { return (V(3) << a, b, c).finished(); }

ModelSpec<double> builtin(const std::string& name) { return make_model<double>(name, default_params(name)); }

// Brute-force Euclidean distance from x to the invariant level set through
// the model's default initial value, by scanning a parametrisation of the
// level curve and refining around the best sample.
double distance_to_manifold(const ModelSpec<double>& m, const V& x)
{
    const V target = eval_invariants(m, m.default_x0);
    if (m.name == "kubo") return std::abs(x.norm() - std::sqrt(2 * target[0]));

    const auto scan = [&](auto&& point_at, double lo, double hi) {
        double best = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < 4; ++pass) {
            const int samples = 20000;
            double best_s = lo;
            for (int i = 0; i <= samples; ++i) {
                const double s = lo + (hi - lo) * i / samples;
                for (const V& p : point_at(s)) {
                    const double d = (p - x).norm();
                    if (d < best) {
                        best = d;
                        best_s = s;
                    }
                }
            }
            const double w = (hi - lo) / samples * 2;
            lo = best_s - w;
            hi = best_s + w;
        }
        return best;
    };

    if (m.name == "pendulum") {
        // x^2 / 2 - cos y = E  =>  x = +-sqrt(2 (E + cos y))
        const double e = target[0];
        return scan(
            [&](double y) {
                std::vector<V> pts;
                const double r = 2 * (e + std::cos(y));
                if (r >= 0) {
                    pts.push_back(v2(std::sqrt(r), y));
                    pts.push_back(v2(-std::sqrt(r), y));
                }
                return pts;
            },
            -2 * std::numbers::pi, 2 * std::numbers::pi);
    }
    // lotka_volterra: y + z = s - x, yz = p / x
    const double s = target[0], p = target[1];
    return scan(
        [&](double a) {
            std::vector<V> pts;
            if (a <= 0) return pts;
            const double b = s - a, q = p / a, disc = b * b - 4 * q;
            if (disc >= 0) {
                pts.push_back(v3(a, (b + std::sqrt(disc)) / 2, (b - std::sqrt(disc)) / 2));
                pts.push_back(v3(a, (b - std::sqrt(disc)) / 2, (b + std::sqrt(disc)) / 2));
            }
            return pts;
        },
        1e-6, s);
}

} // namespace

TEST_CASE("a point on the manifold is returned unchanged")
{
    const auto k = builtin("kubo");
    const auto res = project_detailed(k, v2(0.6, 0.8), v1(0.5));
    CHECK(res.x == v2(0.6, 0.8));
    CHECK(res.lambda == v1(0.0));
    CHECK(res.iterations == 0);
}

TEST_CASE("kubo projection is the radial rescaling")
{
    const auto k = builtin("kubo");
    const auto res = project_detailed(k, v2(1.1, 0), v1(0.5));
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(res.x[1]) == 0.0);
    CHECK(res.lambda[0] == doctest::Approx(1.0 / 1.1 - 1.0).epsilon(1e-13));

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> angle(-3.14, 3.14), radius(0.9, 1.1);
    for (int i = 0; i < 200; ++i) {
        const double a = angle(gen), r = radius(gen);
        const V x = v2(r * std::cos(a), r * std::sin(a));
        const V radial = x / x.norm();
        ProjectionConfig<double> full;
        full.jacobian_refresh = true;
        CHECK((project(k, x, v1(0.5)) - radial).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK((project(k, x, v1(0.5), full) - radial).cwiseAbs().maxCoeff() <= 1e-14);
    }
    // far from the circle full Newton still converges
    ProjectionConfig<double> full;
    full.jacobian_refresh = true;
    CHECK((project(k, v2(1.8, -0.9), v1(0.5), full) - v2(1.8, -0.9).normalized()).norm() <= 1e-14);
}

TEST_CASE("lotka_volterra projection against a high-precision oracle")
{
    // Oracle: 50-digit Newton on I(x_hat + Phi lambda) = (4, 2).
    const auto lv = builtin("lotka_volterra");
    const auto res = project_detailed(lv, v3(1.02, 1.97, 1.02), v2(4, 2));
    const V inv = eval_invariants(lv, res.x);
    CHECK(std::abs(inv[0] - 4) <= 1e-14);
    CHECK(std::abs(inv[1] - 2) <= 1e-14);
    CHECK((res.x - v3(1, 2, 1)).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(res.lambda[0] == doctest::Approx(0.083684210526315789474).epsilon(1e-12));
    CHECK(res.lambda[1] == doctest::Approx(-0.051599587203302373581).epsilon(1e-12));
}

TEST_CASE("projection is idempotent and close to the nearest manifold point")
{
    ProjectionConfig<double> cfg;
    for (const auto& name : model_names()) {
        CAPTURE(name);
        const auto m = builtin(name);
        const V target = eval_invariants(m, m.default_x0);
        std::mt19937_64 gen(31);
        std::uniform_real_distribution<double> u(-1, 1);
        // Start from manifold points reached by projecting nearby states, then perturb by up to 10%.
        for (int i = 0; i < 40; ++i) {
            V base = m.default_x0;
            for (Eigen::Index j = 0; j < base.size(); ++j) base[j] += 0.05 * u(gen);
            base = project(m, base, target, cfg);
            V pert = base;
            for (Eigen::Index j = 0; j < pert.size(); ++j) pert[j] += 0.1 * base.norm() * u(gen) / std::sqrt(double(pert.size()));

            const V once = project(m, pert, target, cfg);
            const V twice = project(m, once, target, cfg);
            CHECK((twice - once).cwiseAbs().maxCoeff() <= 10 * cfg.newton_tol);
            CHECK((eval_invariants(m, once) - target).cwiseAbs().maxCoeff() <= cfg.newton_tol);

            const double dist = distance_to_manifold(m, pert);
            CHECK((once - pert).norm() <= 10 * dist + 1e-9);
        }
    }
}

TEST_CASE("projection failures")
{
    const auto lv = builtin("lotka_volterra");
    try {
        project(lv, v3(1, 1, 1), v2(4, 2));
        FAIL("expected singular projection");
    } catch (const ProjectionError& e) {
        CHECK(e.kind() == ProjectionError::Kind::singular);
    }

    const auto k = builtin("kubo");
    CHECK_THROWS_AS(project(k, v2(0, 0), v1(0.5)), ProjectionError);

    ProjectionConfig<double> one{.newton_max_iter = 1};
    try {
        project(k, v2(3, 0), v1(0.5), one);
        FAIL("expected non-convergence");
    } catch (const ProjectionError& e) {
        CHECK(e.kind() == ProjectionError::Kind::not_converged);
        CHECK(e.residual() > 1e-3);
    }

    CHECK_THROWS_AS(project(k, v2(1, 0), v2(0.5, 0.5)), ModelError);
    CHECK_THROWS_AS(project(k, v2(NAN, 0), v1(0.5)), IntegrationError);
    ProjectionConfig<double> bad{.newton_tol = 0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
