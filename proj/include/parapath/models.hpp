#pragma once
#include <parapath/model.hpp>

#include <numbers>

namespace parapath {

namespace detail {

template <class Scalar>
Scalar require_param(const std::map<std::string, Scalar>& params, const std::string& model, const std::string& key)
{
    const auto it = params.find(key);
    if (it == params.end()) {
        throw ModelError("model '" + model + "' requires parameter '" + key + "'");
    }
    return it->second;
}

template <class Scalar>
Vector<Scalar> vec(std::initializer_list<Scalar> values)
{
    Vector<Scalar> v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (Scalar s : values) v[i++] = s;
    return v;
}

} // namespace detail

/// Kubo oscillator: dX = J X (dt + c o dW), J the rotation generator. I = (x^2 + y^2) / 2.
template <class Scalar>
ModelSpec<Scalar> kubo_oscillator(Scalar c)
{
    using V = Vector<Scalar>;
    using M = Matrix<Scalar>;
    ModelSpec<Scalar> m;
    m.name = "kubo";
    m.dim = 2;
    m.noise_count = 1;
    m.invariant_count = 1;
    m.drift = [](const V& x) { return detail::vec<Scalar>({-x[1], x[0]}); };
    m.diffusion = {[c](const V& x) { return detail::vec<Scalar>({-c * x[1], c * x[0]}); }};
    m.diffusion_jacobian = {[c](const V&) {
        M j(2, 2);
        j << 0, -c, c, 0;
        return j;
    }};
    m.invariants = [](const V& x) { return detail::vec<Scalar>({Scalar(0.5) * x.squaredNorm()}); };
    m.invariant_jacobian = [](const V& x) {
        M j(1, 2);
        j << x[0], x[1];
        return j;
    };
    m.commutative_noise = true;
    m.params = {{"c", c}};
    m.default_x0 = detail::vec<Scalar>({1, 0});
    m.box_lower = detail::vec<Scalar>({-2, -2});
    m.box_upper = detail::vec<Scalar>({2, 2});
    return m;
}

/// Pendulum driven by two multiplicative noises along its Hamiltonian vector field:
/// dX = (-sin X_2, X_1)^T (dt + c1 o dW_1 + c2 o dW_2). I = x^2 / 2 - cos y.
template <class Scalar>
ModelSpec<Scalar> stochastic_pendulum(Scalar c1, Scalar c2)
{
    using V = Vector<Scalar>;
    using M = Matrix<Scalar>;
    using std::cos;
    using std::sin;
    const auto field = [](const V& x) { return detail::vec<Scalar>({-sin(x[1]), x[0]}); };
    const auto field_jacobian = [](const V& x) {
        M j(2, 2);
        j << 0, -cos(x[1]), 1, 0;
        return j;
    };
    ModelSpec<Scalar> m;
    m.name = "pendulum";
    m.dim = 2;
    m.noise_count = 2;
    m.invariant_count = 1;
    m.drift = field;
    for (Scalar c : {c1, c2}) {
        m.diffusion.push_back([=](const V& x) -> V { return c * field(x); });
        m.diffusion_jacobian.push_back([=](const V& x) -> M { return c * field_jacobian(x); });
    }
    m.invariants = [](const V& x) { return detail::vec<Scalar>({Scalar(0.5) * x[0] * x[0] - cos(x[1])}); };
    m.invariant_jacobian = [](const V& x) {
        M j(1, 2);
        j << x[0], sin(x[1]);
        return j;
    };
    m.commutative_noise = true;
    m.params = {{"c1", c1}, {"c2", c2}};
    m.default_x0 = detail::vec<Scalar>({Scalar(0.2), 1});
    m.box_lower = detail::vec<Scalar>({-2, -std::numbers::pi_v<Scalar>});
    m.box_upper = detail::vec<Scalar>({2, std::numbers::pi_v<Scalar>});
    return m;
}

/// Cyclic three-species Lotka-Volterra system: dX = h(X) (dt + c o dW) with
/// h = (x(z - y), y(x - z), z(y - x)). Invariants x + y + z and xyz.
template <class Scalar>
ModelSpec<Scalar> lotka_volterra(Scalar c)
{
    using V = Vector<Scalar>;
    using M = Matrix<Scalar>;
    const auto field = [](const V& x) {
        return detail::vec<Scalar>({x[0] * (x[2] - x[1]), x[1] * (x[0] - x[2]), x[2] * (x[1] - x[0])});
    };
    const auto field_jacobian = [](const V& x) {
        M j(3, 3);
        j << x[2] - x[1], -x[0], x[0],
             x[1], x[0] - x[2], -x[1],
             -x[2], x[2], x[1] - x[0];
        return j;
    };
    ModelSpec<Scalar> m;
    m.name = "lotka_volterra";
    m.dim = 3;
    m.noise_count = 1;
    m.invariant_count = 2;
    m.drift = field;
    m.diffusion = {[=](const V& x) -> V { return c * field(x); }};
    m.diffusion_jacobian = {[=](const V& x) -> M { return c * field_jacobian(x); }};
    m.invariants = [](const V& x) { return detail::vec<Scalar>({x[0] + x[1] + x[2], x[0] * x[1] * x[2]}); };
    m.invariant_jacobian = [](const V& x) {
        M j(2, 3);
        j << 1, 1, 1,
             x[1] * x[2], x[0] * x[2], x[0] * x[1];
        return j;
    };
    m.commutative_noise = true;
    m.params = {{"c", c}};
    m.default_x0 = detail::vec<Scalar>({1, 2, 1});
    m.box_lower = detail::vec<Scalar>({Scalar(0.1), Scalar(0.1), Scalar(0.1)});
    m.box_upper = detail::vec<Scalar>({3, 3, 3});
    return m;
}

/// Built-in model names in listing order.
inline const std::vector<std::string>& model_names()
{
    static const std::vector<std::string> names{"kubo", "pendulum", "lotka_volterra"};
    return names;
}

/// Parameter values used in the reference experiments.
template <class Scalar = double>
std::map<std::string, Scalar> default_params(const std::string& name)
{
    if (name == "kubo" || name == "lotka_volterra") return {{"c", Scalar(0.5)}};
    if (name == "pendulum") return {{"c1", Scalar(0.5)}, {"c2", Scalar(0.1)}};
    throw ModelError("unknown model '" + name + "'");
}

template <class Scalar>
ModelSpec<Scalar> make_model(const std::string& name, const std::map<std::string, Scalar>& params)
{
    if (name == "kubo") return kubo_oscillator<Scalar>(detail::require_param(params, name, "c"));
    if (name == "pendulum") {
        return stochastic_pendulum<Scalar>(detail::require_param(params, name, "c1"),
                                           detail::require_param(params, name, "c2"));
    }
    if (name == "lotka_volterra") return lotka_volterra<Scalar>(detail::require_param(params, name, "c"));
    throw ModelError("unknown model '" + name + "'");
}

} // namespace parapath
