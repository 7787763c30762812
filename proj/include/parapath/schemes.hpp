#pragma once
#include <parapath/model.hpp>
#include <parapath/noise.hpp>
#include <parapath/projection.hpp>

#include <span>
#include <string>
#include <string_view>

namespace parapath {

enum class Scheme
{
    euler,    // Euler-Maruyama on the Ito-corrected drift
    milstein, // Stratonovich Milstein, commutative noise only
    midpoint, // implicit midpoint with truncated increments
    custom    // model-supplied one-step map, see ModelSpec::custom_steps
};

/// A one-step scheme, optionally followed by projection onto the invariant manifold.
template <class Scalar>
struct PropagatorSpec
{
    Scheme scheme = Scheme::euler;
    bool projected = false;
    Scalar fixed_point_tol = Scalar(1e-14);
    int fixed_point_max_iter = 50;
    Scalar fixed_point_damping = Scalar(1); // 1 = plain Picard iteration
    Scalar k_trunc = Scalar(2);
    std::string custom_name;

    void validate() const
    {
        if (!(fixed_point_tol > 0)) throw ConfigError("fixed_point_tol must be positive");
        if (fixed_point_max_iter < 1) throw ConfigError("fixed_point_max_iter must be >= 1");
        if (!(fixed_point_damping > 0 && fixed_point_damping <= 1)) {
            throw ConfigError("fixed_point_damping must lie in (0, 1]");
        }
        if (!(k_trunc >= 1)) throw ConfigError("k_trunc must be >= 1");
        if (scheme == Scheme::custom && custom_name.empty()) throw ConfigError("custom scheme needs a name");
    }
};

/// Short name as used on the command line: euler, mil, mid, or the custom name; "P" suffix when projected.
template <class Scalar>
std::string label(const PropagatorSpec<Scalar>& spec)
{
    std::string base;
    switch (spec.scheme) {
    case Scheme::euler: base = "euler"; break;
    case Scheme::milstein: base = "mil"; break;
    case Scheme::midpoint: base = "mid"; break;
    case Scheme::custom: base = spec.custom_name; break;
    }
    return spec.projected ? base + "P" : base;
}

/// Accepts euler, mil/milstein, mid/midpoint, custom:<name>; a trailing 'P' selects the projected variant.
template <class Scalar = double>
PropagatorSpec<Scalar> parse_propagator(std::string_view text)
{
    PropagatorSpec<Scalar> spec;
    std::string name(text);
    if (name.starts_with("custom:")) {
        name = name.substr(7);
        if (name.size() > 1 && name.back() == 'P') {
            spec.projected = true;
            name.pop_back();
        }
        if (name.empty()) throw ConfigError("empty custom scheme name");
        spec.scheme = Scheme::custom;
        spec.custom_name = name;
        return spec;
    }
    if (name.size() > 1 && name.back() == 'P') {
        spec.projected = true;
        name.pop_back();
    }
    if (name == "euler") spec.scheme = Scheme::euler;
    else if (name == "mil" || name == "milstein") spec.scheme = Scheme::milstein;
    else if (name == "mid" || name == "midpoint") spec.scheme = Scheme::midpoint;
    else throw ConfigError("unknown scheme '" + std::string(text) + "'");
    return spec;
}

namespace detail {

template <class Scalar>
void check_step_args(const ModelSpec<Scalar>& model, const Vector<Scalar>& x, Scalar dt, const Vector<Scalar>& dw)
{
    check_dimension(model, x);
    if (dw.size() != model.noise_count) {
        throw ModelError("increment vector of length " + std::to_string(dw.size()) + " for " +
                         std::to_string(model.noise_count) + " noise channels");
    }
    if (dt < 0) throw ConfigError("negative step size");
}

template <class Scalar>
Vector<Scalar> check_finite(Vector<Scalar> y, const char* scheme)
{
    if (!y.allFinite()) throw IntegrationError(std::string(scheme) + " step produced a non-finite state");
    return y;
}

template <class Scalar>
Vector<Scalar> to_vector(std::span<const double> values)
{
    Vector<Scalar> v(static_cast<Eigen::Index>(values.size()));
    for (Eigen::Index r = 0; r < v.size(); ++r) v[r] = Scalar(values[static_cast<std::size_t>(r)]);
    return v;
}

} // namespace detail

/// x + ito_drift(x) dt + sum_r g_r(x) dw_r
template <class Scalar>
Vector<Scalar> euler_step(const ModelSpec<Scalar>& model, const Vector<Scalar>& x, Scalar dt, const Vector<Scalar>& dw)
{
    detail::check_step_args(model, x, dt, dw);
    Vector<Scalar> y = x + ito_drift(model, x) * dt;
    for (Eigen::Index r = 0; r < model.noise_count; ++r) y.noalias() += model.diffusion[r](x) * dw[r];
    return detail::check_finite(std::move(y), "euler");
}

/// Stratonovich Milstein for commutative noise:
/// x + f dt + sum_r g_r dw_r + 1/2 sum_{r,s} (dg_r/dx) g_s dw_r dw_s.
template <class Scalar>
Vector<Scalar> milstein_step(const ModelSpec<Scalar>& model, const Vector<Scalar>& x, Scalar dt,
                             const Vector<Scalar>& dw)
{
    detail::check_step_args(model, x, dt, dw);
    if (!model.commutative_noise) {
        throw UnsupportedSchemeError("Milstein scheme requires commutative noise; model '" + model.name +
                                     "' would need Levy areas");
    }
    const Eigen::Index m = model.noise_count;
    Matrix<Scalar> g(model.dim, m);
    for (Eigen::Index r = 0; r < m; ++r) g.col(r) = model.diffusion[r](x);
    Vector<Scalar> y = x + model.drift(x) * dt + g * dw;
    // sum_s g_s dw_s, then contract with each Jacobian
    const Vector<Scalar> gdw = g * dw;
    for (Eigen::Index r = 0; r < m; ++r) {
        y.noalias() += Scalar(0.5) * dw[r] * (model.diffusion_jacobian[r](x) * gdw);
    }
    return detail::check_finite(std::move(y), "milstein");
}

/// Implicit midpoint Y = x + f(M) dt + sum_r g_r(M) zeta_r, M = (x + Y)/2, with
/// zeta_r the truncated increments. Solved by (optionally damped) fixed-point
/// iteration until successive iterates agree to fixed_point_tol * max(1, |Y|_inf).
template <class Scalar>
Vector<Scalar> midpoint_step(const ModelSpec<Scalar>& model, const Vector<Scalar>& x, Scalar dt,
                             const Vector<Scalar>& dw, const PropagatorSpec<Scalar>& spec = {})
{
    detail::check_step_args(model, x, dt, dw);
    Vector<Scalar> zeta = dw;
    if (dt > 0) {
        for (Eigen::Index r = 0; r < zeta.size(); ++r) {
            zeta[r] = Scalar(truncated_increment(double(dw[r]), double(dt), double(spec.k_trunc)));
        }
    }
    const auto rhs = [&](const Vector<Scalar>& mid) {
        Vector<Scalar> out = x + model.drift(mid) * dt;
        for (Eigen::Index r = 0; r < model.noise_count; ++r) out.noalias() += model.diffusion[r](mid) * zeta[r];
        return out;
    };

    Vector<Scalar> y = rhs(x);
    Scalar delta = 0;
    for (int it = 0; it < spec.fixed_point_max_iter; ++it) {
        const Vector<Scalar> next = rhs(Scalar(0.5) * (x + y));
        if (!next.allFinite()) throw IntegrationError("midpoint fixed-point iterate is not finite");
        delta = (next - y).cwiseAbs().maxCoeff();
        y += spec.fixed_point_damping * (next - y);
        if (delta <= spec.fixed_point_tol * std::max(Scalar(1), Scalar(y.cwiseAbs().maxCoeff()))) return y;
    }
    throw ImplicitSolveError("midpoint fixed-point iteration did not converge in " +
                                 std::to_string(spec.fixed_point_max_iter) + " iterations (residual " +
                                 std::to_string(double(delta)) + ")",
                             double(delta));
}

/// Dispatches one unprojected step of the scheme named in `spec`.
template <class Scalar>
Vector<Scalar> scheme_step(const ModelSpec<Scalar>& model, const PropagatorSpec<Scalar>& spec,
                           const Vector<Scalar>& x, Scalar dt, const Vector<Scalar>& dw)
{
    switch (spec.scheme) {
    case Scheme::euler: return euler_step(model, x, dt, dw);
    case Scheme::milstein: return milstein_step(model, x, dt, dw);
    case Scheme::midpoint: return midpoint_step(model, x, dt, dw, spec);
    case Scheme::custom: {
        const auto it = model.custom_steps.find(spec.custom_name);
        if (it == model.custom_steps.end()) {
            throw UnsupportedSchemeError("model '" + model.name + "' registers no scheme '" + spec.custom_name + "'");
        }
        detail::check_step_args(model, x, dt, dw);
        return detail::check_finite(it->second(x, dt, dw), "custom");
    }
    }
    throw UnsupportedSchemeError("unknown scheme");
}

/// Projection as used inside propagators: one retry with full Newton on failure.
template <class Scalar>
Vector<Scalar> project_with_retry(const ModelSpec<Scalar>& model, const Vector<Scalar>& x,
                                  const Vector<Scalar>& target, const ProjectionConfig<Scalar>& cfg)
{
    try {
        return project(model, x, target, cfg);
    } catch (const ProjectionError&) {
        if (cfg.jacobian_refresh) throw;
        auto full = cfg;
        full.jacobian_refresh = true;
        return project(model, x, target, full);
    }
}

/// One scheme step followed, for projected specs, by projection onto I = target.
template <class Scalar>
Vector<Scalar> propagate_step(const ModelSpec<Scalar>& model, const PropagatorSpec<Scalar>& spec,
                              const Vector<Scalar>& x, Scalar dt, const Vector<Scalar>& dw,
                              const Vector<Scalar>& target, const ProjectionConfig<Scalar>& proj = {})
{
    Vector<Scalar> y = scheme_step(model, spec, x, dt, dw);
    if (spec.projected) y = project_with_retry(model, y, target, proj);
    return y;
}

/// J fine steps of size dt_fine over coarse interval n using that interval's fine increments.
template <class Scalar>
Vector<Scalar> propagate_fine(const ModelSpec<Scalar>& model, const PropagatorSpec<Scalar>& spec,
                              const Vector<Scalar>& x, const NoiseGrid& grid, std::size_t n,
                              const Vector<Scalar>& target, const ProjectionConfig<Scalar>& proj = {})
{
    const Scalar dt = Scalar(grid.dt_fine());
    Vector<Scalar> y = x;
    std::size_t j = 0;
    try {
        for (; j < grid.fine_per_coarse(); ++j) {
            y = propagate_step(model, spec, y, dt, detail::to_vector<Scalar>(grid.fine_increments(n, j)), target, proj);
        }
    } catch (Error& e) {
        e.annotate(n, j);
        throw;
    }
    return y;
}

/// One step of size dt_fine * J over interval n driven by the summed coarse increment.
template <class Scalar>
Vector<Scalar> propagate_coarse(const ModelSpec<Scalar>& model, const PropagatorSpec<Scalar>& spec,
                                const Vector<Scalar>& x, const NoiseGrid& grid, std::size_t n,
                                const Vector<Scalar>& target, const ProjectionConfig<Scalar>& proj = {})
{
    Vector<Scalar> dw(model.noise_count);
    try {
        for (Eigen::Index r = 0; r < dw.size(); ++r) dw[r] = Scalar(grid.coarse_increment(n, std::size_t(r)));
        return propagate_step(model, spec, x, Scalar(grid.dt_coarse()), dw, target, proj);
    } catch (Error& e) {
        e.annotate(n);
        throw;
    }
}

} // namespace parapath
