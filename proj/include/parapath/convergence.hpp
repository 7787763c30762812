#pragma once
#include <parapath/metrics.hpp>
#include <parapath/noise.hpp>
#include <parapath/parallel.hpp>
#include <parapath/schemes.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace parapath {

/// Sequential integration of `spec` over the grid, one step per coarse interval
/// (step size grid.dt_coarse(), increment the summed interval increment).
template <class Scalar>
Vector<Scalar> integrate(const ModelSpec<Scalar>& model, const PropagatorSpec<Scalar>& spec, const Vector<Scalar>& x0,
                         const NoiseGrid& grid, const ProjectionConfig<Scalar>& proj = {})
{
    const Vector<Scalar> target = eval_invariants(model, x0);
    Vector<Scalar> x = x0;
    for (std::size_t n = 0; n < grid.coarse_count(); ++n) x = propagate_coarse(model, spec, x, grid, n, target, proj);
    return x;
}

template <class Scalar>
struct OrderStudySetup
{
    Scalar T = 1;
    std::vector<Scalar> step_sizes;
    Scalar reference_step = Scalar(1.0 / 16384.0);
    PropagatorSpec<Scalar> reference_scheme = parse_propagator<Scalar>("mil");
    std::size_t paths = 500;
    std::uint64_t seed = 1;
    ProjectionConfig<Scalar> projection;
};

template <class Scalar>
struct OrderStudyRow
{
    std::string scheme;
    Scalar h = 0;
    Scalar mse = 0;
};

template <class Scalar>
struct OrderStudyResult
{
    std::vector<OrderStudyRow<Scalar>> rows;     // scheme-major, step sizes in setup order
    std::vector<std::pair<std::string, Scalar>> slopes; // one per scheme, setup order
};

namespace detail {

inline std::size_t exact_ratio(double a, double b, const char* what)
{
    const double r = a / b;
    const double rounded = std::round(r);
    if (!(rounded >= 1) || std::abs(r - rounded) > 1e-9 * rounded) {
        throw ConfigError(std::string(what) + " is not an integer multiple of the reference step");
    }
    return static_cast<std::size_t>(rounded);
}

} // namespace detail

/// Mean-square error at time T of each scheme at each step size against a
/// reference scheme at `reference_step`, all driven by the same Brownian
/// paths; plus the fitted strong-order slope per scheme.
template <class Scalar>
OrderStudyResult<Scalar> strong_order_study(const ModelSpec<Scalar>& model, const Vector<Scalar>& x0,
                                            const std::vector<PropagatorSpec<Scalar>>& schemes,
                                            const OrderStudySetup<Scalar>& setup, unsigned workers = 1)
{
    if (schemes.empty()) throw ConfigError("order study needs at least one scheme");
    if (setup.step_sizes.size() < 3) throw ConfigError("order study needs at least three step sizes");
    if (setup.paths < 1) throw ConfigError("order study needs at least one path");
    for (const auto& s : schemes) s.validate();
    const std::size_t total = detail::exact_ratio(double(setup.T), double(setup.reference_step), "T");
    std::vector<std::size_t> factors;
    for (Scalar h : setup.step_sizes) {
        factors.push_back(detail::exact_ratio(double(h), double(setup.reference_step), "step size"));
        if (total % factors.back() != 0) throw ConfigError("T is not a multiple of a step size");
    }

    const std::size_t cols = schemes.size() * factors.size();
    std::vector<std::vector<Scalar>> sq(setup.paths, std::vector<Scalar>(cols));
    parallel_for(setup.paths, workers, [&](std::size_t p) {
        const NoiseGrid grid = generate_path(setup.seed, p, total, 1, std::size_t(model.noise_count),
                                             double(setup.reference_step));
        const Vector<Scalar> ref = integrate(model, setup.reference_scheme, x0, grid, setup.projection);
        for (std::size_t i = 0; i < factors.size(); ++i) {
            const NoiseGrid coarse = regroup(grid, factors[i]);
            for (std::size_t s = 0; s < schemes.size(); ++s) {
                try {
                    sq[p][s * factors.size() + i] =
                        (integrate(model, schemes[s], x0, coarse, setup.projection) - ref).squaredNorm();
                } catch (Error& e) {
                    e.annotate_path(p);
                    throw;
                }
            }
        }
    });

    OrderStudyResult<Scalar> out;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        std::vector<Scalar> errs;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            Scalar sum = 0;
            for (std::size_t p = 0; p < setup.paths; ++p) sum += sq[p][s * factors.size() + i];
            const Scalar mse = std::sqrt(sum / Scalar(setup.paths));
            errs.push_back(mse);
            out.rows.push_back({label(schemes[s]), setup.step_sizes[i], mse});
        }
        out.slopes.emplace_back(label(schemes[s]), strong_order_fit(setup.step_sizes, errs));
    }
    return out;
}

} // namespace parapath
