#pragma once
#include <parapath/config.hpp>
#include <parapath/metrics.hpp>
#include <parapath/noise.hpp>
#include <parapath/parallel.hpp>
#include <parapath/schemes.hpp>

#include <chrono>
#include <cmath>
#include <vector>

namespace parapath {

/// Coarse-grid iterate of one sample path plus the coarse-propagator outputs
/// G(X_n^(k)) of the current iterate, which the next correction reuses.
template <class Scalar>
struct PararealState
{
    std::size_t iteration = 0;
    Trajectory<Scalar> current;      // X_n^(k), n = 0..N
    Trajectory<Scalar> coarse_cache; // G(X_n^(k)), n = 0..N-1
    /// All iterates X^(0..k), kept only when requested at construction.
    std::vector<Trajectory<Scalar>> history;
    bool record_history = false;
};

namespace detail {

template <class Scalar>
void check_grid(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg, const NoiseGrid& grid)
{
    const std::size_t n = cfg.interval_count();
    if (grid.coarse_count() != n || grid.fine_per_coarse() != cfg.J ||
        grid.noise_count() != std::size_t(model.noise_count)) {
        throw ConfigError("noise grid shape (" + std::to_string(grid.coarse_count()) + ", " +
                          std::to_string(grid.fine_per_coarse()) + ", " + std::to_string(grid.noise_count()) +
                          ") does not match configuration (" + std::to_string(n) + ", " + std::to_string(cfg.J) +
                          ", " + std::to_string(model.noise_count) + ")");
    }
    const double expected = double(cfg.dt_fine());
    if (std::abs(grid.dt_fine() - expected) > 1e-12 * expected) {
        throw ConfigError("noise grid dt_fine does not match dT / J");
    }
}

template <class Scalar>
Vector<Scalar> coarse(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg, const NoiseGrid& grid,
                      const Vector<Scalar>& x, std::size_t n, const Vector<Scalar>& target)
{
    return propagate_coarse(model, cfg.coarse, x, grid, n, target, cfg.projection);
}

} // namespace detail

/// X_{n+1}^(0) = G(X_n^(0)), sequentially from X_0.
template <class Scalar>
Trajectory<Scalar> initialize(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg,
                              const NoiseGrid& grid, const Vector<Scalar>& x0)
{
    cfg.validate();
    detail::check_grid(model, cfg, grid);
    const Vector<Scalar> target = eval_invariants(model, x0);
    const std::size_t n_count = cfg.interval_count();
    Trajectory<Scalar> out;
    out.reserve(n_count + 1);
    out.push_back(x0);
    for (std::size_t n = 0; n < n_count; ++n) out.push_back(detail::coarse(model, cfg, grid, out.back(), n, target));
    return out;
}

/// State after the coarse initialization; the cache holds G(X_n^(0)) = X_{n+1}^(0).
template <class Scalar>
PararealState<Scalar> start(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg, const NoiseGrid& grid,
                            const Vector<Scalar>& x0, bool record_history = false)
{
    PararealState<Scalar> state;
    state.record_history = record_history;
    state.current = initialize(model, cfg, grid, x0);
    state.coarse_cache.assign(state.current.begin() + 1, state.current.end());
    if (record_history) state.history.push_back(state.current);
    return state;
}

/// F^J(X_n) for every interval n, independently. The result is the same for any worker count.
template <class Scalar>
Trajectory<Scalar> fine_sweep(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg,
                              const NoiseGrid& grid, const Trajectory<Scalar>& current, unsigned workers = 1)
{
    const std::size_t n_count = cfg.interval_count();
    if (current.size() != n_count + 1) throw ConfigError("fine_sweep: iterate has wrong length");
    const Vector<Scalar> target = eval_invariants(model, current.front());
    Trajectory<Scalar> out(n_count);
    parallel_for(n_count, workers, [&](std::size_t n) {
        out[n] = propagate_fine(model, cfg.fine, current[n], grid, n, target, cfg.projection);
    });
    return out;
}

namespace detail {

// Sequential correction sweep. `old_coarse[n]` is G(X_n^(k)); fills new_coarse[n] = G(X_n^(k+1)).
template <class Scalar>
Trajectory<Scalar> correction_sweep(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg,
                                    const NoiseGrid& grid, const Vector<Scalar>& x0,
                                    const Trajectory<Scalar>& fine_vals, const Trajectory<Scalar>& old_coarse,
                                    Trajectory<Scalar>& new_coarse)
{
    const std::size_t n_count = cfg.interval_count();
    if (fine_vals.size() != n_count || old_coarse.size() != n_count) {
        throw ConfigError("correct: fine values have wrong length");
    }
    const Vector<Scalar> target = eval_invariants(model, x0);
    Trajectory<Scalar> next;
    next.reserve(n_count + 1);
    next.push_back(x0);
    new_coarse.resize(n_count);
    for (std::size_t n = 0; n < n_count; ++n) {
        new_coarse[n] = coarse(model, cfg, grid, next.back(), n, target);
        Vector<Scalar> y = new_coarse[n] + fine_vals[n] - old_coarse[n];
        if (cfg.correction_projection) {
            try {
                y = project(model, y, target, cfg.projection);
            } catch (Error& e) {
                e.annotate(n);
                throw;
            }
        } else if (!y.allFinite()) {
            IntegrationError e("parareal correction produced a non-finite state");
            e.annotate(n);
            throw e;
        }
        next.push_back(std::move(y));
    }
    return next;
}

} // namespace detail

/// X_{n+1}^(k+1) = [pi](G(X_n^(k+1)) + fine_vals[n] - G(X_n^(k))), with both
/// coarse terms evaluated here.
template <class Scalar>
Trajectory<Scalar> correct(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg, const NoiseGrid& grid,
                           const Trajectory<Scalar>& prev, const Trajectory<Scalar>& fine_vals)
{
    const std::size_t n_count = cfg.interval_count();
    if (prev.size() != n_count + 1) throw ConfigError("correct: iterate has wrong length");
    const Vector<Scalar> target = eval_invariants(model, prev.front());
    Trajectory<Scalar> old_coarse(n_count);
    for (std::size_t n = 0; n < n_count; ++n) old_coarse[n] = detail::coarse(model, cfg, grid, prev[n], n, target);
    Trajectory<Scalar> new_coarse;
    return detail::correction_sweep(model, cfg, grid, prev.front(), fine_vals, old_coarse, new_coarse);
}

/// Same correction using the cached G(X_n^(k)); advances `state` to iteration k+1.
template <class Scalar>
void correct(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg, const NoiseGrid& grid,
             PararealState<Scalar>& state, const Trajectory<Scalar>& fine_vals)
{
    Trajectory<Scalar> new_coarse;
    Trajectory<Scalar> next =
        detail::correction_sweep(model, cfg, grid, state.current.front(), fine_vals, state.coarse_cache, new_coarse);
    state.current = std::move(next);
    state.coarse_cache = std::move(new_coarse);
    ++state.iteration;
    if (state.record_history) state.history.push_back(state.current);
}

/// One parareal iteration: fine sweep on the current iterate, then the correction.
template <class Scalar>
void iterate(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg, const NoiseGrid& grid,
             PararealState<Scalar>& state, unsigned workers = 1)
{
    const Trajectory<Scalar> fine_vals = fine_sweep(model, cfg, grid, state.current, workers);
    correct(model, cfg, grid, state, fine_vals);
}

/// Sequential fine solution at T_0..T_N, i.e. the fixed point of the iteration:
/// F^J over each interval (projected per step iff cfg.fine.projected), followed
/// by the correction projection at T_{n+1} iff cfg.correction_projection.
template <class Scalar>
Trajectory<Scalar> reference_trajectory(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg,
                                        const NoiseGrid& grid, const Vector<Scalar>& x0)
{
    cfg.validate();
    detail::check_grid(model, cfg, grid);
    const Vector<Scalar> target = eval_invariants(model, x0);
    const std::size_t n_count = cfg.interval_count();
    Trajectory<Scalar> out;
    out.reserve(n_count + 1);
    out.push_back(x0);
    for (std::size_t n = 0; n < n_count; ++n) {
        Vector<Scalar> x = propagate_fine(model, cfg.fine, out.back(), grid, n, target, cfg.projection);
        if (cfg.correction_projection) {
            try {
                x = project(model, x, target, cfg.projection);
            } catch (Error& e) {
                e.annotate(n);
                throw;
            }
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// X*_N, the final value of reference_trajectory.
template <class Scalar>
Vector<Scalar> reference_solution(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg,
                                  const NoiseGrid& grid, const Vector<Scalar>& x0)
{
    return reference_trajectory(model, cfg, grid, x0).back();
}

/// Runs parareal on every sample path in lockstep over k. After each
/// iteration k >= 1 the mean-square distance of X_N^(k) to the per-path
/// reference X*_N is formed; the run stops once it is <= cfg.stop_tol, or at
/// k = min(k_max, N). Paths are distributed over `workers` threads and all
/// reductions run in path order, so the report does not depend on the worker count.
template <class Scalar>
ExperimentReport<Scalar> run(const ModelSpec<Scalar>& model, const PararealConfig<Scalar>& cfg,
                             const Vector<Scalar>& x0, const std::vector<NoiseGrid>& paths, unsigned workers = 1)
{
    using clock = std::chrono::steady_clock;
    const auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    cfg.validate();
    if (paths.empty()) throw ConfigError("run needs at least one sample path");
    for (const auto& grid : paths) detail::check_grid(model, cfg, grid);

    const std::size_t n_count = cfg.interval_count();
    const std::size_t path_count = paths.size();
    const Eigen::Index l = model.invariant_count;
    const Vector<Scalar> target = eval_invariants(model, x0);
    const unsigned outer = unsigned(std::min<std::size_t>(std::max(1u, workers), path_count));
    const unsigned inner = std::max(1u, std::max(1u, workers) / outer);

    ExperimentReport<Scalar> report;
    report.model_name = model.name;
    report.config = cfg;
    report.path_count = path_count;

    std::vector<Vector<Scalar>> references(path_count);
    std::vector<PararealState<Scalar>> states(path_count);
    std::vector<PhaseTimes> times(path_count);

    const auto with_path = [](std::size_t p, auto&& body) {
        try {
            body();
        } catch (Error& e) {
            e.annotate_path(p);
            throw;
        }
    };

    parallel_for(path_count, outer, [&](std::size_t p) {
        with_path(p, [&] {
            const auto t0 = clock::now();
            references[p] = reference_solution(model, cfg, paths[p], x0);
            const auto t1 = clock::now();
            states[p] = start(model, cfg, paths[p], x0);
            const auto t2 = clock::now();
            times[p].reference += seconds(t0, t1);
            times[p].initialize += seconds(t1, t2);
        });
    });

    std::vector<Matrix<Scalar>> path_errors(path_count);
    const auto record = [&] {
        std::vector<Vector<Scalar>> diffs(path_count);
        parallel_for(path_count, outer, [&](std::size_t p) {
            diffs[p] = states[p].current.back() - references[p];
            path_errors[p] = invariant_error_series(model, states[p].current, target);
        });
        report.per_iteration_mse.push_back(mean_square_error(diffs));

        InvariantSeries<Scalar> series;
        series.times.resize(n_count + 1);
        for (std::size_t n = 0; n <= n_count; ++n) series.times[n] = Scalar(n) * cfg.dT;
        series.max = Matrix<Scalar>::Zero(Eigen::Index(n_count + 1), l);
        series.mean = Matrix<Scalar>::Zero(Eigen::Index(n_count + 1), l);
        for (std::size_t p = 0; p < path_count; ++p) {
            series.max = series.max.cwiseMax(path_errors[p]);
            series.mean += path_errors[p];
        }
        series.mean /= Scalar(path_count);
        // Iterates with n >= 1 only: X_0 is exact by construction.
        report.per_iteration_invariant_max.push_back(
            n_count > 0 ? series.max.bottomRows(Eigen::Index(n_count)).maxCoeff() : Scalar(0));
        report.invariant_series.push_back(std::move(series));
    };

    record();
    const std::size_t last = std::min(cfg.k_max, n_count);
    for (std::size_t k = 1; k <= last; ++k) {
        parallel_for(path_count, outer, [&](std::size_t p) {
            with_path(p, [&] {
                const auto t0 = clock::now();
                const auto fine_vals = fine_sweep(model, cfg, paths[p], states[p].current, inner);
                const auto t1 = clock::now();
                correct(model, cfg, paths[p], states[p], fine_vals);
                const auto t2 = clock::now();
                times[p].fine_sweep += seconds(t0, t1);
                times[p].correct += seconds(t1, t2);
            });
        });
        record();
        report.stop_iteration = k;
        if (report.per_iteration_mse.back() <= cfg.stop_tol) {
            report.converged = true;
            break;
        }
    }

    for (const auto& t : times) {
        report.wall_times.reference += t.reference;
        report.wall_times.initialize += t.initialize;
        report.wall_times.fine_sweep += t.fine_sweep;
        report.wall_times.correct += t.correct;
    }
    return report;
}

} // namespace parapath
