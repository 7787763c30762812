#pragma once
#include <parapath/config.hpp>
#include <parapath/model.hpp>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace parapath {

/// sqrt(mean_i |d_i|^2)
template <class Scalar>
Scalar mean_square_error(std::span<const Vector<Scalar>> diffs)
{
    if (diffs.empty()) throw ConfigError("mean_square_error of an empty sample");
    Scalar sum = 0;
    for (const auto& d : diffs) sum += d.squaredNorm();
    return std::sqrt(sum / Scalar(diffs.size()));
}

template <class Scalar>
Scalar mean_square_error(const std::vector<Vector<Scalar>>& diffs)
{
    return mean_square_error(std::span<const Vector<Scalar>>(diffs));
}

/// Row t holds |I^i(x_t) - target_i| for i = 1..l.
template <class Scalar>
Matrix<Scalar> invariant_error_series(const ModelSpec<Scalar>& model, const Trajectory<Scalar>& trajectory,
                                      const Vector<Scalar>& target)
{
    if (trajectory.empty()) throw ConfigError("invariant_error_series of an empty trajectory");
    if (target.size() != model.invariant_count) throw ModelError("invariant target has wrong length");
    Matrix<Scalar> out(static_cast<Eigen::Index>(trajectory.size()), model.invariant_count);
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        out.row(Eigen::Index(t)) = (eval_invariants(model, trajectory[t]) - target).cwiseAbs().transpose();
    }
    return out;
}

/// Least-squares slope of log(error) against log(h).
template <class Scalar>
Scalar strong_order_fit(std::span<const Scalar> step_sizes, std::span<const Scalar> errors)
{
    if (step_sizes.size() != errors.size()) throw ConfigError("strong_order_fit: length mismatch");
    if (step_sizes.size() < 3) throw ConfigError("strong_order_fit needs at least 3 points");
    const auto n = Eigen::Index(step_sizes.size());
    Vector<Scalar> lx(n), ly(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar h = step_sizes[std::size_t(i)], e = errors[std::size_t(i)];
        if (!(h > 0) || !(e > 0)) throw ConfigError("strong_order_fit needs positive step sizes and errors");
        lx[i] = std::log(h);
        ly[i] = std::log(e);
    }
    const Vector<Scalar> cx = lx.array() - lx.mean();
    const Scalar sxx = cx.squaredNorm();
    if (!(sxx > Scalar(0))) throw ConfigError("strong_order_fit: step sizes are all equal");
    return cx.dot(ly) / sxx;
}

template <class Scalar>
Scalar strong_order_fit(const std::vector<Scalar>& step_sizes, const std::vector<Scalar>& errors)
{
    return strong_order_fit(std::span<const Scalar>(step_sizes), std::span<const Scalar>(errors));
}

/// Invariant errors at the coarse points T_0..T_N for one iteration, reduced
/// over sample paths: worst case and mean.
template <class Scalar>
struct InvariantSeries
{
    std::vector<Scalar> times;
    Matrix<Scalar> max;  // (N+1) x l
    Matrix<Scalar> mean; // (N+1) x l
};

/// Wall-clock seconds per parareal phase, summed over sample paths.
struct PhaseTimes
{
    double reference = 0;
    double initialize = 0;
    double fine_sweep = 0;
    double correct = 0;
};

template <class Scalar>
struct ExperimentReport
{
    std::string model_name;
    PararealConfig<Scalar> config;
    std::size_t path_count = 0;

    /// Entry k: (E|X_N^(k) - X*_N|^2)^(1/2) for k = 0 (coarse initialization) .. stop_iteration.
    std::vector<Scalar> per_iteration_mse;
    /// Entry k: max over paths and n of |I(X_n^(k)) - I(X_0)|_inf.
    std::vector<Scalar> per_iteration_invariant_max;
    /// Entry k: invariant error series of iterate k.
    std::vector<InvariantSeries<Scalar>> invariant_series;

    std::size_t stop_iteration = 0;
    bool converged = false; // stop_tol met at stop_iteration
    PhaseTimes wall_times;
};

} // namespace parapath
