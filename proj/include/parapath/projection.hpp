#pragma once
#include <parapath/model.hpp>

#include <Eigen/LU>

#include <limits>
#include <string>

namespace parapath {

template <class Scalar>
struct ProjectionConfig
{
    Scalar newton_tol = Scalar(1e-14); // on |I(x) - target|_inf
    int newton_max_iter = 20;
    bool jacobian_refresh = false;     // false: simplified Newton, Jacobian frozen at x_hat

    void validate() const
    {
        if (!(newton_tol > 0)) throw ConfigError("projection newton_tol must be positive");
        if (newton_max_iter < 1) throw ConfigError("projection newton_max_iter must be >= 1");
    }
};

template <class Scalar>
struct ProjectionResult
{
    Vector<Scalar> x;
    Vector<Scalar> lambda;
    int iterations = 0;
    Scalar residual = 0;
};

/// Projects x_hat onto {x : I(x) = target} along the columns of Phi = I'(x_hat)^T,
/// i.e. finds lambda with I(x_hat + Phi lambda) = target by Newton's method
/// starting from lambda = 0.
///
/// The l x l Newton matrix I'(.) Phi is evaluated once at x_hat unless
/// cfg.jacobian_refresh is set, in which case it is re-evaluated at every iterate.
template <class Scalar>
ProjectionResult<Scalar> project_detailed(const ModelSpec<Scalar>& model, const Vector<Scalar>& x_hat,
                                          const Vector<Scalar>& target, const ProjectionConfig<Scalar>& cfg = {})
{
    check_dimension(model, x_hat);
    if (target.size() != model.invariant_count) {
        throw ModelError("projection target has length " + std::to_string(target.size()) + ", expected " +
                         std::to_string(model.invariant_count));
    }
    if (!x_hat.allFinite()) throw IntegrationError("projection input is not finite");

    const Matrix<Scalar> phi = model.invariant_jacobian(x_hat).transpose();
    const Eigen::Index l = model.invariant_count;

    ProjectionResult<Scalar> res;
    res.lambda = Vector<Scalar>::Zero(l);
    res.x = x_hat;
    Eigen::FullPivLU<Matrix<Scalar>> lu;

    for (int it = 0;; ++it) {
        const Vector<Scalar> defect = model.invariants(res.x) - target;
        res.residual = defect.allFinite() ? defect.cwiseAbs().maxCoeff() : std::numeric_limits<Scalar>::infinity();
        res.iterations = it;
        if (res.residual <= cfg.newton_tol) return res;
        if (it == cfg.newton_max_iter || !std::isfinite(res.residual)) {
            throw ProjectionError(ProjectionError::Kind::not_converged,
                                  "projection did not converge after " + std::to_string(it) +
                                      " Newton iterations (residual " + std::to_string(double(res.residual)) + ")",
                                  double(res.residual));
        }
        if (it == 0 || cfg.jacobian_refresh) {
            lu.compute(model.invariant_jacobian(res.x) * phi);
            if (lu.rank() < l) {
                throw ProjectionError(ProjectionError::Kind::singular, "singular projection Newton matrix",
                                      double(res.residual));
            }
        }
        res.lambda -= lu.solve(defect);
        res.x = x_hat + phi * res.lambda;
    }
}

template <class Scalar>
Vector<Scalar> project(const ModelSpec<Scalar>& model, const Vector<Scalar>& x_hat, const Vector<Scalar>& target,
                       const ProjectionConfig<Scalar>& cfg = {})
{
    return project_detailed(model, x_hat, target, cfg).x;
}

} // namespace parapath
