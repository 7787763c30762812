#pragma once
#include <parapath/errors.hpp>
#include <parapath/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace parapath {

/// Autonomous Stratonovich SDE
///
///     dX = f(X) dt + sum_r g_r(X) o dW_r
///
/// with `invariant_count` conserved quantities I(x) satisfying I'(x) f(x) = 0
/// and I'(x) g_r(x) = 0. Immutable after construction; every callable is a
/// pure function of its argument so a ModelSpec may be shared across threads.
template <class Scalar_>
struct ModelSpec
{
    using Scalar = Scalar_;
    using VectorType = Vector<Scalar>;
    using MatrixType = Matrix<Scalar>;
    using VectorField = std::function<VectorType(const VectorType&)>;
    using MatrixField = std::function<MatrixType(const VectorType&)>;
    /// Model-supplied one-step map (x, dt, dW) -> x_next, e.g. a higher-order Taylor scheme.
    using OneStepMap = std::function<VectorType(const VectorType&, Scalar, const VectorType&)>;

    std::string name;
    Eigen::Index dim = 0;
    Eigen::Index noise_count = 0;
    Eigen::Index invariant_count = 0;

    VectorField drift;                           // f, Stratonovich sense
    std::vector<VectorField> diffusion;          // g_r
    std::vector<MatrixField> diffusion_jacobian; // dg_r/dx
    VectorField invariants;                      // I
    MatrixField invariant_jacobian;              // I', l x d

    bool commutative_noise = false;
    std::map<std::string, Scalar> params;
    VectorType default_x0;

    // Box used to draw trial states for numerical validation.
    VectorType box_lower;
    VectorType box_upper;

    std::map<std::string, OneStepMap> custom_steps;
};

template <class Scalar>
void check_dimension(const ModelSpec<Scalar>& model, const Vector<Scalar>& x)
{
    if (x.size() != model.dim) {
        throw ModelError("state of length " + std::to_string(x.size()) + " passed to model '" +
                         model.name + "' of dimension " + std::to_string(model.dim));
    }
}

template <class Scalar>
Vector<Scalar> eval_invariants(const ModelSpec<Scalar>& model, const Vector<Scalar>& x)
{
    check_dimension(model, x);
    return model.invariants(x);
}

/// f(x) + 1/2 sum_r (dg_r/dx)(x) g_r(x): the drift of the equivalent Ito equation.
template <class Scalar>
Vector<Scalar> ito_drift(const ModelSpec<Scalar>& model, const Vector<Scalar>& x)
{
    check_dimension(model, x);
    Vector<Scalar> out = model.drift(x);
    for (Eigen::Index r = 0; r < model.noise_count; ++r) {
        out.noalias() += Scalar(0.5) * (model.diffusion_jacobian[r](x) * model.diffusion[r](x));
    }
    return out;
}

/// Evaluates every callable once at `x` and checks the returned shapes.
template <class Scalar>
void validate_shapes(const ModelSpec<Scalar>& model, const Vector<Scalar>& x)
{
    const auto fail = [&](const std::string& what) {
        throw ModelError("model '" + model.name + "': " + what);
    };
    if (model.dim < 1 || model.noise_count < 1 || model.invariant_count < 1) {
        fail("dim, noise_count and invariant_count must be >= 1");
    }
    if (static_cast<Eigen::Index>(model.diffusion.size()) != model.noise_count ||
        static_cast<Eigen::Index>(model.diffusion_jacobian.size()) != model.noise_count) {
        fail("diffusion fields do not match noise_count");
    }
    check_dimension(model, x);
    if (model.drift(x).size() != model.dim) fail("drift has wrong length");
    for (Eigen::Index r = 0; r < model.noise_count; ++r) {
        if (model.diffusion[r](x).size() != model.dim) fail("diffusion field has wrong length");
        const auto jac = model.diffusion_jacobian[r](x);
        if (jac.rows() != model.dim || jac.cols() != model.dim) fail("diffusion Jacobian has wrong shape");
    }
    if (model.invariants(x).size() != model.invariant_count) fail("invariants have wrong length");
    const auto ijac = model.invariant_jacobian(x);
    if (ijac.rows() != model.invariant_count || ijac.cols() != model.dim) {
        fail("invariant Jacobian has wrong shape");
    }
}

template <class Scalar>
struct ConservationReport
{
    Scalar drift_residual = 0;     // max |I'(x) f(x)|
    Scalar diffusion_residual = 0; // max |I'(x) g_r(x)| over r
    std::size_t worst_point = 0;
    Scalar tol = 0;
    bool passed = false;
};

/// Numerical check of I'(x) f(x) = 0 and I'(x) g_r(x) = 0 at the given points.
template <class Scalar>
ConservationReport<Scalar> validate_conservation(const ModelSpec<Scalar>& model,
                                                 const std::vector<Vector<Scalar>>& trial_points,
                                                 Scalar tol)
{
    if (trial_points.empty()) throw ModelError("validate_conservation needs at least one trial point");
    ConservationReport<Scalar> report;
    report.tol = tol;
    Scalar worst = -1;
    for (std::size_t i = 0; i < trial_points.size(); ++i) {
        const auto& x = trial_points[i];
        check_dimension(model, x);
        if (!x.allFinite()) throw ModelError("validate_conservation: non-finite trial point");
        const Matrix<Scalar> ijac = model.invariant_jacobian(x);
        const Scalar fres = (ijac * model.drift(x)).cwiseAbs().maxCoeff();
        Scalar gres = 0;
        for (Eigen::Index r = 0; r < model.noise_count; ++r) {
            gres = std::max(gres, Scalar((ijac * model.diffusion[r](x)).cwiseAbs().maxCoeff()));
        }
        report.drift_residual = std::max(report.drift_residual, fres);
        report.diffusion_residual = std::max(report.diffusion_residual, gres);
        if (std::max(fres, gres) > worst) {
            worst = std::max(fres, gres);
            report.worst_point = i;
        }
    }
    report.passed = report.drift_residual <= tol && report.diffusion_residual <= tol;
    return report;
}

/// Max over points and channel pairs of |(dg_r/dx) g_s - (dg_s/dx) g_r|.
template <class Scalar>
Scalar commutativity_residual(const ModelSpec<Scalar>& model, const std::vector<Vector<Scalar>>& trial_points)
{
    Scalar worst = 0;
    for (const auto& x : trial_points) {
        check_dimension(model, x);
        for (Eigen::Index r = 0; r < model.noise_count; ++r) {
            const Matrix<Scalar> jr = model.diffusion_jacobian[r](x);
            for (Eigen::Index s = r + 1; s < model.noise_count; ++s) {
                const Vector<Scalar> lhs = jr * model.diffusion[s](x);
                const Vector<Scalar> rhs = model.diffusion_jacobian[s](x) * model.diffusion[r](x);
                worst = std::max(worst, Scalar((lhs - rhs).cwiseAbs().maxCoeff()));
            }
        }
    }
    return worst;
}

template <class Scalar>
bool check_commutativity(const ModelSpec<Scalar>& model, const std::vector<Vector<Scalar>>& trial_points,
                         Scalar tol = Scalar(1e-10))
{
    return commutativity_residual(model, trial_points) <= tol;
}

/// Max relative error between invariant_jacobian and central differences of invariants.
/// Relative to max(1, |I'|_inf) so that vanishing gradients do not blow the ratio up.
template <class Scalar>
Scalar invariant_jacobian_fd_error(const ModelSpec<Scalar>& model, const std::vector<Vector<Scalar>>& trial_points,
                                   Scalar step = Scalar(1e-6))
{
    Scalar worst = 0;
    for (const auto& x : trial_points) {
        check_dimension(model, x);
        const Matrix<Scalar> analytic = model.invariant_jacobian(x);
        Matrix<Scalar> fd(model.invariant_count, model.dim);
        for (Eigen::Index j = 0; j < model.dim; ++j) {
            Vector<Scalar> xp = x, xm = x;
            xp[j] += step;
            xm[j] -= step;
            fd.col(j) = (model.invariants(xp) - model.invariants(xm)) / (Scalar(2) * step);
        }
        const Scalar scale = std::max(Scalar(1), Scalar(analytic.cwiseAbs().maxCoeff()));
        worst = std::max(worst, Scalar((fd - analytic).cwiseAbs().maxCoeff() / scale));
    }
    return worst;
}

/// Uniform draws from the model's validation box.
template <class Scalar>
std::vector<Vector<Scalar>> sample_states(const ModelSpec<Scalar>& model, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::vector<Vector<Scalar>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vector<Scalar> x(model.dim);
        for (Eigen::Index j = 0; j < model.dim; ++j) {
            std::uniform_real_distribution<double> u(double(model.box_lower[j]), double(model.box_upper[j]));
            x[j] = Scalar(u(gen));
        }
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace parapath
