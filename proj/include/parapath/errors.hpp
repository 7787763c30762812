#pragma once
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace parapath {

/// Base class of every numerical or configuration failure raised by the library.
///
/// Failures raised deep inside a propagator can be annotated with the coarse
/// interval and fine step at which they happened while unwinding; `what()`
/// reflects the annotation.
class Error : public std::exception
{
public:
    explicit Error(std::string message) : message_(std::move(message)) { rebuild(); }

    const char* what() const noexcept override { return full_.c_str(); }
    const std::string& message() const noexcept { return message_; }

    std::optional<std::size_t> interval() const noexcept { return interval_; }
    std::optional<std::size_t> step() const noexcept { return step_; }
    std::optional<std::size_t> path() const noexcept { return path_; }

    void annotate(std::optional<std::size_t> interval, std::optional<std::size_t> step = std::nullopt)
    {
        if (interval && !interval_) interval_ = interval;
        if (step && !step_) step_ = step;
        rebuild();
    }

    void annotate_path(std::size_t path)
    {
        if (!path_) path_ = path;
        rebuild();
    }

private:
    void rebuild()
    {
        full_ = message_;
        if (path_) full_ += " [path " + std::to_string(*path_) + "]";
        if (interval_) full_ += " [interval " + std::to_string(*interval_) + "]";
        if (step_) full_ += " [step " + std::to_string(*step_) + "]";
    }

    std::string message_;
    std::string full_;
    std::optional<std::size_t> interval_;
    std::optional<std::size_t> step_;
    std::optional<std::size_t> path_;
};

/// Bad model name, missing parameter, wrong vector length.
class ModelError : public Error
{
public:
    using Error::Error;
};

/// Invalid sizes or options in a configuration object.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// A step produced a non-finite state.
class IntegrationError : public Error
{
public:
    using Error::Error;
};

/// Requested scheme cannot be applied to the model (e.g. Milstein without commutative noise).
class UnsupportedSchemeError : public Error
{
public:
    using Error::Error;
};

/// Implicit midpoint fixed-point iteration did not reach tolerance.
class ImplicitSolveError : public Error
{
public:
    ImplicitSolveError(std::string message, double residual)
        : Error(std::move(message)), residual_(residual)
    {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Constraint solve onto the invariant manifold failed.
class ProjectionError : public Error
{
public:
    enum class Kind
    {
        singular,
        not_converged
    };

    ProjectionError(Kind kind, std::string message, double residual)
        : Error(std::move(message)), kind_(kind), residual_(residual)
    {}
    Kind kind() const noexcept { return kind_; }
    double residual() const noexcept { return residual_; }

private:
    Kind kind_;
    double residual_;
};

} // namespace parapath
