#pragma once
#include <parapath/projection.hpp>
#include <parapath/schemes.hpp>

#include <cmath>
#include <cstddef>

namespace parapath {

/// Parareal setup: horizon T split into N = T / dT coarse intervals of J fine steps each.
template <class Scalar>
struct PararealConfig
{
    Scalar T = 10;
    Scalar dT = Scalar(0.1);
    std::size_t J = 20;
    PropagatorSpec<Scalar> coarse;
    PropagatorSpec<Scalar> fine;
    bool correction_projection = false;
    std::size_t k_max = 50;
    Scalar stop_tol = Scalar(1e-12);
    ProjectionConfig<Scalar> projection;

    /// N = T / dT, which must be integral up to a relative 1e-9.
    std::size_t interval_count() const
    {
        const double ratio = double(T) / double(dT);
        const double rounded = std::round(ratio);
        if (!(rounded >= 1) || std::abs(ratio - rounded) > 1e-9 * rounded) {
            throw ConfigError("T / dT must be a positive integer (got " + std::to_string(ratio) + ")");
        }
        return static_cast<std::size_t>(rounded);
    }

    Scalar dt_fine() const { return dT / Scalar(J); }

    void validate() const
    {
        if (!(T > 0) || !(dT > 0)) throw ConfigError("T and dT must be positive");
        if (J < 1) throw ConfigError("J must be >= 1");
        if (k_max < 1) throw ConfigError("k_max must be >= 1");
        if (!(stop_tol >= 0)) throw ConfigError("stop_tol must be non-negative");
        (void)interval_count();
        coarse.validate();
        fine.validate();
        projection.validate();
    }
};

} // namespace parapath
