#pragma once
#include <Eigen/Core>
#include <concepts>
#include <vector>

namespace parapath {

template <class Scalar_, int Rows_ = Eigen::Dynamic>
using Vector = Eigen::Matrix<Scalar_, Rows_, 1>;

template <class Scalar_, int Rows_ = Eigen::Dynamic, int Cols_ = Eigen::Dynamic>
using Matrix = Eigen::Matrix<Scalar_, Rows_, Cols_>;

// X_n at the coarse points T_0..T_N, or any ordered list of states.
template <class Scalar_>
using Trajectory = std::vector<Vector<Scalar_>>;

template <class T>
concept RealScalar = std::floating_point<T>;

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v)
{
    return v.allFinite();
}

} // namespace parapath
