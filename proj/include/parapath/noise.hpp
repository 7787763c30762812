#pragma once
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace parapath {

/// Wiener increments of one sample path on the finest grid: N coarse intervals,
/// J fine steps each, m channels, stored row-major as [n][j][r].
///
/// Coarse propagators see the left-to-right sum of the J fine increments of
/// their interval, so every propagator in a parareal run follows the same path.
class NoiseGrid
{
public:
    NoiseGrid() = default;
    NoiseGrid(std::uint64_t seed, std::uint64_t path_index, std::size_t coarse_count, std::size_t fine_per_coarse,
              std::size_t noise_count, double dt_fine, std::vector<double> increments);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t path_index() const noexcept { return path_index_; }
    std::size_t coarse_count() const noexcept { return coarse_count_; }
    std::size_t fine_per_coarse() const noexcept { return fine_per_coarse_; }
    std::size_t noise_count() const noexcept { return noise_count_; }
    double dt_fine() const noexcept { return dt_fine_; }
    double dt_coarse() const noexcept { return dt_fine_ * double(fine_per_coarse_); }

    /// The m increments of fine step j of interval n.
    std::span<const double> fine_increments(std::size_t n, std::size_t j) const;
    double fine_increment(std::size_t n, std::size_t j, std::size_t r) const;

    /// Sum over j = 0..J-1 of fine_increment(n, j, r), accumulated in that order.
    double coarse_increment(std::size_t n, std::size_t r) const;

    std::span<const double> increments() const noexcept { return increments_; }

    friend bool operator==(const NoiseGrid&, const NoiseGrid&) = default;

private:
    void check_interval(std::size_t n) const;

    std::uint64_t seed_ = 0;
    std::uint64_t path_index_ = 0;
    std::size_t coarse_count_ = 0;
    std::size_t fine_per_coarse_ = 0;
    std::size_t noise_count_ = 0;
    double dt_fine_ = 0;
    std::vector<double> increments_;
};

/// Draws N*J*m independent Normal(0, dt_fine) increments. Each value is a pure
/// function of (seed, path_index, n, j, r), so grids are reproducible bit for
/// bit no matter which thread generates them or in what order.
NoiseGrid generate_path(std::uint64_t seed, std::uint64_t path_index, std::size_t coarse_count,
                        std::size_t fine_per_coarse, std::size_t noise_count, double dt_fine);

/// Same increment sequence regrouped into intervals of `fine_per_coarse` steps.
/// The total step count must be divisible by it.
NoiseGrid regroup(const NoiseGrid& grid, std::size_t fine_per_coarse);

/// Clamps dw to [-A, A], A = sqrt(2 k dt |ln dt|).
double truncated_increment(double dw, double dt, double k_trunc);

/// Binary layout: seed, path_index, N, J, m as little-endian uint64, dt_fine as
/// little-endian IEEE double, then the N*J*m increments as little-endian doubles.
void save_grid(const NoiseGrid& grid, std::ostream& out);
NoiseGrid load_grid(std::istream& in);

} // namespace parapath
