#include <parapath/errors.hpp>
#include <parapath/noise.hpp>
#include <parapath/philox.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace parapath {

namespace {

constexpr std::size_t kMaxIndex = std::numeric_limits<std::uint32_t>::max();

void check_sizes(std::size_t n, std::size_t j, std::size_t m, double dt_fine)
{
    if (n < 1 || j < 1 || m < 1) throw ConfigError("noise grid sizes N, J, m must all be >= 1");
    if (n > kMaxIndex || j > kMaxIndex || m > kMaxIndex) throw ConfigError("noise grid size exceeds 2^32");
    if (!(dt_fine > 0) || !std::isfinite(dt_fine)) throw ConfigError("noise grid dt_fine must be positive");
}

void put_u64(std::ostream& out, std::uint64_t v)
{
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in)
{
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("truncated noise grid stream");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
}

} // namespace

NoiseGrid::NoiseGrid(std::uint64_t seed, std::uint64_t path_index, std::size_t coarse_count,
                     std::size_t fine_per_coarse, std::size_t noise_count, double dt_fine,
                     std::vector<double> increments)
    : seed_(seed), path_index_(path_index), coarse_count_(coarse_count), fine_per_coarse_(fine_per_coarse),
      noise_count_(noise_count), dt_fine_(dt_fine), increments_(std::move(increments))
{
    check_sizes(coarse_count, fine_per_coarse, noise_count, dt_fine);
    if (increments_.size() != coarse_count * fine_per_coarse * noise_count) {
        throw ConfigError("noise grid increment count does not match N*J*m");
    }
}

void NoiseGrid::check_interval(std::size_t n) const
{
    if (n >= coarse_count_) {
        throw ConfigError("interval index " + std::to_string(n) + " out of range [0, " +
                          std::to_string(coarse_count_) + ")");
    }
}

std::span<const double> NoiseGrid::fine_increments(std::size_t n, std::size_t j) const
{
    check_interval(n);
    if (j >= fine_per_coarse_) throw ConfigError("fine step index " + std::to_string(j) + " out of range");
    return std::span<const double>(increments_).subspan((n * fine_per_coarse_ + j) * noise_count_, noise_count_);
}

double NoiseGrid::fine_increment(std::size_t n, std::size_t j, std::size_t r) const
{
    if (r >= noise_count_) throw ConfigError("noise channel " + std::to_string(r) + " out of range");
    return fine_increments(n, j)[r];
}

double NoiseGrid::coarse_increment(std::size_t n, std::size_t r) const
{
    check_interval(n);
    if (r >= noise_count_) throw ConfigError("noise channel " + std::to_string(r) + " out of range");
    const double* p = increments_.data() + n * fine_per_coarse_ * noise_count_ + r;
    double sum = 0.0;
    for (std::size_t j = 0; j < fine_per_coarse_; ++j) sum += p[j * noise_count_];
    return sum;
}

NoiseGrid generate_path(std::uint64_t seed, std::uint64_t path_index, std::size_t coarse_count,
                        std::size_t fine_per_coarse, std::size_t noise_count, double dt_fine)
{
    check_sizes(coarse_count, fine_per_coarse, noise_count, dt_fine);
    if (path_index > kMaxIndex) throw ConfigError("path index exceeds 2^32");
    const auto key = Philox4x32::key_from_seed(seed);
    const double scale = std::sqrt(dt_fine);
    std::vector<double> inc(coarse_count * fine_per_coarse * noise_count);
    std::size_t idx = 0;
    for (std::size_t n = 0; n < coarse_count; ++n) {
        for (std::size_t j = 0; j < fine_per_coarse; ++j) {
            for (std::size_t r = 0; r < noise_count; ++r) {
                const Philox4x32::Counter ctr{std::uint32_t(n), std::uint32_t(j), std::uint32_t(r),
                                              std::uint32_t(path_index)};
                inc[idx++] = scale * Philox4x32::normal(ctr, key);
            }
        }
    }
    return NoiseGrid(seed, path_index, coarse_count, fine_per_coarse, noise_count, dt_fine, std::move(inc));
}

NoiseGrid regroup(const NoiseGrid& grid, std::size_t fine_per_coarse)
{
    const std::size_t total = grid.coarse_count() * grid.fine_per_coarse();
    if (fine_per_coarse < 1 || total % fine_per_coarse != 0) {
        throw ConfigError("cannot regroup " + std::to_string(total) + " steps into intervals of " +
                          std::to_string(fine_per_coarse));
    }
    const auto inc = grid.increments();
    return NoiseGrid(grid.seed(), grid.path_index(), total / fine_per_coarse, fine_per_coarse, grid.noise_count(),
                     grid.dt_fine(), std::vector<double>(inc.begin(), inc.end()));
}

double truncated_increment(double dw, double dt, double k_trunc)
{
    const double bound = std::sqrt(2.0 * k_trunc * dt * std::abs(std::log(dt)));
    return std::clamp(dw, -bound, bound);
}

void save_grid(const NoiseGrid& grid, std::ostream& out)
{
    put_u64(out, grid.seed());
    put_u64(out, grid.path_index());
    put_u64(out, grid.coarse_count());
    put_u64(out, grid.fine_per_coarse());
    put_u64(out, grid.noise_count());
    put_u64(out, std::bit_cast<std::uint64_t>(grid.dt_fine()));
    for (double v : grid.increments()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw ConfigError("failed to write noise grid");
}

NoiseGrid load_grid(std::istream& in)
{
    const std::uint64_t seed = get_u64(in);
    const std::uint64_t path = get_u64(in);
    const std::uint64_t n = get_u64(in);
    const std::uint64_t j = get_u64(in);
    const std::uint64_t m = get_u64(in);
    const double dt = std::bit_cast<double>(get_u64(in));
    check_sizes(n, j, m, dt);
    std::vector<double> inc(n * j * m);
    for (double& v : inc) v = std::bit_cast<double>(get_u64(in));
    return NoiseGrid(seed, path, n, j, m, dt, std::move(inc));
}

} // namespace parapath
