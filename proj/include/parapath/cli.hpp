#pragma once
#include <parapath/convergence.hpp>
#include <parapath/metrics.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace parapath::cli {

/// Everything a `run` invocation needs. Mirrors the flat JSON config file.
struct RunManifest
{
    std::string model = "kubo";
    std::map<std::string, double> params; // empty entries fall back to the model defaults
    double T = 10;
    double dT = 0.1;
    std::size_t J = 20;
    std::string coarse = "euler";
    std::string fine = "euler";
    bool project_propagators = false;
    bool project_correction = false;
    std::size_t paths = 100;
    std::uint64_t seed = 1;
    std::size_t kmax = 1000; // clamped to N by the driver
    double stop_tol = 1e-12;
    std::string out = ".";
    std::optional<unsigned> workers;
    std::optional<std::size_t> series_k; // iterate written to invariants.csv; default: last
    std::string dump_noise;              // directory for binary noise dumps, empty = off
};

/// Configuration of the `order` subcommand.
struct OrderManifest
{
    std::string model = "kubo";
    std::map<std::string, double> params;
    std::vector<std::string> schemes{"euler", "mil", "mid", "eulerP", "milP"};
    std::vector<double> step_sizes{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    double h_ref = 1.0 / 16384;
    std::string reference = "mil";
    double T = 1;
    std::size_t paths = 500;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::optional<unsigned> workers;
};

/// Entry point shared by the executable and the tests. Exit codes: 0 success,
/// 1 configuration or usage error, 2 numerical failure.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// %.17g formatting, locale independent.
std::string format_real(double value);

void write_convergence_csv(const ExperimentReport<double>& report, std::ostream& out);
void write_invariants_csv(const InvariantSeries<double>& series, std::ostream& out);
void write_order_csv(const OrderStudyResult<double>& result, std::ostream& out);
std::string list_models();

/// Builds the model, grids and configuration described by `manifest` and runs parareal.
ExperimentReport<double> execute(const RunManifest& manifest, unsigned workers);

/// Worker count: explicit value, else $PARAPATH_WORKERS, else hardware concurrency.
unsigned resolve_workers(std::optional<unsigned> flag);

} // namespace parapath::cli
