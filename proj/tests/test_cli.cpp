#include <parapath/cli.hpp>
#include <parapath/noise.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace parapath;

namespace {

struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "parapath");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("parapath_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("list-models")
{
    const auto a = invoke({"list-models"});
    CHECK(a.code == 0);
    CHECK(a.out.find("kubo d=2 m=1 l=1") != std::string::npos);
    CHECK(a.out.find("pendulum d=2 m=2 l=1") != std::string::npos);
    CHECK(a.out.find("lotka_volterra d=3 m=1 l=2") != std::string::npos);
    CHECK(invoke({"list-models"}).out == a.out);
    CHECK(lines(a.out).size() == 3);
}

TEST_CASE("format_real uses 17 significant digits")
{
    CHECK(cli::format_real(0.1) == "0.10000000000000001");
    CHECK(cli::format_real(1.0) == "1");
    CHECK(cli::format_real(0.3) == "0.29999999999999999");
}

TEST_CASE("run with G = F and J = 1 stops at k = 1")
{
    const auto dir = scratch("degenerate");
    const auto r = invoke({"run", "--model", "pendulum", "--T", "1", "--dT", "0.1", "--J", "1", "--coarse", "mil",
                           "--fine", "mil", "--paths", "5", "--workers", "2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto conv = lines(slurp(dir / "convergence.csv"));
    REQUIRE(conv.size() == 3);
    CHECK(conv[0] == "k,mse,stopped");
    CHECK(conv[2].starts_with("1,"));
    CHECK(conv[2].ends_with(",1"));
    const auto inv = lines(slurp(dir / "invariants.csv"));
    CHECK(inv[0] == "t,err_I1_max,err_I1_mean");
    CHECK(inv.size() == 12);
}

TEST_CASE("run output does not depend on the worker count")
{
    const auto a = scratch("w1"), b = scratch("w3");
    const std::vector<std::string> common{"run", "--model", "lotka_volterra", "--T", "1", "--dT", "0.05", "--J", "5",
                                          "--coarse", "eulerP", "--fine", "milP", "--project-correction", "--paths", "7"};
    auto args_a = common, args_b = common;
    args_a.insert(args_a.end(), {"--workers", "1", "--out", a.string()});
    args_b.insert(args_b.end(), {"--workers", "3", "--out", b.string()});
    REQUIRE(invoke(args_a).code == 0);
    REQUIRE(invoke(args_b).code == 0);
    CHECK(slurp(a / "convergence.csv") == slurp(b / "convergence.csv"));
    CHECK(slurp(a / "invariants.csv") == slurp(b / "invariants.csv"));
    CHECK(lines(slurp(a / "invariants.csv"))[0] == "t,err_I1_max,err_I2_max,err_I1_mean,err_I2_mean");
}

TEST_CASE("config file with flag overrides")
{
    const auto dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "run.json");
        cfg << R"({"model": "kubo", "params": {"c": 0.3}, "T": 1, "dT": 0.1, "J": 2, "coarse": "euler",
                   "fine": "euler", "paths": 3, "kmax": 2, "out": ")"
            << (dir / "from_file").string() << R"("})";
    }
    auto r = invoke({"run", "--config", (dir / "run.json").string(), "--kmax", "4", "--workers", "1"});
    REQUIRE(r.code == 0);
    // kmax from the flag (4) wins over the file (2); output directory comes from the file
    const auto conv = lines(slurp(dir / "from_file" / "convergence.csv"));
    CHECK(conv.size() >= 2);
    CHECK(conv.size() <= 6);

    {
        std::ofstream bad(dir / "bad.json");
        bad << R"({"model": "kubo", "colour": "blue"})";
    }
    CHECK(invoke({"run", "--config", (dir / "bad.json").string()}).code == 1);
    {
        std::ofstream broken(dir / "broken.json");
        broken << "{not json";
    }
    CHECK(invoke({"run", "--config", (dir / "broken.json").string()}).code == 1);
    CHECK(invoke({"run", "--config", (dir / "missing.json").string()}).code == 1);
}

TEST_CASE("usage and configuration errors exit with 1")
{
    const auto dir = scratch("errors");
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"run", "--bogus"}).code == 1);
    CHECK(invoke({"run", "--model", "duffing", "--out", dir.string()}).code == 1);
    CHECK(invoke({"run", "--coarse", "rk4", "--out", dir.string()}).code == 1);
    CHECK(invoke({"run", "--T", "1", "--dT", "0.3", "--out", dir.string()}).code == 1);
    CHECK(invoke({"run", "--param", "c=abc", "--out", dir.string()}).code == 1);
    CHECK(invoke({"run", "--param", "q=1", "--out", dir.string()}).code == 1);
    CHECK(invoke({"run", "--T", "1", "--dT", "0.5", "--J", "1", "--paths", "1", "--series-k", "9", "--out",
                  dir.string()})
              .code == 1);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("numerical failures exit with 2")
{
    const auto dir = scratch("numerical");
    const auto r = invoke({"run", "--T", "5", "--dT", "5", "--J", "1", "--coarse", "mid", "--fine", "mid", "--paths",
                           "1", "--workers", "1", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("numerical failure") != std::string::npos);
    CHECK(r.err.find("[path 0]") != std::string::npos);
}

TEST_CASE("order subcommand")
{
    const auto dir = scratch("order");
    const auto r = invoke({"order", "--model", "kubo", "--schemes", "euler,milP", "--h", "0.25,0.125,0.0625",
                           "--h-ref", "0.0078125", "--paths", "20", "--workers", "2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(dir / "order.csv"));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == "scheme,h,mse,slope");
    CHECK(rows[1].starts_with("euler,0.25,"));
    CHECK(rows[6].starts_with("milP,0.0625,"));
    CHECK(r.out.find("milP slope") != std::string::npos);
    CHECK(invoke({"order", "--h", "0.3,0.2,0.1", "--out", dir.string()}).code == 1);
}

TEST_CASE("PARAPATH_WORKERS is the fallback worker count")
{
    ::setenv("PARAPATH_WORKERS", "3", 1);
    CHECK(cli::resolve_workers(std::nullopt) == 3);
    CHECK(cli::resolve_workers(5u) == 5);
    ::setenv("PARAPATH_WORKERS", "zero", 1);
    CHECK_THROWS_AS(cli::resolve_workers(std::nullopt), ConfigError);
    ::unsetenv("PARAPATH_WORKERS");
    CHECK(cli::resolve_workers(std::nullopt) >= 1);
}

TEST_CASE("noise dumps reload to the generated grids")
{
    const auto dir = scratch("dump");
    const auto r = invoke({"run", "--model", "pendulum", "--T", "0.5", "--dT", "0.1", "--J", "3", "--paths", "2",
                           "--seed", "77", "--workers", "1", "--out", dir.string(), "--dump-noise",
                           (dir / "noise").string()});
    REQUIRE(r.code == 0);
    std::ifstream in(dir / "noise" / "path_1.bin", std::ios::binary);
    CHECK(load_grid(in) == generate_path(77, 1, 5, 3, 2, 0.1 / 3));
}
