#include <parapath/cli.hpp>
#include <parapath/models.hpp>
#include <parapath/parallel.hpp>
#include <parapath/parareal.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace parapath::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_real(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_convergence_csv(const ExperimentReport<double>& report, std::ostream& out)
{
    out << "k,mse,stopped\n";
    for (std::size_t k = 0; k < report.per_iteration_mse.size(); ++k) {
        const bool stopped = report.converged && k == report.stop_iteration;
        out << k << ',' << format_real(report.per_iteration_mse[k]) << ',' << (stopped ? 1 : 0) << '\n';
    }
}

void write_invariants_csv(const InvariantSeries<double>& series, std::ostream& out)
{
    const Eigen::Index l = series.max.cols();
    out << 't';
    for (Eigen::Index i = 1; i <= l; ++i) out << ",err_I" << i << "_max";
    for (Eigen::Index i = 1; i <= l; ++i) out << ",err_I" << i << "_mean";
    out << '\n';
    for (std::size_t t = 0; t < series.times.size(); ++t) {
        out << format_real(series.times[t]);
        const auto row = Eigen::Index(t);
        for (Eigen::Index i = 0; i < l; ++i) out << ',' << format_real(series.max(row, i));
        for (Eigen::Index i = 0; i < l; ++i) out << ',' << format_real(series.mean(row, i));
        out << '\n';
    }
}

void write_order_csv(const OrderStudyResult<double>& result, std::ostream& out)
{
    out << "scheme,h,mse,slope\n";
    for (const auto& row : result.rows) {
        double slope = 0;
        for (const auto& [name, s] : result.slopes) {
            if (name == row.scheme) slope = s;
        }
        out << row.scheme << ',' << format_real(row.h) << ',' << format_real(row.mse) << ',' << format_real(slope)
            << '\n';
    }
}

std::string list_models()
{
    std::ostringstream os;
    for (const auto& name : model_names()) {
        const auto params = default_params(name);
        const auto model = make_model<double>(name, params);
        os << name << " d=" << model.dim << " m=" << model.noise_count << " l=" << model.invariant_count << " x0=(";
        for (Eigen::Index i = 0; i < model.dim; ++i) os << (i ? ", " : "") << format_real(model.default_x0[i]);
        os << ')';
        for (const auto& [key, value] : params) os << ' ' << key << '=' << format_real(value);
        os << '\n';
    }
    return os.str();
}

unsigned resolve_workers(std::optional<unsigned> flag)
{
    if (flag) {
        if (*flag < 1) throw ConfigError("--workers must be >= 1");
        return *flag;
    }
    if (const char* env = std::getenv("PARAPATH_WORKERS"); env && *env) {
        unsigned value = 0;
        const auto* end = env + std::char_traits<char>::length(env);
        const auto res = std::from_chars(env, end, value);
        if (res.ec != std::errc{} || res.ptr != end || value < 1) {
            throw ConfigError(std::string("invalid PARAPATH_WORKERS value '") + env + "'");
        }
        return value;
    }
    return default_workers();
}

namespace {

ModelSpec<double> build_model(const std::string& name, const std::map<std::string, double>& overrides)
{
    auto params = default_params<double>(name);
    for (const auto& [key, value] : overrides) {
        if (!params.contains(key)) throw ModelError("model '" + name + "' has no parameter '" + key + "'");
        params[key] = value;
    }
    return make_model<double>(name, params);
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items)
{
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + item + "'");
        const std::string value = item.substr(eq + 1);
        double v = 0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
            throw ConfigError("--param value '" + value + "' is not a number");
        }
        out[item.substr(0, eq)] = v;
    }
    return out;
}

json read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        json doc = json::parse(in);
        if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config file parse error: ") + e.what());
    }
}

std::map<std::string, double> json_params(const json& value)
{
    if (!value.is_object()) throw ConfigError("config 'params' must be an object");
    std::map<std::string, double> out;
    for (const auto& [key, v] : value.items()) out[key] = v.get<double>();
    return out;
}

void apply_config(const json& doc, RunManifest& m)
{
    for (const auto& [key, v] : doc.items()) {
        if (key == "model") m.model = v.get<std::string>();
        else if (key == "params") m.params = json_params(v);
        else if (key == "T") m.T = v.get<double>();
        else if (key == "dT") m.dT = v.get<double>();
        else if (key == "J") m.J = v.get<std::size_t>();
        else if (key == "coarse") m.coarse = v.get<std::string>();
        else if (key == "fine") m.fine = v.get<std::string>();
        else if (key == "project_propagators") m.project_propagators = v.get<bool>();
        else if (key == "project_correction") m.project_correction = v.get<bool>();
        else if (key == "paths") m.paths = v.get<std::size_t>();
        else if (key == "seed") m.seed = v.get<std::uint64_t>();
        else if (key == "kmax") m.kmax = v.get<std::size_t>();
        else if (key == "stop_tol") m.stop_tol = v.get<double>();
        else if (key == "out") m.out = v.get<std::string>();
        else if (key == "workers") m.workers = v.get<unsigned>();
        else if (key == "series_k") m.series_k = v.get<std::size_t>();
        else if (key == "dump_noise") m.dump_noise = v.get<std::string>();
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_config(const json& doc, OrderManifest& m)
{
    for (const auto& [key, v] : doc.items()) {
        if (key == "model") m.model = v.get<std::string>();
        else if (key == "params") m.params = json_params(v);
        else if (key == "schemes") m.schemes = v.get<std::vector<std::string>>();
        else if (key == "h") m.step_sizes = v.get<std::vector<double>>();
        else if (key == "h_ref") m.h_ref = v.get<double>();
        else if (key == "reference") m.reference = v.get<std::string>();
        else if (key == "T") m.T = v.get<double>();
        else if (key == "paths") m.paths = v.get<std::size_t>();
        else if (key == "seed") m.seed = v.get<std::uint64_t>();
        else if (key == "out") m.out = v.get<std::string>();
        else if (key == "workers") m.workers = v.get<unsigned>();
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

template <class T>
void override_if(const CLI::Option* opt, const T& value, T& dst)
{
    if (opt->count() > 0) dst = value;
}

fs::path prepare_output(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

int cmd_run(const RunManifest& manifest, std::ostream& out, std::ostream& err)
{
    const unsigned workers = resolve_workers(manifest.workers);
    const fs::path dir = prepare_output(manifest.out);
    const auto report = execute(manifest, workers);

    const std::size_t series_k = manifest.series_k.value_or(report.stop_iteration);
    if (series_k >= report.invariant_series.size()) {
        throw ConfigError("--series-k " + std::to_string(series_k) + " exceeds the last iteration " +
                          std::to_string(report.stop_iteration));
    }
    {
        auto f = open_output(dir / "convergence.csv");
        write_convergence_csv(report, f);
    }
    {
        auto f = open_output(dir / "invariants.csv");
        write_invariants_csv(report.invariant_series[series_k], f);
    }

    out << "model " << report.model_name << ", paths " << report.path_count << ", N "
        << report.config.interval_count() << ", J " << report.config.J << ", G " << label(report.config.coarse)
        << ", F " << label(report.config.fine)
        << ", correction projection " << (report.config.correction_projection ? "on" : "off") << '\n';
    out << "stopped at k = " << report.stop_iteration << " with mse " << format_real(report.per_iteration_mse.back())
        << (report.converged ? "" : " (stop_tol not reached)") << '\n';
    out << "wall time [s]: reference " << report.wall_times.reference << ", initialize "
        << report.wall_times.initialize << ", fine sweeps " << report.wall_times.fine_sweep << ", corrections "
        << report.wall_times.correct << '\n';
    if (!report.converged) err << "warning: stop_tol " << manifest.stop_tol << " not reached\n";
    return 0;
}

int cmd_order(const OrderManifest& manifest, std::ostream& out)
{
    const unsigned workers = resolve_workers(manifest.workers);
    const fs::path dir = prepare_output(manifest.out);
    const auto model = build_model(manifest.model, manifest.params);

    std::vector<PropagatorSpec<double>> schemes;
    for (const auto& s : manifest.schemes) schemes.push_back(parse_propagator(s));
    OrderStudySetup<double> setup;
    setup.T = manifest.T;
    setup.step_sizes = manifest.step_sizes;
    setup.reference_step = manifest.h_ref;
    setup.reference_scheme = parse_propagator(manifest.reference);
    setup.paths = manifest.paths;
    setup.seed = manifest.seed;
    const auto result = strong_order_study(model, model.default_x0, schemes, setup, workers);

    auto f = open_output(dir / "order.csv");
    write_order_csv(result, f);
    for (const auto& [name, slope] : result.slopes) out << name << " slope " << format_real(slope) << '\n';
    return 0;
}

} // namespace

ExperimentReport<double> execute(const RunManifest& manifest, unsigned workers)
{
    const auto model = build_model(manifest.model, manifest.params);
    PararealConfig<double> cfg;
    cfg.T = manifest.T;
    cfg.dT = manifest.dT;
    cfg.J = manifest.J;
    cfg.coarse = parse_propagator(manifest.coarse);
    cfg.fine = parse_propagator(manifest.fine);
    if (manifest.project_propagators) cfg.coarse.projected = cfg.fine.projected = true;
    cfg.correction_projection = manifest.project_correction;
    cfg.k_max = manifest.kmax;
    cfg.stop_tol = manifest.stop_tol;
    cfg.validate();
    if (manifest.paths < 1) throw ConfigError("--paths must be >= 1");

    const std::size_t n_count = cfg.interval_count();
    std::vector<NoiseGrid> grids(manifest.paths);
    parallel_for(grids.size(), workers, [&](std::size_t p) {
        grids[p] = generate_path(manifest.seed, p, n_count, cfg.J, std::size_t(model.noise_count), cfg.dt_fine());
    });
    if (!manifest.dump_noise.empty()) {
        const fs::path dir = prepare_output(manifest.dump_noise);
        for (const auto& g : grids) {
            auto f = open_output(dir / ("path_" + std::to_string(g.path_index()) + ".bin"));
            save_grid(g, f);
        }
    }
    return run(model, cfg, model.default_x0, grids, workers);
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Parareal integration of Stratonovich SDEs with conserved quantities"};
    app.name("parapath");
    app.require_subcommand(1);

    // run
    RunManifest rf;
    std::vector<std::string> run_params;
    std::string run_config;
    unsigned run_workers = 1;
    std::size_t run_series_k = 0;
    auto* run_cmd = app.add_subcommand("run", "Parareal experiment; writes convergence.csv and invariants.csv");
    run_cmd->add_option("--config", run_config, "Flat JSON file with run settings; flags override it");
    auto* o_model = run_cmd->add_option("--model", rf.model, "kubo | pendulum | lotka_volterra");
    auto* o_param = run_cmd->add_option("--param", run_params, "Model parameter override key=value");
    auto* o_T = run_cmd->add_option("--T", rf.T, "Time horizon");
    auto* o_dT = run_cmd->add_option("--dT", rf.dT, "Coarse step");
    auto* o_J = run_cmd->add_option("--J", rf.J, "Fine steps per coarse step");
    auto* o_coarse = run_cmd->add_option("--coarse", rf.coarse, "Coarse scheme: euler, mil, mid (suffix P = projected)");
    auto* o_fine = run_cmd->add_option("--fine", rf.fine, "Fine scheme: euler, mil, mid (suffix P = projected)");
    auto* o_pp = run_cmd->add_flag("--project-propagators", rf.project_propagators, "Project after every G/F step");
    auto* o_pc = run_cmd->add_flag("--project-correction", rf.project_correction, "Project every corrected state");
    auto* o_paths = run_cmd->add_option("--paths", rf.paths, "Number of sample paths");
    auto* o_seed = run_cmd->add_option("--seed", rf.seed, "Base seed of the noise generator");
    auto* o_kmax = run_cmd->add_option("--kmax", rf.kmax, "Maximum number of iterations");
    auto* o_tol = run_cmd->add_option("--stop-tol", rf.stop_tol, "Mean-square stopping tolerance");
    auto* o_out = run_cmd->add_option("--out", rf.out, "Output directory");
    auto* o_workers = run_cmd->add_option("--workers", run_workers, "Worker threads (default $PARAPATH_WORKERS or all cores)");
    auto* o_series = run_cmd->add_option("--series-k", run_series_k, "Iteration written to invariants.csv (default: last)");
    auto* o_dump = run_cmd->add_option("--dump-noise", rf.dump_noise, "Write each noise grid to <dir>/path_<p>.bin");

    // order
    OrderManifest of;
    std::vector<std::string> order_params;
    std::string order_config;
    unsigned order_workers = 1;
    auto* order_cmd = app.add_subcommand("order", "Strong-order study; writes order.csv");
    order_cmd->set_help_flag("--help", "Print this help message and exit");
    order_cmd->add_option("--config", order_config, "Flat JSON file with study settings; flags override it");
    auto* q_model = order_cmd->add_option("--model", of.model, "kubo | pendulum | lotka_volterra");
    auto* q_param = order_cmd->add_option("--param", order_params, "Model parameter override key=value");
    auto* q_schemes = order_cmd->add_option("--schemes", of.schemes, "Schemes to study")->delimiter(',');
    auto* q_h = order_cmd->add_option("--h", of.step_sizes, "Step sizes")->delimiter(',');
    auto* q_href = order_cmd->add_option("--h-ref", of.h_ref, "Reference step size");
    auto* q_ref = order_cmd->add_option("--reference", of.reference, "Reference scheme");
    auto* q_T = order_cmd->add_option("--T", of.T, "Time horizon");
    auto* q_paths = order_cmd->add_option("--paths", of.paths, "Number of sample paths");
    auto* q_seed = order_cmd->add_option("--seed", of.seed, "Base seed");
    auto* q_out = order_cmd->add_option("--out", of.out, "Output directory");
    auto* q_workers = order_cmd->add_option("--workers", order_workers, "Worker threads");

    app.add_subcommand("list-models", "Print the built-in models");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) {
            RunManifest m;
            if (!run_config.empty()) apply_config(read_config(run_config), m);
            override_if(o_model, rf.model, m.model);
            if (o_param->count() > 0) {
                for (const auto& [k, v] : parse_params(run_params)) m.params[k] = v;
            }
            override_if(o_T, rf.T, m.T);
            override_if(o_dT, rf.dT, m.dT);
            override_if(o_J, rf.J, m.J);
            override_if(o_coarse, rf.coarse, m.coarse);
            override_if(o_fine, rf.fine, m.fine);
            override_if(o_pp, rf.project_propagators, m.project_propagators);
            override_if(o_pc, rf.project_correction, m.project_correction);
            override_if(o_paths, rf.paths, m.paths);
            override_if(o_seed, rf.seed, m.seed);
            override_if(o_kmax, rf.kmax, m.kmax);
            override_if(o_tol, rf.stop_tol, m.stop_tol);
            override_if(o_out, rf.out, m.out);
            override_if(o_dump, rf.dump_noise, m.dump_noise);
            if (o_workers->count() > 0) m.workers = run_workers;
            if (o_series->count() > 0) m.series_k = run_series_k;
            return cmd_run(m, out, err);
        }
        if (order_cmd->parsed()) {
            OrderManifest m;
            if (!order_config.empty()) apply_config(read_config(order_config), m);
            override_if(q_model, of.model, m.model);
            if (q_param->count() > 0) {
                for (const auto& [k, v] : parse_params(order_params)) m.params[k] = v;
            }
            override_if(q_schemes, of.schemes, m.schemes);
            override_if(q_h, of.step_sizes, m.step_sizes);
            override_if(q_href, of.h_ref, m.h_ref);
            override_if(q_ref, of.reference, m.reference);
            override_if(q_T, of.T, m.T);
            override_if(q_paths, of.paths, m.paths);
            override_if(q_seed, of.seed, m.seed);
            override_if(q_out, of.out, m.out);
            if (q_workers->count() > 0) m.workers = order_workers;
            return cmd_order(m, out);
        }
        out << list_models();
        return 0;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const ModelError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        err << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}

} // namespace parapath::cli
