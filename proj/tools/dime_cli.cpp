// Command-line front end: every estimator and experiment behind one binary
// with deterministic seeding and machine-readable output.
//
// Exit codes: 0 success, 2 rejected input / flag validation, 3 numerical
// failure, 4 I/O failure.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dime/dime.hpp"
#include "dime/entropy.hpp"
#include "dime/error.hpp"
#include "dime/harness.hpp"
#include "dime/kernels.hpp"
#include "dime/rng.hpp"
#include "dime/synthdata.hpp"
#include "table_io.hpp"

namespace {

using dime::ValidationError;
using json = nlohmann::json;

constexpr const char* kVersion = "1.0.0";

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

double parse_double(const std::string& text, const std::string& flag) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    require(res.ec == std::errc() && res.ptr == end && std::isfinite(v),
            flag + ": '" + text + "' is not a finite number");
    return v;
}

// "auto" -> sqrt(d/2) (fixed-bandwidth convention), "init-sqrt-d" -> sqrt(d)
// (optimizer initialization), anything else -> literal positive number.
double resolve_sigma(const std::string& text, std::size_t d, const std::string& flag) {
    if (text == "auto") return std::sqrt(static_cast<double>(d) / 2.0);
    if (text == "init-sqrt-d") return std::sqrt(static_cast<double>(d));
    const double v = parse_double(text, flag);
    require(v > 0.0, flag + " must be > 0");
    return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find(',', pos);
        const std::string item =
            text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        require(!item.empty(), flag + ": empty list element");
        out.push_back(parse_double(item, flag));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    require(!out.empty(), flag + ": empty list");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text,
                                         const std::string& flag) {
    std::vector<std::size_t> out;
    for (double v : parse_double_list(text, flag)) {
        require(v >= 0.0 && v == std::floor(v), flag + ": expected integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

// ---- shared option bundles -------------------------------------------------

struct OutputOpts {
    std::string out;
    std::string format = "csv";

    dime::io::Format parsed_format() const { return dime::io::format_from_string(format); }
};

void add_output_opts(CLI::App* cmd, OutputOpts& opts, bool required) {
    auto* o = cmd->add_option("--out", opts.out, "output table path");
    if (required) o->required();
    cmd->add_option("--format", opts.format, "output format: csv or jsonl");
}

struct KernelOpts {
    std::string kernel = "gaussian";
    std::string sigma = "auto";
    std::string sigma_x;  // optional per-side overrides
    std::string sigma_y;

    dime::KernelFamily family() const { return dime::kernel_family_from_string(kernel); }
    double resolved_x(std::size_t d) const {
        return resolve_sigma(sigma_x.empty() ? sigma : sigma_x, d,
                             sigma_x.empty() ? "--sigma" : "--sigma-x");
    }
    double resolved_y(std::size_t d) const {
        return resolve_sigma(sigma_y.empty() ? sigma : sigma_y, d,
                             sigma_y.empty() ? "--sigma" : "--sigma-y");
    }
};

void add_kernel_opts(CLI::App* cmd, KernelOpts& opts, const char* sigma_default) {
    opts.sigma = sigma_default;
    cmd->add_option("--kernel", opts.kernel,
                    "gaussian | factorized-laplacian | elliptical-laplacian");
    cmd->add_option("--sigma", opts.sigma,
                    "bandwidth: number, 'auto' (sqrt(d/2)) or 'init-sqrt-d' (sqrt(d))");
    cmd->add_option("--sigma-x", opts.sigma_x, "override bandwidth for X");
    cmd->add_option("--sigma-y", opts.sigma_y, "override bandwidth for Y");
}

// Data source: either two CSV files or a synthetic correlated-Gaussian batch.
struct SourceOpts {
    std::string input_x;
    std::string input_y;
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::string rho;  // parsed lazily so "unset" is detectable
    std::string mi;
    bool independent = false;
};

void add_source_opts(CLI::App* cmd, SourceOpts& opts) {
    cmd->add_option("--input-x", opts.input_x, "CSV data matrix for X");
    cmd->add_option("--input-y", opts.input_y, "CSV data matrix for Y");
    cmd->add_option("--n", opts.n, "synthetic: sample count");
    cmd->add_option("--d", opts.d, "synthetic: dimensionality");
    cmd->add_option("--rho", opts.rho, "synthetic: per-coordinate correlation");
    cmd->add_option("--mi", opts.mi, "synthetic: target MI in nats");
    cmd->add_flag("--independent", opts.independent, "synthetic: rho = 0");
}

struct LoadedPair {
    dime::DataMatrix x;
    dime::DataMatrix y;
    bool synthetic = false;
    double rho = 0.0;  // synthetic only
};

LoadedPair load_pair(const SourceOpts& opts, std::uint64_t seed) {
    const bool files = !opts.input_x.empty() || !opts.input_y.empty();
    if (files) {
        require(!opts.input_x.empty() && !opts.input_y.empty(),
                "--input-x and --input-y must be given together");
        require(opts.n == 0 && opts.d == 0 && opts.rho.empty() && opts.mi.empty() &&
                    !opts.independent,
                "file input and synthetic flags are mutually exclusive");
        dime::DataMatrix x = dime::io::read_data_matrix(opts.input_x);
        dime::DataMatrix y = dime::io::read_data_matrix(opts.input_y);
        require(x.rows() == y.rows(), "--input-x and --input-y row counts differ");
        return {std::move(x), std::move(y), false, 0.0};
    }
    require(opts.n >= 2, "--n must be >= 2 for synthetic data");
    require(opts.d >= 1, "--d must be >= 1 for synthetic data");
    const int given = (!opts.rho.empty() ? 1 : 0) + (!opts.mi.empty() ? 1 : 0) +
                      (opts.independent ? 1 : 0);
    require(given == 1, "give exactly one of --rho, --mi, --independent");
    double rho = 0.0;
    if (!opts.rho.empty()) {
        rho = parse_double(opts.rho, "--rho");
        require(rho >= 0.0 && rho < 1.0, "--rho must lie in [0, 1)");
    } else if (!opts.mi.empty()) {
        const double target = parse_double(opts.mi, "--mi");
        require(target >= 0.0, "--mi must be >= 0");
        rho = dime::rho_for_mi(opts.d, target);
    }
    dime::DataPair pair = dime::sample_correlated_gaussian(
        {opts.n, opts.d, rho, dime::derive_stream(seed, "cli.data", 0)});
    return {std::move(pair.x), std::move(pair.y), true, rho};
}

// ---- output helpers ----------------------------------------------------------

void write_table_and_meta(const std::string& subcommand, const dime::io::Table& table,
                          const OutputOpts& output, const json& params) {
    dime::io::atomic_write_text(output.out,
                                dime::io::render(table, output.parsed_format()));
    json meta;
    meta["artifact_version"] = kVersion;
    meta["subcommand"] = subcommand;
    meta["output"] = output.out;
    meta["format"] = output.format;
    meta["parameters"] = params;
    dime::io::atomic_write_text(output.out + ".meta.json", meta.dump(2) + "\n");
    std::fprintf(stderr, "wrote %zu rows to %s\n", table.rows.size(),
                 output.out.c_str());
}

void print_scalar(double v) { std::printf("%.12f\n", v); }

// ---- subcommand state --------------------------------------------------------

struct EntropyCmd {
    std::uint64_t identity = 0;
    std::uint64_t ones = 0;
    std::string input;
    double alpha = 1.01;
    KernelOpts kernel;
    OutputOpts output;
};

struct PairScalarCmd {  // mi / dime / indep share this shape
    SourceOpts source;
    KernelOpts kernel;
    OutputOpts output;
    double alpha = 1.01;
    std::uint64_t seed = 0;
    std::uint64_t permutations = 5;  // dime only
    std::uint64_t trials = 100;      // indep only
};

struct OptimizeCmd {
    SourceOpts source;
    KernelOpts kernel;
    OutputOpts output;
    double alpha = 1.01;
    std::uint64_t seed = 0;
    std::uint64_t permutations = 5;
    std::uint64_t steps = 200;
    double lr = 0.01;
    double fd_step = 1e-4;
    bool tie = false;
};

struct StaircaseCmd {
    std::uint64_t d = 20;
    std::string levels = "2,4,6,8,10";
    std::uint64_t iters = 500;
    std::uint64_t n = 1024;
    double alpha = 1.01;
    std::uint64_t permutations = 5;
    KernelOpts kernel;
    bool optimize = false;
    double lr = 0.01;
    double fd_step = 1e-4;
    bool tie = false;
    std::uint64_t window = 200;
    std::uint64_t seed = 0;
    OutputOpts output;
};

struct SweepCmd {
    std::uint64_t n = 1024;
    std::uint64_t d = 20;
    double mi = 10.0;
    std::string sigma_min;  // default 1e-2 * sqrt(d)
    std::string sigma_max;  // default 1e2 * sqrt(d)
    std::uint64_t points = 20;
    double alpha = 1.01;
    std::uint64_t permutations = 5;
    KernelOpts kernel;
    std::uint64_t seed = 0;
    OutputOpts output;
};

struct GridCmd {
    std::string batch_sizes = "64,1024";
    std::string dims = "5,128";
    double mi = 10.0;
    std::string modes = "fixed,learned";
    std::uint64_t measure = 8;
    std::uint64_t warmup = 16;
    double alpha = 1.01;
    std::uint64_t permutations = 1;
    double lr = 0.01;
    double fd_step = 1e-4;
    KernelOpts kernel;
    std::uint64_t seed = 0;
    OutputOpts output;
};

// ---- subcommand handlers -----------------------------------------------------

void validate_alpha_flag(double alpha) {
    require(std::isfinite(alpha) && alpha > 0.0, "--alpha must be finite and > 0");
}

int run_entropy(const EntropyCmd& cmd) {
    validate_alpha_flag(cmd.alpha);
    const dime::EntropyOrder order(cmd.alpha);
    const int sources = (cmd.identity ? 1 : 0) + (cmd.ones ? 1 : 0) +
                        (!cmd.input.empty() ? 1 : 0);
    require(sources == 1, "give exactly one of --identity, --ones, --input");
    // kernel flags are inert for the synthetic grams, but a value that could
    // never be valid is still a usage error
    (void)cmd.kernel.family();
    if (!cmd.output.out.empty()) dime::io::ensure_writable(cmd.output.out);

    json params;
    params["alpha"] = cmd.alpha;
    std::optional<dime::GramMatrix> gram;
    if (cmd.identity) {
        gram = dime::GramMatrix::identity(cmd.identity);
        params["identity"] = cmd.identity;
    } else if (cmd.ones) {
        gram = dime::GramMatrix::ones(cmd.ones);
        params["ones"] = cmd.ones;
    } else {
        const dime::DataMatrix data = dime::io::read_data_matrix(cmd.input);
        const double sigma = cmd.kernel.resolved_x(data.cols());
        gram = dime::gram_matrix(data, dime::KernelSpec(cmd.kernel.family(), sigma));
        params["input"] = cmd.input;
        params["kernel"] = cmd.kernel.kernel;
        params["sigma"] = sigma;
    }
    const double entropy = dime::matrix_entropy(*gram, order);
    print_scalar(entropy);

    if (!cmd.output.out.empty()) {
        dime::io::Table table;
        table.columns = {"n", "alpha", "entropy"};
        table.rows.push_back({dime::io::cell(std::uint64_t(gram->size())),
                              dime::io::cell(cmd.alpha), dime::io::cell(entropy)});
        write_table_and_meta("entropy", table, cmd.output, params);
    }
    return 0;
}

json source_params(const PairScalarCmd& cmd, const LoadedPair& pair, double sigma_x,
                   double sigma_y) {
    json params;
    params["alpha"] = cmd.alpha;
    params["seed"] = cmd.seed;
    params["kernel"] = cmd.kernel.kernel;
    params["sigma-x"] = sigma_x;
    params["sigma-y"] = sigma_y;
    if (pair.synthetic) {
        params["n"] = cmd.source.n;
        params["d"] = cmd.source.d;
        params["rho"] = pair.rho;
    } else {
        params["input-x"] = cmd.source.input_x;
        params["input-y"] = cmd.source.input_y;
    }
    return params;
}

int run_mi(const PairScalarCmd& cmd) {
    validate_alpha_flag(cmd.alpha);
    const dime::EntropyOrder order(cmd.alpha);
    if (!cmd.output.out.empty()) dime::io::ensure_writable(cmd.output.out);
    const LoadedPair pair = load_pair(cmd.source, cmd.seed);
    const double sx = cmd.kernel.resolved_x(pair.x.cols());
    const double sy = cmd.kernel.resolved_y(pair.y.cols());
    const dime::GramMatrix kx =
        dime::gram_matrix(pair.x, dime::KernelSpec(cmd.kernel.family(), sx));
    const dime::GramMatrix ky =
        dime::gram_matrix(pair.y, dime::KernelSpec(cmd.kernel.family(), sy));
    const double ex = dime::matrix_entropy(kx, order);
    const double ey = dime::matrix_entropy(ky, order);
    const double joint = dime::joint_entropy(kx, ky, order);
    const double mi = ex + ey - joint;
    print_scalar(mi);

    if (!cmd.output.out.empty()) {
        dime::io::Table table;
        table.columns = {"n",       "alpha",     "sigma_x",       "sigma_y",
                         "entropy_x", "entropy_y", "joint_entropy", "matrix_mi"};
        table.rows.push_back({dime::io::cell(std::uint64_t(pair.x.rows())),
                              dime::io::cell(cmd.alpha), dime::io::cell(sx),
                              dime::io::cell(sy), dime::io::cell(ex),
                              dime::io::cell(ey), dime::io::cell(joint),
                              dime::io::cell(mi)});
        write_table_and_meta("mi", table, cmd.output,
                             source_params(cmd, pair, sx, sy));
    }
    return 0;
}

int run_dime_cmd(const PairScalarCmd& cmd) {
    validate_alpha_flag(cmd.alpha);
    require(cmd.permutations >= 1, "--permutations must be >= 1");
    const dime::EntropyOrder order(cmd.alpha);
    if (!cmd.output.out.empty()) dime::io::ensure_writable(cmd.output.out);
    const LoadedPair pair = load_pair(cmd.source, cmd.seed);
    const double sx = cmd.kernel.resolved_x(pair.x.cols());
    const double sy = cmd.kernel.resolved_y(pair.y.cols());
    const dime::PermutationSet perms = dime::sample_permutations(
        pair.x.rows(), cmd.permutations, dime::derive_stream(cmd.seed, "cli.perms", 0));
    const dime::DimeEstimate est =
        dime::dime(pair.x, pair.y, dime::KernelSpec(cmd.kernel.family(), sx),
                   dime::KernelSpec(cmd.kernel.family(), sy), order, perms);
    print_scalar(est.value);

    if (!cmd.output.out.empty()) {
        double mean_perm = 0.0;
        for (double v : est.permuted_joints) mean_perm += v;
        mean_perm /= static_cast<double>(est.permuted_joints.size());
        dime::io::Table table;
        table.columns = {"n",       "alpha",        "permutations",
                         "sigma_x", "sigma_y",      "paired_joint",
                         "mean_permuted_joint", "dime_value"};
        table.rows.push_back(
            {dime::io::cell(std::uint64_t(pair.x.rows())), dime::io::cell(cmd.alpha),
             dime::io::cell(cmd.permutations), dime::io::cell(sx), dime::io::cell(sy),
             dime::io::cell(est.paired_joint), dime::io::cell(mean_perm),
             dime::io::cell(est.value)});
        json params = source_params(cmd, pair, sx, sy);
        params["permutations"] = cmd.permutations;
        write_table_and_meta("dime", table, cmd.output, params);
    }
    return 0;
}

int run_indep(const PairScalarCmd& cmd) {
    validate_alpha_flag(cmd.alpha);
    require(cmd.trials >= 20, "--trials must be >= 20");
    const dime::EntropyOrder order(cmd.alpha);
    if (!cmd.output.out.empty()) dime::io::ensure_writable(cmd.output.out);
    const LoadedPair pair = load_pair(cmd.source, cmd.seed);
    const double sx = cmd.kernel.resolved_x(pair.x.cols());
    const double sy = cmd.kernel.resolved_y(pair.y.cols());
    const double p_value = dime::independence_test(
        pair.x, pair.y, dime::KernelSpec(cmd.kernel.family(), sx),
        dime::KernelSpec(cmd.kernel.family(), sy), order, cmd.trials,
        dime::derive_stream(cmd.seed, "cli.trials", 0));
    print_scalar(p_value);

    if (!cmd.output.out.empty()) {
        dime::io::Table table;
        table.columns = {"n", "alpha", "trials", "sigma_x", "sigma_y", "p_value"};
        table.rows.push_back({dime::io::cell(std::uint64_t(pair.x.rows())),
                              dime::io::cell(cmd.alpha), dime::io::cell(cmd.trials),
                              dime::io::cell(sx), dime::io::cell(sy),
                              dime::io::cell(p_value)});
        json params = source_params(cmd, pair, sx, sy);
        params["trials"] = cmd.trials;
        write_table_and_meta("indep", table, cmd.output, params);
    }
    return 0;
}

int run_optimize(const OptimizeCmd& cmd) {
    validate_alpha_flag(cmd.alpha);
    require(cmd.steps >= 1, "--steps must be >= 1");
    require(std::isfinite(cmd.lr) && cmd.lr > 0.0, "--lr must be finite and > 0");
    require(cmd.permutations >= 1, "--permutations must be >= 1");
    const dime::EntropyOrder order(cmd.alpha);
    if (!cmd.output.out.empty()) dime::io::ensure_writable(cmd.output.out);
    const LoadedPair pair = load_pair(cmd.source, cmd.seed);
    const double sx = cmd.kernel.resolved_x(pair.x.cols());
    const double sy = cmd.kernel.resolved_y(pair.y.cols());
    require(!cmd.tie || sx == sy, "--tie-bandwidths requires equal initial sigmas");

    const dime::PermutationSet perms = dime::sample_permutations(
        pair.x.rows(), cmd.permutations, dime::derive_stream(cmd.seed, "cli.perms", 0));
    dime::OptimizeOptions options;
    options.steps = cmd.steps;
    options.learning_rate = cmd.lr;
    options.fd_step = cmd.fd_step;
    options.tie = cmd.tie;
    options.family = cmd.kernel.family();
    const dime::OptimizeResult result = dime::optimize_bandwidth(
        pair.x, pair.y, dime::BandwidthParams::from_sigmas(sx, sy), order, perms,
        options);

    std::printf("%.12f %.12f %.12f\n", result.params.sigma_x(), result.params.sigma_y(),
                result.trace.back());

    if (!cmd.output.out.empty()) {
        dime::io::Table table;
        table.columns = {"step", "dime_value"};
        for (std::size_t t = 0; t < result.trace.size(); ++t)
            table.rows.push_back(
                {dime::io::cell(std::uint64_t(t)), dime::io::cell(result.trace[t])});
        json params = source_params(
            PairScalarCmd{cmd.source, cmd.kernel, cmd.output, cmd.alpha, cmd.seed},
            pair, sx, sy);
        params["steps"] = cmd.steps;
        params["lr"] = cmd.lr;
        params["fd-step"] = cmd.fd_step;
        params["permutations"] = cmd.permutations;
        if (cmd.tie) params["tie-bandwidths"] = true;
        write_table_and_meta("optimize", table, cmd.output, params);
    }
    return 0;
}

int run_staircase_cmd(const StaircaseCmd& cmd) {
    dime::io::ensure_writable(cmd.output.out);
    dime::StaircaseConfig cfg;
    cfg.d = cmd.d;
    cfg.mi_levels = parse_double_list(cmd.levels, "--levels");
    cfg.iterations_per_level = cmd.iters;
    cfg.batch_size = cmd.n;
    cfg.alpha = cmd.alpha;
    cfg.permutations = cmd.permutations;
    cfg.sigma_init = resolve_sigma(cmd.kernel.sigma, cmd.d, "--sigma");
    cfg.optimize = cmd.optimize;
    cfg.learning_rate = cmd.lr;
    cfg.fd_step = cmd.fd_step;
    cfg.tie = cmd.tie;
    cfg.family = cmd.kernel.family();
    cfg.window = cmd.window;
    cfg.seed = cmd.seed;
    cfg.validate();

    const std::vector<dime::ExperimentRecord> records = dime::run_staircase(cfg);

    dime::io::Table table;
    table.columns = {"iteration", "level",   "rho",     "true_mi",
                     "dime_value", "matrix_mi", "sigma_x", "sigma_y",
                     "window_mean", "window_var"};
    for (const auto& r : records)
        table.rows.push_back(
            {dime::io::cell(r.iteration), dime::io::cell(std::uint64_t(r.level)),
             dime::io::cell(r.rho), dime::io::cell(r.true_mi),
             dime::io::cell(r.dime_value), dime::io::cell(r.matrix_mi),
             dime::io::cell(r.sigma_x), dime::io::cell(r.sigma_y),
             dime::io::cell(r.window_mean), dime::io::cell(r.window_var)});

    json params;
    params["d"] = cmd.d;
    params["levels"] = cmd.levels;
    params["iters"] = cmd.iters;
    params["n"] = cmd.n;
    params["alpha"] = cmd.alpha;
    params["permutations"] = cmd.permutations;
    params["kernel"] = cmd.kernel.kernel;
    params["sigma"] = *cfg.sigma_init;
    if (cmd.optimize) params["optimize"] = true;
    params["lr"] = cmd.lr;
    params["fd-step"] = cmd.fd_step;
    if (cmd.tie) params["tie-bandwidths"] = true;
    params["window"] = cmd.window;
    params["seed"] = cmd.seed;
    write_table_and_meta("staircase", table, cmd.output, params);
    return 0;
}

int run_sweep_cmd(const SweepCmd& cmd) {
    dime::io::ensure_writable(cmd.output.out);
    const double root_d = std::sqrt(static_cast<double>(cmd.d));
    const double lo = cmd.sigma_min.empty() ? 1e-2 * root_d
                                            : parse_double(cmd.sigma_min, "--sigma-min");
    const double hi = cmd.sigma_max.empty() ? 1e2 * root_d
                                            : parse_double(cmd.sigma_max, "--sigma-max");
    dime::SweepConfig cfg;
    cfg.n = cmd.n;
    cfg.d = cmd.d;
    cfg.target_mi = cmd.mi;
    cfg.sigmas = dime::log_spaced(lo, hi, cmd.points);
    cfg.alpha = cmd.alpha;
    cfg.permutations = cmd.permutations;
    cfg.family = cmd.kernel.family();
    cfg.seed = cmd.seed;
    cfg.validate();

    const std::vector<dime::SweepPoint> points = dime::run_bandwidth_sweep(cfg);

    dime::io::Table table;
    table.columns = {"sigma", "dime_value", "matrix_mi"};
    for (const auto& p : points)
        table.rows.push_back({dime::io::cell(p.sigma), dime::io::cell(p.dime_value),
                              dime::io::cell(p.matrix_mi)});

    json params;
    params["n"] = cmd.n;
    params["d"] = cmd.d;
    params["mi"] = cmd.mi;
    params["sigma-min"] = lo;
    params["sigma-max"] = hi;
    params["points"] = cmd.points;
    params["alpha"] = cmd.alpha;
    params["permutations"] = cmd.permutations;
    params["kernel"] = cmd.kernel.kernel;
    params["seed"] = cmd.seed;
    write_table_and_meta("sweep", table, cmd.output, params);
    return 0;
}

int run_grid_cmd(const GridCmd& cmd) {
    dime::io::ensure_writable(cmd.output.out);
    dime::GridConfig cfg;
    cfg.batch_sizes = parse_size_list(cmd.batch_sizes, "--batch-sizes");
    cfg.dims = parse_size_list(cmd.dims, "--dims");
    cfg.target_mi = cmd.mi;
    cfg.modes.clear();
    {
        std::size_t pos = 0;
        const std::string& text = cmd.modes;
        while (pos <= text.size()) {
            const std::size_t next = text.find(',', pos);
            const std::string item = text.substr(
                pos, next == std::string::npos ? std::string::npos : next - pos);
            if (item == "fixed") cfg.modes.push_back(dime::BandwidthMode::fixed);
            else if (item == "learned") cfg.modes.push_back(dime::BandwidthMode::learned);
            else throw ValidationError("--modes: expected fixed or learned, got '" +
                                       item + "'");
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    }
    cfg.measure_iterations = cmd.measure;
    cfg.warmup_iterations = cmd.warmup;
    cfg.alpha = cmd.alpha;
    cfg.permutations = cmd.permutations;
    cfg.learning_rate = cmd.lr;
    cfg.fd_step = cmd.fd_step;
    cfg.family = cmd.kernel.family();
    cfg.seed = cmd.seed;
    cfg.validate();

    const std::vector<dime::GridCell> cells = dime::run_grid(cfg);

    dime::io::Table table;
    table.columns = {"batch_size", "dim",     "learned", "dime_mean",
                     "dime_std",   "sigma_x", "sigma_y"};
    for (const auto& c : cells)
        table.rows.push_back(
            {dime::io::cell(std::uint64_t(c.batch_size)),
             dime::io::cell(std::uint64_t(c.dim)),
             dime::io::cell(std::uint64_t(c.mode == dime::BandwidthMode::learned)),
             dime::io::cell(c.dime_mean), dime::io::cell(c.dime_std),
             dime::io::cell(c.sigma_x), dime::io::cell(c.sigma_y)});

    json params;
    params["batch-sizes"] = cmd.batch_sizes;
    params["dims"] = cmd.dims;
    params["mi"] = cmd.mi;
    params["modes"] = cmd.modes;
    params["measure"] = cmd.measure;
    params["warmup"] = cmd.warmup;
    params["alpha"] = cmd.alpha;
    params["permutations"] = cmd.permutations;
    params["lr"] = cmd.lr;
    params["fd-step"] = cmd.fd_step;
    params["kernel"] = cmd.kernel.kernel;
    params["seed"] = cmd.seed;
    write_table_and_meta("grid", table, cmd.output, params);
    return 0;
}

// ---- argv assembly / dispatch --------------------------------------------------

int run_cli(const std::vector<std::string>& args);

int run_from_meta(const std::string& meta_path) {
    std::ifstream f(meta_path);
    if (!f) throw dime::IoError("cannot read meta file '" + meta_path + "'");
    json meta;
    try {
        meta = json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError("malformed meta file '" + meta_path + "': " + e.what());
    }
    require(meta.contains("subcommand") && meta.contains("parameters") &&
                meta.contains("output") && meta.contains("format"),
            "meta file is missing subcommand/parameters/output/format");

    std::vector<std::string> args;
    args.push_back(meta["subcommand"].get<std::string>());
    args.push_back("--out");
    args.push_back(meta["output"].get<std::string>());
    args.push_back("--format");
    args.push_back(meta["format"].get<std::string>());
    for (const auto& [key, value] : meta["parameters"].items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        if (value.is_string()) args.push_back(value.get<std::string>());
        else args.push_back(value.dump());
    }
    return run_cli(args);
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"matrix-based Renyi entropy and DiME estimation toolkit"};
    app.require_subcommand(0, 1);

    std::string from_meta;
    app.add_option("--from-meta", from_meta, "re-run a recorded .meta.json run");

    EntropyCmd entropy_cmd;
    auto* c_entropy = app.add_subcommand("entropy", "matrix-based entropy of one view");
    c_entropy->add_option("--identity", entropy_cmd.identity, "identity Gram of size N");
    c_entropy->add_option("--ones", entropy_cmd.ones, "all-ones Gram of size N");
    c_entropy->add_option("--input", entropy_cmd.input, "CSV data matrix");
    c_entropy->add_option("--alpha", entropy_cmd.alpha, "entropy order");
    add_kernel_opts(c_entropy, entropy_cmd.kernel, "auto");
    add_output_opts(c_entropy, entropy_cmd.output, false);

    PairScalarCmd mi_cmd;
    auto* c_mi = app.add_subcommand("mi", "matrix-based mutual information");
    add_source_opts(c_mi, mi_cmd.source);
    c_mi->add_option("--alpha", mi_cmd.alpha, "entropy order");
    c_mi->add_option("--seed", mi_cmd.seed, "random seed");
    add_kernel_opts(c_mi, mi_cmd.kernel, "auto");
    add_output_opts(c_mi, mi_cmd.output, false);

    PairScalarCmd dime_cmd;
    auto* c_dime = app.add_subcommand("dime", "DiME dependence estimate");
    add_source_opts(c_dime, dime_cmd.source);
    c_dime->add_option("--alpha", dime_cmd.alpha, "entropy order");
    c_dime->add_option("--seed", dime_cmd.seed, "random seed");
    c_dime->add_option("--permutations", dime_cmd.permutations, "permutation count");
    add_kernel_opts(c_dime, dime_cmd.kernel, "auto");
    add_output_opts(c_dime, dime_cmd.output, false);

    PairScalarCmd indep_cmd;
    auto* c_indep = app.add_subcommand("indep", "permutation independence test");
    add_source_opts(c_indep, indep_cmd.source);
    c_indep->add_option("--alpha", indep_cmd.alpha, "entropy order");
    c_indep->add_option("--seed", indep_cmd.seed, "random seed");
    c_indep->add_option("--trials", indep_cmd.trials, "permutation trials (>= 20)");
    add_kernel_opts(c_indep, indep_cmd.kernel, "auto");
    add_output_opts(c_indep, indep_cmd.output, false);

    OptimizeCmd optimize_cmd;
    auto* c_optimize = app.add_subcommand("optimize", "Adam ascent on kernel bandwidths");
    add_source_opts(c_optimize, optimize_cmd.source);
    c_optimize->add_option("--alpha", optimize_cmd.alpha, "entropy order");
    c_optimize->add_option("--seed", optimize_cmd.seed, "random seed");
    c_optimize->add_option("--permutations", optimize_cmd.permutations,
                           "permutations per step");
    c_optimize->add_option("--steps", optimize_cmd.steps, "Adam steps");
    c_optimize->add_option("--lr", optimize_cmd.lr, "learning rate");
    c_optimize->add_option("--fd-step", optimize_cmd.fd_step,
                           "finite-difference step in log sigma");
    c_optimize->add_flag("--tie-bandwidths", optimize_cmd.tie,
                         "share one bandwidth between views");
    add_kernel_opts(c_optimize, optimize_cmd.kernel, "init-sqrt-d");
    add_output_opts(c_optimize, optimize_cmd.output, false);

    StaircaseCmd staircase_cmd;
    auto* c_staircase = app.add_subcommand("staircase", "rising-MI staircase experiment");
    c_staircase->add_option("--d", staircase_cmd.d, "dimensionality");
    c_staircase->add_option("--levels", staircase_cmd.levels, "MI levels, comma list");
    c_staircase->add_option("--iters", staircase_cmd.iters, "iterations per level");
    c_staircase->add_option("--n", staircase_cmd.n, "batch size");
    c_staircase->add_option("--alpha", staircase_cmd.alpha, "entropy order");
    c_staircase->add_option("--permutations", staircase_cmd.permutations,
                            "permutations per iteration");
    c_staircase->add_flag("--optimize", staircase_cmd.optimize,
                          "one Adam step on bandwidths per iteration");
    c_staircase->add_option("--lr", staircase_cmd.lr, "learning rate");
    c_staircase->add_option("--fd-step", staircase_cmd.fd_step,
                            "finite-difference step in log sigma");
    c_staircase->add_flag("--tie-bandwidths", staircase_cmd.tie,
                          "share one bandwidth between views");
    c_staircase->add_option("--window", staircase_cmd.window, "sliding window length");
    c_staircase->add_option("--seed", staircase_cmd.seed, "random seed");
    add_kernel_opts(c_staircase, staircase_cmd.kernel, "init-sqrt-d");
    add_output_opts(c_staircase, staircase_cmd.output, true);

    SweepCmd sweep_cmd;
    auto* c_sweep = app.add_subcommand("sweep", "bandwidth sweep of DiME and matrix MI");
    c_sweep->add_option("--n", sweep_cmd.n, "sample count");
    c_sweep->add_option("--d", sweep_cmd.d, "dimensionality");
    c_sweep->add_option("--mi", sweep_cmd.mi, "target MI in nats");
    c_sweep->add_option("--sigma-min", sweep_cmd.sigma_min,
                        "smallest sigma (default 1e-2*sqrt(d))");
    c_sweep->add_option("--sigma-max", sweep_cmd.sigma_max,
                        "largest sigma (default 1e2*sqrt(d))");
    c_sweep->add_option("--points", sweep_cmd.points, "grid size (>= 10)");
    c_sweep->add_option("--alpha", sweep_cmd.alpha, "entropy order");
    c_sweep->add_option("--permutations", sweep_cmd.permutations, "permutation count");
    c_sweep->add_option("--seed", sweep_cmd.seed, "random seed");
    add_kernel_opts(c_sweep, sweep_cmd.kernel, "auto");
    add_output_opts(c_sweep, sweep_cmd.output, true);

    GridCmd grid_cmd;
    auto* c_grid = app.add_subcommand("grid", "batch-size / dimensionality grid");
    c_grid->add_option("--batch-sizes", grid_cmd.batch_sizes, "comma list");
    c_grid->add_option("--dims", grid_cmd.dims, "comma list");
    c_grid->add_option("--mi", grid_cmd.mi, "target MI in nats");
    c_grid->add_option("--modes", grid_cmd.modes, "comma list of fixed,learned");
    c_grid->add_option("--measure", grid_cmd.measure, "measured iterations per cell");
    c_grid->add_option("--warmup", grid_cmd.warmup,
                       "extra optimization iterations for learned cells");
    c_grid->add_option("--alpha", grid_cmd.alpha, "entropy order");
    c_grid->add_option("--permutations", grid_cmd.permutations, "permutation count");
    c_grid->add_option("--lr", grid_cmd.lr, "learning rate");
    c_grid->add_option("--fd-step", grid_cmd.fd_step,
                       "finite-difference step in log sigma");
    c_grid->add_option("--seed", grid_cmd.seed, "random seed");
    add_kernel_opts(c_grid, grid_cmd.kernel, "auto");
    add_output_opts(c_grid, grid_cmd.output, true);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("dime");
    for (const auto& a : args) argv_storage.push_back(a);
    std::vector<char*> argv;
    argv.reserve(argv_storage.size());
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!from_meta.empty()) {
        require(app.get_subcommands().empty(),
                "--from-meta cannot be combined with a subcommand");
        return run_from_meta(from_meta);
    }

    if (c_entropy->parsed()) return run_entropy(entropy_cmd);
    if (c_mi->parsed()) return run_mi(mi_cmd);
    if (c_dime->parsed()) return run_dime_cmd(dime_cmd);
    if (c_indep->parsed()) return run_indep(indep_cmd);
    if (c_optimize->parsed()) return run_optimize(optimize_cmd);
    if (c_staircase->parsed()) return run_staircase_cmd(staircase_cmd);
    if (c_sweep->parsed()) return run_sweep_cmd(sweep_cmd);
    if (c_grid->parsed()) return run_grid_cmd(grid_cmd);

    std::fputs(app.help().c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args);
    } catch (const dime::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const dime::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const dime::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    }
}
