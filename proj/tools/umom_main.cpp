#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "umom/combinatorics.hpp"
#include "umom/devlab.hpp"
#include "umom/distributions.hpp"
#include "umom/errors.hpp"
#include "umom/estimators.hpp"
#include "umom/flatconfig.hpp"
#include "umom/selftest.hpp"
#include "umom/ustat.hpp"
#include "umom/version.hpp"

namespace {

using namespace umom;

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    bool timing = false;
};

std::string format_value(double value) {
    std::string text = format_double(value);
    if (text.find('.') == std::string::npos && text.find('e') == std::string::npos &&
        text.find("inf") == std::string::npos && text.find("nan") == std::string::npos) {
        text += ".0";
    }
    return text;
}

std::vector<double> read_data_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open data file: " + path);
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        double v = 0.0;
        const char* begin = line.data() + start;
        const char* end = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end) {
            throw InvalidArgument("data file " + path + " line " + std::to_string(lineno) +
                                  ": not a number: '" + line + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) throw InvalidArgument("data file " + path + " is empty");
    return values;
}

FlatConfig load_config(const CommonOptions& opt) {
    if (opt.config_path.empty()) throw ConfigError("missing --config", "config");
    FlatConfig config = FlatConfig::parse_file(opt.config_path);
    if (opt.seed_override) config.set("seed", std::to_string(*opt.seed_override));
    return config;
}

void write_text(const CommonOptions& opt, const std::string& text) {
    if (opt.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + opt.out_path);
    out << text;
    if (!out) throw IoError("failed writing output file: " + opt.out_path);
}

ProgressFn make_progress(std::int64_t total) {
    if (!isatty(2)) return nullptr;
    const std::int64_t step = std::max<std::int64_t>(1, total / 100);
    return [step](std::int64_t done, std::int64_t all) {
        if (done % step == 0 || done == all) {
            std::cerr << "\rreplication " << done << "/" << all << std::flush;
            if (done == all) std::cerr << "\n";
        }
    };
}

int run_estimate(const CommonOptions& opt) {
    FlatConfig config = load_config(opt);
    auto allowed = EstimatorSpec::config_keys();
    allowed.emplace_back("data");
    allowed.emplace_back("seed");
    config.require_known_keys(allowed);

    const EstimatorSpec spec = EstimatorSpec::from_config(config);
    const auto values = read_data_file(config.get_string("data"));
    std::uint64_t seed = 0;
    if (spec.uses_randomness()) seed = config.get_uint64("seed");
    const double estimate = evaluate_estimator(spec, values, seed);
    const std::string line = format_value(estimate) + "\n";
    std::cout << line;
    if (!opt.out_path.empty()) write_text(opt, line);
    return 0;
}

int run_tails(const CommonOptions& opt) {
    FlatConfig config = load_config(opt);
    auto allowed = ExperimentConfig::config_keys();
    allowed.emplace_back("fit_t_min");
    allowed.emplace_back("fit_t_max");
    allowed.emplace_back("threads");
    config.require_known_keys(allowed);

    const ExperimentConfig experiment = ExperimentConfig::from_config(config);
    const double fit_lo = config.get_double_or("fit_t_min", experiment.t_grid.front());
    const double fit_hi = config.get_double_or("fit_t_max", experiment.t_grid.back());
    int threads = static_cast<int>(config.get_int_or("threads", 1));
    if (opt.threads_override) threads = *opt.threads_override;

    ExperimentReport report = run_full_experiment(experiment, fit_lo, fit_hi, threads,
                                                  make_progress(experiment.replications));
    report.emit_timing = opt.timing;
    const std::string text = render_report(report, parse_report_format(opt.format));
    if (opt.out_path.empty()) {
        std::cout << text;
    } else {
        write_text(opt, text);
        std::cout << "variance_ratio=" << format_double(report.variance_ratio)
                  << " L_hat=" << format_double(report.fit ? report.fit->l_hat : 0.0) << "\n";
    }
    return 0;
}

int run_variance(const CommonOptions& opt) {
    FlatConfig config = load_config(opt);
    auto allowed = ExperimentConfig::config_keys();
    allowed.emplace_back("threads");
    config.require_known_keys(allowed);

    const ExperimentConfig experiment = ExperimentConfig::from_config(config);
    int threads = static_cast<int>(config.get_int_or("threads", 1));
    if (opt.threads_override) threads = *opt.threads_override;

    const auto estimates =
        run_experiment(experiment, threads, make_progress(experiment.replications));
    const double ratio =
        variance_ratio(estimates, experiment.distribution.known_mean(),
                       experiment.distribution.known_sd(), experiment.sample_size);
    const std::string line = format_value(ratio) + "\n";
    std::cout << line;
    if (!opt.out_path.empty()) write_text(opt, line);
    return 0;
}

Kernel kernel_from_config(const FlatConfig& config, const DiscreteFinite& law) {
    const std::string kind = config.get_string("kernel");
    const int m = static_cast<int>(config.get_int("m"));
    if (kind == "mean") return Kernel::mean(m);
    if (kind == "product") return Kernel::product(m);
    if (kind == "centered_product") {
        return Kernel::centered_product(m, config.get_double_or("mu", law.mean()));
    }
    if (kind == "shifted_sign") {
        return Kernel::shifted_sign(m, config.get_double_or("shift", 0.0));
    }
    throw ConfigError("key 'kernel': unknown kernel '" + kind + "'", "kernel");
}

int run_decompose(const CommonOptions& opt) {
    FlatConfig config = load_config(opt);
    config.require_known_keys({"kernel", "m", "n", "atoms", "mu", "shift"});

    DiscreteFinite law = [&] {
        FlatConfig law_kv;
        law_kv.set("dist", "discrete");
        law_kv.set("atoms", config.get_string("atoms"));
        const DistributionSpec spec = DistributionSpec::from_config(law_kv);
        return *spec.as_discrete();
    }();
    const Kernel kernel = kernel_from_config(config, law);
    const auto report = decomposition_report(kernel, law, config.get_int("n"));
    write_text(opt, report.to_json());
    return 0;
}

int run_breakdown(const CommonOptions& opt) {
    FlatConfig config = load_config(opt);
    auto allowed = DistributionSpec::config_keys();
    for (const char* k : {"m", "n", "seed", "outlier"}) allowed.emplace_back(k);
    config.require_known_keys(allowed);

    const int m = static_cast<int>(config.get_int("m"));
    const int n = static_cast<int>(config.get_int("n"));
    const double outlier = config.get_double_or("outlier", 1e12);
    const std::uint64_t seed = config.get_uint64("seed");
    const DistributionSpec dist = config.has("dist") ? DistributionSpec::from_config(config)
                                                     : DistributionSpec::gaussian(0.0, 1.0);

    Engine rng(derive_seed(seed, 0));
    const auto clean = sample(dist, static_cast<std::size_t>(n), rng);
    const double lo = *std::min_element(clean.begin(), clean.end());
    const double hi = *std::max_element(clean.begin(), clean.end());
    const std::uint64_t half = binomial_saturated(n, m) / 2;

    std::cout << "N=" << n << " m=" << m << " outlier=" << format_double(outlier) << "\n";
    std::cout << "c predicted_bounded estimate bounded\n";
    int first_unbounded = -1;
    for (int c = 0; c <= n; ++c) {
        Engine pos_rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(c)));
        const auto corrupted = contaminate(clean, static_cast<std::size_t>(c), outlier, pos_rng);
        const double estimate = exact_umom(corrupted, m);
        const bool predicted = binomial_saturated(n - c, m) > half;
        const bool bounded = estimate >= lo && estimate <= hi;
        if (!bounded && first_unbounded < 0) first_unbounded = c;
        std::cout << c << " " << (predicted ? "yes" : "no") << " " << format_value(estimate)
                  << " " << (bounded ? "yes" : "no") << "\n";
        if (!bounded && c > n / 2) break;
    }
    const double empirical =
        first_unbounded < 0 ? 1.0 : static_cast<double>(first_unbounded) / static_cast<double>(n);
    std::cout << "empirical_breakdown_fraction=" << format_double(empirical)
              << " asymptotic_formula=" << format_double(breakdown_fraction(m)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust mean estimation laboratory (median-of-means and subset-median "
                 "estimators, exact Hoeffding decompositions, deviation experiments)"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonOptions opt;
    auto add_common = [&](CLI::App* sub, bool with_format) {
        sub->add_option("--config", opt.config_path, "Flat key=value config file");
        sub->add_option("--out", opt.out_path, "Output path (default: stdout)");
        if (with_format) {
            sub->add_option("--format", opt.format, "Report format")
                ->check(CLI::IsMember({"json", "csv", "plotdata"}));
        }
        sub->add_option("--seed", opt.seed_override, "Override the config seed");
        sub->add_option("--threads", opt.threads_override, "Worker thread count");
        sub->add_flag("--timing", opt.timing, "Include measured wall time in reports");
    };

    auto* estimate = app.add_subcommand("estimate", "Point estimate from a data file");
    add_common(estimate, false);
    auto* tails = app.add_subcommand("tails", "Deviation tails and sub-Gaussian constant fit");
    add_common(tails, true);
    auto* variance = app.add_subcommand("variance", "Variance ratio of sqrt(N)(est - mu)");
    add_common(variance, false);
    auto* decompose = app.add_subcommand("decompose", "Exact Hoeffding decomposition report");
    add_common(decompose, false);
    auto* breakdown = app.add_subcommand("breakdown", "Finite-sample breakdown threshold");
    add_common(breakdown, false);
    auto* selftest = app.add_subcommand("selftest", "Exact-identity suite");
    selftest->add_flag("--verbose", "Print every combination");

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) return run_estimate(opt);
        if (tails->parsed()) return run_tails(opt);
        if (variance->parsed()) return run_variance(opt);
        if (decompose->parsed()) return run_decompose(opt);
        if (breakdown->parsed()) return run_breakdown(opt);
        if (selftest->parsed()) {
            SelftestOptions options;
            options.verbose = selftest->count("--verbose") > 0;
            return run_identity_selftest(std::cout, options) ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CapExceeded& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
