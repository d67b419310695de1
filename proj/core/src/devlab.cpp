#include "umom/devlab.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "umom/compensated.hpp"
#include "umom/errors.hpp"
#include "umom/version.hpp"

namespace umom {

namespace {

constexpr double kWilsonZ = 1.959963984540054;  // 97.5% normal quantile

struct WilsonInterval {
    double lo;
    double hi;
};

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials) {
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

nlohmann::json config_block_to_json(const FlatConfig& kv) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [key, value] : kv.entries()) obj[key] = value;
    return obj;
}

FlatConfig config_block_from_json(const nlohmann::json& obj) {
    FlatConfig kv;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        kv.set(it.key(), it.value().get<std::string>());
    }
    return kv;
}

}  // namespace

std::vector<double> linspace_grid(double t_min, double t_max, std::size_t points) {
    if (points < 1) throw InvalidArgument("t grid: need at least one point");
    if (!(t_min >= 0.0) || !(t_max > t_min)) {
        throw InvalidArgument("t grid: need 0 <= t_min < t_max");
    }
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = t_min;
        return grid;
    }
    const double step = (t_max - t_min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = t_min + step * static_cast<double>(i);
    return grid;
}

std::vector<double> default_t_grid() { return linspace_grid(1.0, 8.0, 16); }

void ExperimentConfig::validate(bool for_tails) const {
    if (sample_size < 1) throw InvalidArgument("experiment: sample size must be at least 1");
    if (replications < 1) throw InvalidArgument("experiment: need at least one replication");
    if (for_tails && replications < 100) {
        throw InvalidArgument("experiment: tail estimation needs at least 100 replications");
    }
    if (t_grid.empty()) throw InvalidArgument("experiment: t grid must be nonempty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0)) throw InvalidArgument("experiment: t grid values must be >= 0");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
            throw InvalidArgument("experiment: t grid must be strictly increasing");
        }
    }
}

void ExperimentConfig::to_config(FlatConfig& out) const {
    distribution.to_config(out);
    estimator.to_config(out);
    out.set("n", std::to_string(sample_size));
    out.set("replications", std::to_string(replications));
    out.set("seed", std::to_string(seed));
    std::string grid;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (i > 0) grid += ',';
        grid += format_double(t_grid[i]);
    }
    out.set("t_grid", grid);
}

ExperimentConfig ExperimentConfig::from_config(const FlatConfig& config) {
    ExperimentConfig out{DistributionSpec::from_config(config),
                         EstimatorSpec::from_config(config)};
    out.sample_size = static_cast<int>(config.get_int("n"));
    out.replications = static_cast<int>(config.get_int("replications"));
    out.seed = config.get_uint64("seed");
    if (config.has("t_grid")) {
        out.t_grid.clear();
        std::stringstream ss(config.get_string("t_grid"));
        std::string item;
        while (std::getline(ss, item, ',')) out.t_grid.push_back(parse_double(item, "t_grid"));
    } else {
        out.t_grid = linspace_grid(config.get_double_or("t_min", 1.0),
                                   config.get_double_or("t_max", 8.0),
                                   static_cast<std::size_t>(config.get_int_or("t_points", 16)));
    }
    return out;
}

std::vector<std::string> ExperimentConfig::config_keys() {
    auto keys = DistributionSpec::config_keys();
    for (auto& k : EstimatorSpec::config_keys()) keys.push_back(k);
    for (const char* k : {"n", "replications", "seed", "t_grid", "t_min", "t_max", "t_points"}) {
        keys.emplace_back(k);
    }
    return keys;
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
    FlatConfig a;
    FlatConfig b;
    to_config(a);
    other.to_config(b);
    return a.serialize() == b.serialize();
}

std::vector<double> run_experiment(const ExperimentConfig& config, int threads,
                                   const ProgressFn& progress) {
    config.validate(false);
    const auto total = static_cast<std::int64_t>(config.replications);
    std::vector<double> estimates(static_cast<std::size_t>(total));

    int workers = threads;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::int64_t>(workers, total));

    std::atomic<std::int64_t> next{0};
    std::atomic<std::int64_t> done{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::int64_t first_error_rep = -1;

    auto worker = [&]() {
        std::vector<double> buffer(static_cast<std::size_t>(config.sample_size));
        for (;;) {
            const std::int64_t r = next.fetch_add(1);
            if (r >= total) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                // Replication r owns the counter-derived stream pair
                // (sampling, estimator), independent of scheduling.
                const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
                Engine rng(derive_seed(rep_seed, 0));
                sample_into(config.distribution, buffer, rng);
                estimates[static_cast<std::size_t>(r)] =
                    evaluate_estimator(config.estimator, buffer, derive_seed(rep_seed, 1));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error || (first_error_rep >= 0 && r < first_error_rep)) {
                    first_error = std::current_exception();
                    first_error_rep = r;
                }
                return;
            }
            const std::int64_t completed = done.fetch_add(1) + 1;
            if (progress) progress(completed, total);
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (first_error) {
        try {
            std::rethrow_exception(first_error);
        } catch (const CapExceeded& e) {
            throw CapExceeded("replication " + std::to_string(first_error_rep) + ": " + e.what(),
                              e.required());
        } catch (const std::exception& e) {
            throw Error("replication " + std::to_string(first_error_rep) + ": " + e.what());
        }
    }
    return estimates;
}

TailCurve tail_curve(std::span<const double> estimates, double mu, double sigma, std::int64_t n,
                     std::span<const double> t_grid) {
    if (!(sigma > 0.0)) throw InvalidArgument("tail_curve: sigma must be positive");
    if (estimates.empty()) throw InvalidArgument("tail_curve: no estimates");
    const double root_n = std::sqrt(static_cast<double>(n));
    const auto reps = static_cast<std::int64_t>(estimates.size());

    TailCurve curve;
    curve.replications = reps;
    curve.t.assign(t_grid.begin(), t_grid.end());
    curve.p_hat.resize(t_grid.size());
    curve.wilson_lo.resize(t_grid.size());
    curve.wilson_hi.resize(t_grid.size());

    std::vector<double> deviations(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        deviations[i] = root_n * std::abs(estimates[i] - mu);
    }
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double threshold = sigma * std::sqrt(t_grid[k]);
        std::int64_t exceed = 0;
        for (double d : deviations) {
            if (d >= threshold) ++exceed;
        }
        curve.p_hat[k] = static_cast<double>(exceed) / static_cast<double>(reps);
        const auto [lo, hi] = wilson_interval(exceed, reps);
        curve.wilson_lo[k] = lo;
        curve.wilson_hi[k] = hi;
    }
    return curve;
}

SubGaussianFit fit_subgaussian_constant(const TailCurve& curve, double t_min, double t_max) {
    // Estimable points only: enough exceedances that -ln p_hat is stable.
    std::vector<double> ts;
    std::vector<double> ys;
    std::vector<double> ws;
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        const double t = curve.t[i];
        const double p = curve.p_hat[i];
        if (t < t_min || t > t_max) continue;
        if (p * static_cast<double>(curve.replications) < 20.0) continue;
        const double half = 0.5 * (curve.wilson_hi[i] - curve.wilson_lo[i]);
        if (!(half > 0.0) || !(p > 0.0)) continue;
        const double sigma_y = half / p;  // delta(-ln p) = delta(p)/p
        ts.push_back(t);
        ys.push_back(-std::log(p));
        ws.push_back(1.0 / (sigma_y * sigma_y));
    }
    if (ts.size() < 3) {
        throw InsufficientPoints("fit_subgaussian_constant: need at least 3 estimable points in [" +
                                 format_double(t_min) + ", " + format_double(t_max) + "], have " +
                                 std::to_string(ts.size()));
    }

    CompensatedSum sw;
    CompensatedSum swt;
    CompensatedSum swy;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sw.add(ws[i]);
        swt.add(ws[i] * ts[i]);
        swy.add(ws[i] * ys[i]);
    }
    const double t_bar = swt.value() / sw.value();
    const double y_bar = swy.value() / sw.value();
    CompensatedSum sxx;
    CompensatedSum sxy;
    CompensatedSum syy;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double dt = ts[i] - t_bar;
        const double dy = ys[i] - y_bar;
        sxx.add(ws[i] * dt * dt);
        sxy.add(ws[i] * dt * dy);
        syy.add(ws[i] * dy * dy);
    }
    const double slope = sxy.value() / sxx.value();
    if (!(slope > 0.0)) {
        throw NonpositiveSlope("fit_subgaussian_constant: tail is not decaying (slope = " +
                               format_double(slope) + ")");
    }
    const double intercept_y = y_bar - slope * t_bar;

    CompensatedSum ss_res;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double resid = ys[i] - (intercept_y + slope * ts[i]);
        ss_res.add(ws[i] * resid * resid);
    }
    SubGaussianFit fit;
    fit.l_hat = 1.0 / slope;
    fit.intercept = std::exp(-intercept_y);  // p = A exp(-t/L) with A = e^{-a}
    fit.r_squared = syy.value() > 0.0 ? 1.0 - ss_res.value() / syy.value() : 1.0;
    fit.t_min = t_min;
    fit.t_max = t_max;
    return fit;
}

double variance_ratio(std::span<const double> estimates, double mu, double sigma, std::int64_t n) {
    if (estimates.size() < 2) throw InvalidArgument("variance_ratio: need at least 2 estimates");
    if (!(sigma > 0.0)) throw InvalidArgument("variance_ratio: sigma must be positive");
    CompensatedSum acc;
    for (double e : estimates) {
        const double d = e - mu;
        acc.add(d * d);
    }
    const double mean_sq = acc.value() / static_cast<double>(estimates.size());
    return static_cast<double>(n) * mean_sq / (sigma * sigma);
}

std::string ExperimentReport::to_json() const {
    nlohmann::json doc;
    FlatConfig dist_kv;
    config.distribution.to_config(dist_kv);
    FlatConfig est_kv;
    config.estimator.to_config(est_kv);
    doc["config"] = {{"distribution", config_block_to_json(dist_kv)},
                     {"estimator", config_block_to_json(est_kv)},
                     {"n", config.sample_size},
                     {"replications", config.replications},
                     {"seed", config.seed},
                     {"t_grid", config.t_grid}};
    doc["estimates"] = {{"mean", estimate_mean},
                        {"sd", estimate_sd},
                        {"variance_ratio", variance_ratio}};
    if (feller_diagnostic) {
        doc["feller_diagnostic"] = *feller_diagnostic;
    } else {
        doc["feller_diagnostic"] = nullptr;
    }
    doc["tail_curve"] = {{"t", curve.t},
                         {"p_hat", curve.p_hat},
                         {"wilson_lo", curve.wilson_lo},
                         {"wilson_hi", curve.wilson_hi},
                         {"replications", curve.replications}};
    if (fit) {
        doc["fit"] = {{"l_hat", fit->l_hat},
                      {"intercept", fit->intercept},
                      {"r_squared", fit->r_squared},
                      {"t_min", fit->t_min},
                      {"t_max", fit->t_max}};
    } else {
        doc["fit"] = nullptr;
    }
    // Wall time is emitted only on request so that identical seeds produce
    // byte-identical report files.
    if (emit_timing) {
        doc["wall_seconds"] = wall_seconds;
    } else {
        doc["wall_seconds"] = nullptr;
    }
    doc["version"] = version.empty() ? kVersion : version;
    return doc.dump(2) + "\n";
}

ExperimentReport ExperimentReport::from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    const auto& cfg = doc.at("config");
    FlatConfig kv = config_block_from_json(cfg.at("distribution"));
    const FlatConfig est_kv = config_block_from_json(cfg.at("estimator"));
    for (const auto& [key, value] : est_kv.entries()) kv.set(key, value);
    ExperimentConfig config{DistributionSpec::from_config(kv), EstimatorSpec::from_config(kv)};
    config.sample_size = cfg.at("n").get<int>();
    config.replications = cfg.at("replications").get<int>();
    config.seed = cfg.at("seed").get<std::uint64_t>();
    config.t_grid = cfg.at("t_grid").get<std::vector<double>>();

    ExperimentReport report{std::move(config)};
    report.estimate_mean = doc.at("estimates").at("mean").get<double>();
    report.estimate_sd = doc.at("estimates").at("sd").get<double>();
    report.variance_ratio = doc.at("estimates").at("variance_ratio").get<double>();
    if (!doc.at("feller_diagnostic").is_null()) {
        report.feller_diagnostic = doc.at("feller_diagnostic").get<double>();
    }
    const auto& tc = doc.at("tail_curve");
    report.curve.t = tc.at("t").get<std::vector<double>>();
    report.curve.p_hat = tc.at("p_hat").get<std::vector<double>>();
    report.curve.wilson_lo = tc.at("wilson_lo").get<std::vector<double>>();
    report.curve.wilson_hi = tc.at("wilson_hi").get<std::vector<double>>();
    report.curve.replications = tc.at("replications").get<std::int64_t>();
    if (!doc.at("fit").is_null()) {
        SubGaussianFit fit;
        fit.l_hat = doc.at("fit").at("l_hat").get<double>();
        fit.intercept = doc.at("fit").at("intercept").get<double>();
        fit.r_squared = doc.at("fit").at("r_squared").get<double>();
        fit.t_min = doc.at("fit").at("t_min").get<double>();
        fit.t_max = doc.at("fit").at("t_max").get<double>();
        report.fit = fit;
    }
    if (!doc.at("wall_seconds").is_null()) {
        report.wall_seconds = doc.at("wall_seconds").get<double>();
        report.emit_timing = true;
    }
    report.version = doc.at("version").get<std::string>();
    return report;
}

ReportFormat parse_report_format(const std::string& text) {
    if (text == "json") return ReportFormat::json;
    if (text == "csv") return ReportFormat::csv;
    if (text == "plotdata") return ReportFormat::plotdata;
    throw InvalidArgument("unknown report format '" + text + "' (json|csv|plotdata)");
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json:
            return report.to_json();
        case ReportFormat::csv: {
            std::string out = "t,p_hat,wilson_lo,wilson_hi\n";
            for (std::size_t i = 0; i < report.curve.t.size(); ++i) {
                out += format_double(report.curve.t[i]);
                out += ',';
                out += format_double(report.curve.p_hat[i]);
                out += ',';
                out += format_double(report.curve.wilson_lo[i]);
                out += ',';
                out += format_double(report.curve.wilson_hi[i]);
                out += '\n';
            }
            return out;
        }
        case ReportFormat::plotdata: {
            // (t, -ln p_hat) pairs; points with no observed exceedances are
            // dropped rather than written as infinities.
            std::string out;
            for (std::size_t i = 0; i < report.curve.t.size(); ++i) {
                const double p = report.curve.p_hat[i];
                if (!(p > 0.0)) continue;
                out += format_double(report.curve.t[i]);
                out += ' ';
                out += format_double(-std::log(p));
                out += '\n';
            }
            return out;
        }
    }
    throw InvalidArgument("unknown report format");
}

void export_report(const ExperimentReport& report, const std::filesystem::path& path,
                   ReportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path.string());
    out << render_report(report, format);
    if (!out) throw IoError("failed writing output file: " + path.string());
}

ExperimentReport run_full_experiment(const ExperimentConfig& config, double fit_t_min,
                                     double fit_t_max, int threads, const ProgressFn& progress) {
    config.validate(true);
    const auto start = std::chrono::steady_clock::now();
    const auto estimates = run_experiment(config, threads, progress);

    const double mu = config.distribution.known_mean();
    const double sigma = config.distribution.known_sd();

    ExperimentReport report{config};
    report.version = kVersion;
    report.estimate_mean = compensated_mean(estimates);
    CompensatedSum centered;
    for (double e : estimates) {
        const double d = e - report.estimate_mean;
        centered.add(d * d);
    }
    report.estimate_sd =
        std::sqrt(centered.value() / static_cast<double>(estimates.size() - 1));
    report.variance_ratio = variance_ratio(estimates, mu, sigma, config.sample_size);
    report.curve = tail_curve(estimates, mu, sigma, config.sample_size, config.t_grid);
    report.fit = fit_subgaussian_constant(report.curve, fit_t_min, fit_t_max);

    // Echo the block-count/subset-size diagnostic that governs the valid
    // deviation range: k g^2(N/k) for block medians, (N/m) g^2(m) for
    // subset-mean medians.
    const auto& est = config.estimator.variant();
    if (const auto* mom = std::get_if<MomSpec>(&est)) {
        const std::size_t width = static_cast<std::size_t>(config.sample_size) /
                                  static_cast<std::size_t>(mom->blocks);
        const double g = feller_g(config.distribution, width);
        report.feller_diagnostic = static_cast<double>(mom->blocks) * g * g;
    } else {
        int m = 0;
        if (const auto* e = std::get_if<ExactUmomSpec>(&est)) m = e->subset_size;
        if (const auto* e = std::get_if<HodgesLehmannSpec>(&est)) m = e->subset_size;
        if (const auto* e = std::get_if<IncompleteUmomSpec>(&est)) m = e->subset_size;
        if (m > 0) {
            const double g = feller_g(config.distribution, static_cast<std::size_t>(m));
            report.feller_diagnostic =
                static_cast<double>(config.sample_size) / static_cast<double>(m) * g * g;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace umom
