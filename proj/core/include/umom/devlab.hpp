#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umom/distributions.hpp"
#include "umom/estimators.hpp"

namespace umom {

// 16 equally spaced deviation levels on [1, 8]. The theoretical validity
// range of the tail bounds is distribution-dependent, so the grid is always
// user-configurable.
std::vector<double> default_t_grid();
std::vector<double> linspace_grid(double t_min, double t_max, std::size_t points);

struct ExperimentConfig {
    DistributionSpec distribution;
    EstimatorSpec estimator;
    int sample_size = 0;      // N
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<double> t_grid = default_t_grid();

    void validate(bool for_tails) const;

    void to_config(FlatConfig& out) const;
    static ExperimentConfig from_config(const FlatConfig& config);
    static std::vector<std::string> config_keys();

    bool operator==(const ExperimentConfig& other) const;
};

// Empirical exceedance curve of P(sqrt(N)|est - mu| >= sigma sqrt(t)) with
// 95% Wilson score intervals per grid point.
struct TailCurve {
    std::vector<double> t;
    std::vector<double> p_hat;
    std::vector<double> wilson_lo;
    std::vector<double> wilson_hi;
    std::int64_t replications = 0;
};

struct SubGaussianFit {
    double l_hat = 0.0;      // fitted L of the model p = A exp(-t/L)
    double intercept = 0.0;  // fitted prefactor A
    double r_squared = 0.0;
    double t_min = 0.0;      // fit range actually used
    double t_max = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    double estimate_mean = 0.0;
    double estimate_sd = 0.0;
    double variance_ratio = 0.0;
    std::optional<double> feller_diagnostic;  // k g^2(N/k), or (N/m) g^2(m)
    TailCurve curve;
    std::optional<SubGaussianFit> fit;
    // Measured wall time; serialized only when emit_timing is set, so that
    // report files stay byte-identical across reruns of the same seed.
    double wall_seconds = 0.0;
    bool emit_timing = false;
    std::string version;

    std::string to_json() const;
    static ExperimentReport from_json(const std::string& text);
};

using ProgressFn = std::function<void(std::int64_t done, std::int64_t total)>;

// One estimate per replication. Replication r runs on generators derived
// from derive_seed(seed, r), so the output is bit-identical for any thread
// count and execution order.
std::vector<double> run_experiment(const ExperimentConfig& config, int threads = 1,
                                   const ProgressFn& progress = nullptr);

TailCurve tail_curve(std::span<const double> estimates, double mu, double sigma, std::int64_t n,
                     std::span<const double> t_grid);

// Weighted least-squares fit of -ln p_hat against t over [t_min, t_max],
// using only points with p_hat * replications >= 20. Model p = A exp(-t/L).
SubGaussianFit fit_subgaussian_constant(const TailCurve& curve, double t_min, double t_max);

// Empirical Var(sqrt(N)(est - mu)) / sigma^2 about the known mu, so that
// estimator bias inflates the ratio visibly.
double variance_ratio(std::span<const double> estimates, double mu, double sigma, std::int64_t n);

enum class ReportFormat { json, csv, plotdata };

ReportFormat parse_report_format(const std::string& text);

std::string render_report(const ExperimentReport& report, ReportFormat format);
void export_report(const ExperimentReport& report, const std::filesystem::path& path,
                   ReportFormat format);

// Full pipeline: run, curve, ratio, optional fit, diagnostics.
ExperimentReport run_full_experiment(const ExperimentConfig& config, double fit_t_min,
                                     double fit_t_max, int threads = 1,
                                     const ProgressFn& progress = nullptr);

}  // namespace umom
