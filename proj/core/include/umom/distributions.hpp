#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "umom/flatconfig.hpp"
#include "umom/rng.hpp"

namespace umom {

// Finite-support law given by (value, probability) atoms with strictly
// increasing values. This is the substrate for every exact-expectation
// computation in the decomposition engine.
class DiscreteFinite {
public:
    explicit DiscreteFinite(std::vector<std::pair<double, double>> atoms);

    const std::vector<std::pair<double, double>>& atoms() const noexcept { return atoms_; }
    std::size_t support_size() const noexcept { return atoms_.size(); }
    double value(std::size_t i) const noexcept { return atoms_[i].first; }
    double prob(std::size_t i) const noexcept { return atoms_[i].second; }

    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    double abs_moment_about(double center, double q) const;

    // Index of the atom matching `value` exactly (tiny tolerance for
    // representability); throws NotInSupport otherwise.
    std::size_t index_of(double value) const;

private:
    std::vector<std::pair<double, double>> atoms_;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

struct GaussianLaw {
    double mean = 0.0;
    double sd = 1.0;
};

struct StudentTLaw {
    double dof = 3.0;  // requires dof > 2 so the variance exists
    double location = 0.0;
    double scale = 1.0;
};

// Unit-scale Pareto tail shifted so the law has exactly the requested mean.
struct ParetoLaw {
    double alpha = 3.0;  // tail index, > 2
    double mean = 0.0;
    double shift() const noexcept { return mean - alpha / (alpha - 1.0); }
};

struct LogNormalLaw {
    double logmean = 0.0;
    double logsd = 1.0;
};

struct RademacherLaw {};

class DistributionSpec;

struct ContaminatedLaw {
    std::shared_ptr<const DistributionSpec> base;
    double epsilon = 0.0;  // in [0, 1)
    double outlier_value = 0.0;
};

// A sampleable law with analytically known mean and variance. Constructed
// through the factories, which validate parameters and reject degenerate
// (zero-variance) laws.
class DistributionSpec {
public:
    using Law = std::variant<GaussianLaw, StudentTLaw, ParetoLaw, LogNormalLaw, RademacherLaw,
                             DiscreteFinite, ContaminatedLaw>;

    static DistributionSpec gaussian(double mean, double sd);
    static DistributionSpec student_t(double dof, double location = 0.0, double scale = 1.0);
    static DistributionSpec pareto(double alpha, double mean = 0.0);
    static DistributionSpec log_normal(double logmean, double logsd);
    static DistributionSpec rademacher();
    static DistributionSpec discrete(DiscreteFinite law);
    static DistributionSpec contaminated(DistributionSpec base, double epsilon,
                                         double outlier_value);

    const Law& law() const noexcept { return law_; }
    double known_mean() const noexcept { return mean_; }
    double known_variance() const noexcept { return variance_; }
    double known_sd() const noexcept;

    // q-th absolute central moment E|X - mean|^q; throws MomentUndefined
    // beyond the variant's integrability (q >= dof, q >= alpha).
    double abs_central_moment(double q) const;

    const DiscreteFinite* as_discrete() const noexcept;

    std::string name() const;

    // Flat key=value serialization used by the CLI config.
    void to_config(FlatConfig& out) const;
    static DistributionSpec from_config(const FlatConfig& config);
    static std::vector<std::string> config_keys();

    bool operator==(const DistributionSpec& other) const;

private:
    explicit DistributionSpec(Law law, double mean, double variance);

    Law law_;
    double mean_;
    double variance_;
};

// n i.i.d. draws; identical (seed, spec, n) yields bit-identical output.
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, Engine& rng);
void sample_into(const DistributionSpec& spec, std::span<double> out, Engine& rng);
double sample_one(const DistributionSpec& spec, Engine& rng);

inline constexpr std::uint64_t kFellerDefaultSeed = 0x6D0BB07EULL;
inline constexpr std::size_t kFellerDefaultBudget = 1'000'000;

// g(m) = m^{-1/2} E[((X-mu)/sigma)^2 min(|X-mu|/sigma, sqrt(m))].
// Exact summation over finite-support laws, Monte Carlo otherwise.
double feller_g(const DistributionSpec& spec, std::size_t m,
                std::size_t budget = kFellerDefaultBudget,
                std::uint64_t seed = kFellerDefaultSeed);

inline constexpr std::uint64_t kEnumerationCap = 10'000'000;

// Exact E[f(Y_1, ..., Y_d)] over the product law P^d by full enumeration.
double discrete_expectation(const DiscreteFinite& law,
                            const std::function<double(std::span<const double>)>& f,
                            std::size_t d, std::uint64_t cap = kEnumerationCap);

}  // namespace umom
