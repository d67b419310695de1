#include "umom/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quadrature.hpp"
#include "umom/compensated.hpp"
#include "umom/errors.hpp"

namespace umom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double draw_normal(Engine& rng) {
    const double u1 = rng.uniform01_open_left();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Bailey's polar method; exact Student-t draw for any dof > 0.
double draw_student_t(Engine& rng, double dof) {
    for (;;) {
        const double u = 2.0 * rng.uniform01() - 1.0;
        const double v = 2.0 * rng.uniform01() - 1.0;
        const double w = u * u + v * v;
        if (w > 1.0 || w == 0.0) continue;
        return u * std::sqrt(dof * (std::pow(w, -2.0 / dof) - 1.0) / w);
    }
}

double draw_discrete(const DiscreteFinite& law, Engine& rng) {
    const double u = rng.uniform01();
    double cum = 0.0;
    const auto& atoms = law.atoms();
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        cum += atoms[i].second;
        if (u < cum) return atoms[i].first;
    }
    return atoms.back().first;
}

double gaussian_abs_central_moment(double sd, double q) {
    return std::pow(sd, q) * std::pow(2.0, q / 2.0) *
           std::exp(std::lgamma((q + 1.0) / 2.0)) / std::sqrt(std::numbers::pi);
}

// E|T|^q for a standard Student-t with `dof` degrees of freedom, 0 < q < dof.
double student_t_abs_moment(double dof, double q) {
    return std::pow(dof, q / 2.0) *
           std::exp(std::lgamma((q + 1.0) / 2.0) + std::lgamma((dof - q) / 2.0) -
                    std::lgamma(dof / 2.0)) /
           std::sqrt(std::numbers::pi);
}

double standard_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
}

double student_t_pdf(double x, double dof) {
    const double norm = std::exp(std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0)) /
                        std::sqrt(dof * std::numbers::pi);
    return norm * std::pow(1.0 + x * x / dof, -(dof + 1.0) / 2.0);
}

// E|X - c|^q for each variant, by closed form where one exists and by
// deterministic quadrature otherwise. Used for central moments and for the
// mixture moments of contaminated laws.
double abs_moment_about(const DistributionSpec& spec, double center, double q);

double gaussian_abs_moment_about(const GaussianLaw& law, double center, double q) {
    const double offset = (center - law.mean) / law.sd;
    const double span = std::abs(offset) + q + 16.0;
    auto integrand = [&](double z) {
        return std::pow(std::abs(z - offset), q) * standard_normal_pdf(z);
    };
    return std::pow(law.sd, q) * detail::adaptive_simpson(integrand, -span, span);
}

double student_t_abs_moment_about(const StudentTLaw& law, double center, double q) {
    if (q >= law.dof) {
        throw MomentUndefined("student_t: absolute moment of order " + std::to_string(q) +
                              " requires q < dof = " + std::to_string(law.dof));
    }
    const double c = (center - law.location) / law.scale;
    const double cutoff = std::max(50.0, 2.0 * std::abs(c) + 10.0);
    auto body = [&](double x) { return std::pow(std::abs(x - c), q) * student_t_pdf(x, law.dof); };
    auto right_tail = [&](double x) {
        return std::pow(std::abs(x - c), q) * student_t_pdf(x, law.dof);
    };
    auto left_tail = [&](double x) {
        return std::pow(std::abs(x + c), q) * student_t_pdf(x, law.dof);
    };
    const double decay = law.dof - q;
    const double total = detail::adaptive_simpson(body, -cutoff, cutoff) +
                         detail::power_tail_integral(right_tail, cutoff, decay) +
                         detail::power_tail_integral(left_tail, cutoff, decay);
    return std::pow(law.scale, q) * total;
}

double pareto_abs_moment_about(const ParetoLaw& law, double center, double q) {
    if (q >= law.alpha) {
        throw MomentUndefined("pareto: absolute moment of order " + std::to_string(q) +
                              " requires q < alpha = " + std::to_string(law.alpha));
    }
    // Work on the unit-scale tail y >= 1 with density alpha * y^{-alpha-1}.
    const double c = center - law.shift();
    const double alpha = law.alpha;
    auto density = [&](double y) { return alpha * std::pow(y, -alpha - 1.0); };
    double lower = 0.0;
    if (c > 1.0) {
        auto body = [&](double y) { return std::pow(c - y, q) * density(y); };
        lower = detail::adaptive_simpson(body, 1.0, c);
    }
    const double start = std::max(1.0, c);
    auto tail = [&](double y) { return std::pow(std::abs(y - c), q) * density(y); };
    return lower + detail::power_tail_integral(tail, start, alpha - q);
}

double log_normal_abs_moment_about(const LogNormalLaw& law, double center, double q) {
    const double upper = q * law.logsd + 16.0;
    auto integrand = [&](double z) {
        const double x = std::exp(law.logmean + law.logsd * z);
        return std::pow(std::abs(x - center), q) * standard_normal_pdf(z);
    };
    return detail::adaptive_simpson(integrand, -16.0, std::max(16.0, upper));
}

double abs_moment_about(const DistributionSpec& spec, double center, double q) {
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) {
                return gaussian_abs_moment_about(law, center, q);
            } else if constexpr (std::is_same_v<T, StudentTLaw>) {
                return student_t_abs_moment_about(law, center, q);
            } else if constexpr (std::is_same_v<T, ParetoLaw>) {
                return pareto_abs_moment_about(law, center, q);
            } else if constexpr (std::is_same_v<T, LogNormalLaw>) {
                return log_normal_abs_moment_about(law, center, q);
            } else if constexpr (std::is_same_v<T, RademacherLaw>) {
                return 0.5 * (std::pow(std::abs(1.0 - center), q) +
                              std::pow(std::abs(-1.0 - center), q));
            } else if constexpr (std::is_same_v<T, DiscreteFinite>) {
                return law.abs_moment_about(center, q);
            } else {
                const ContaminatedLaw& mix = law;
                return (1.0 - mix.epsilon) * abs_moment_about(*mix.base, center, q) +
                       mix.epsilon * std::pow(std::abs(mix.outlier_value - center), q);
            }
        },
        spec.law());
}

std::string format_atoms(const DiscreteFinite& law) {
    std::string out;
    for (std::size_t i = 0; i < law.support_size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(law.value(i));
        out += ':';
        out += format_double(law.prob(i));
    }
    return out;
}

DiscreteFinite parse_atoms(const std::string& text) {
    std::vector<std::pair<double, double>> atoms;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("key 'atoms': expected value:prob entries, got '" + item + "'",
                              "atoms");
        }
        atoms.emplace_back(parse_double(item.substr(0, colon), "atoms"),
                           parse_double(item.substr(colon + 1), "atoms"));
    }
    return DiscreteFinite(std::move(atoms));
}

}  // namespace

DiscreteFinite::DiscreteFinite(std::vector<std::pair<double, double>> atoms)
    : atoms_(std::move(atoms)) {
    if (atoms_.size() < 2) throw InvalidArgument("discrete law: need at least 2 atoms");
    CompensatedSum total;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!(atoms_[i].second > 0.0) || atoms_[i].second > 1.0) {
            throw InvalidArgument("discrete law: atom probabilities must lie in (0, 1]");
        }
        if (i > 0 && !(atoms_[i].first > atoms_[i - 1].first)) {
            throw InvalidArgument("discrete law: atom values must be strictly increasing");
        }
        total.add(atoms_[i].second);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        throw InvalidArgument("discrete law: atom probabilities must sum to 1 within 1e-12");
    }
    CompensatedSum mean_acc;
    for (const auto& [v, p] : atoms_) mean_acc.add(p * v);
    mean_ = mean_acc.value();
    CompensatedSum var_acc;
    for (const auto& [v, p] : atoms_) var_acc.add(p * (v - mean_) * (v - mean_));
    variance_ = var_acc.value();
}

double DiscreteFinite::abs_moment_about(double center, double q) const {
    CompensatedSum acc;
    for (const auto& [v, p] : atoms_) acc.add(p * std::pow(std::abs(v - center), q));
    return acc.value();
}

std::size_t DiscreteFinite::index_of(double value) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(value));
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (std::abs(atoms_[i].first - value) <= tol) return i;
    }
    throw NotInSupport("value " + format_double(value) + " is not an atom of the law");
}

DistributionSpec::DistributionSpec(Law law, double mean, double variance)
    : law_(std::move(law)), mean_(mean), variance_(variance) {
    if (!(variance_ > 0.0)) {
        throw InvalidArgument("distribution spec: variance must be positive");
    }
}

DistributionSpec DistributionSpec::gaussian(double mean, double sd) {
    if (!(sd > 0.0)) throw InvalidArgument("gaussian: sd must be positive");
    return DistributionSpec(GaussianLaw{mean, sd}, mean, sd * sd);
}

DistributionSpec DistributionSpec::student_t(double dof, double location, double scale) {
    if (!(dof > 2.0)) throw InvalidArgument("student_t: dof must exceed 2");
    if (!(scale > 0.0)) throw InvalidArgument("student_t: scale must be positive");
    const double variance = scale * scale * dof / (dof - 2.0);
    return DistributionSpec(StudentTLaw{dof, location, scale}, location, variance);
}

DistributionSpec DistributionSpec::pareto(double alpha, double mean) {
    if (!(alpha > 2.0)) throw InvalidArgument("pareto: tail index must exceed 2");
    const double variance = alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
    return DistributionSpec(ParetoLaw{alpha, mean}, mean, variance);
}

DistributionSpec DistributionSpec::log_normal(double logmean, double logsd) {
    if (!(logsd > 0.0)) throw InvalidArgument("log_normal: logsd must be positive");
    const double s2 = logsd * logsd;
    const double mean = std::exp(logmean + 0.5 * s2);
    const double variance = (std::exp(s2) - 1.0) * std::exp(2.0 * logmean + s2);
    return DistributionSpec(LogNormalLaw{logmean, logsd}, mean, variance);
}

DistributionSpec DistributionSpec::rademacher() {
    return DistributionSpec(RademacherLaw{}, 0.0, 1.0);
}

DistributionSpec DistributionSpec::discrete(DiscreteFinite law) {
    const double mean = law.mean();
    const double variance = law.variance();
    return DistributionSpec(Law(std::move(law)), mean, variance);
}

DistributionSpec DistributionSpec::contaminated(DistributionSpec base, double epsilon,
                                                double outlier_value) {
    if (!(epsilon >= 0.0) || epsilon >= 1.0) {
        throw InvalidArgument("contaminated: epsilon must lie in [0, 1)");
    }
    if (std::holds_alternative<ContaminatedLaw>(base.law())) {
        throw InvalidArgument("contaminated: nesting contaminated laws is not supported");
    }
    const double mb = base.known_mean();
    const double vb = base.known_variance();
    const double mean = (1.0 - epsilon) * mb + epsilon * outlier_value;
    const double second = (1.0 - epsilon) * (vb + mb * mb) + epsilon * outlier_value * outlier_value;
    const double variance = second - mean * mean;
    ContaminatedLaw law{std::make_shared<DistributionSpec>(std::move(base)), epsilon,
                        outlier_value};
    return DistributionSpec(Law(std::move(law)), mean, variance);
}

double DistributionSpec::known_sd() const noexcept { return std::sqrt(variance_); }

double DistributionSpec::abs_central_moment(double q) const {
    if (!(q > 0.0)) throw InvalidArgument("abs_central_moment: q must be positive");
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) {
                return gaussian_abs_central_moment(law.sd, q);
            } else if constexpr (std::is_same_v<T, StudentTLaw>) {
                if (q >= law.dof) {
                    throw MomentUndefined("student_t: E|X-mu|^q does not exist for q >= dof");
                }
                return std::pow(law.scale, q) * student_t_abs_moment(law.dof, q);
            } else if constexpr (std::is_same_v<T, RademacherLaw>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, DiscreteFinite>) {
                return law.abs_moment_about(mean_, q);
            } else {
                return abs_moment_about(*this, mean_, q);
            }
        },
        law_);
}

const DiscreteFinite* DistributionSpec::as_discrete() const noexcept {
    return std::get_if<DiscreteFinite>(&law_);
}

std::string DistributionSpec::name() const {
    return std::visit(
        [](const auto& law) -> std::string {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) return "gaussian";
            if constexpr (std::is_same_v<T, StudentTLaw>) return "student_t";
            if constexpr (std::is_same_v<T, ParetoLaw>) return "pareto";
            if constexpr (std::is_same_v<T, LogNormalLaw>) return "log_normal";
            if constexpr (std::is_same_v<T, RademacherLaw>) return "rademacher";
            if constexpr (std::is_same_v<T, DiscreteFinite>) return "discrete";
            if constexpr (std::is_same_v<T, ContaminatedLaw>) return "contaminated";
        },
        law_);
}

void DistributionSpec::to_config(FlatConfig& out) const {
    std::visit(
        [&](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) {
                out.set("dist", "gaussian");
                out.set("mean", format_double(law.mean));
                out.set("sd", format_double(law.sd));
            } else if constexpr (std::is_same_v<T, StudentTLaw>) {
                out.set("dist", "student_t");
                out.set("dof", format_double(law.dof));
                out.set("location", format_double(law.location));
                out.set("scale", format_double(law.scale));
            } else if constexpr (std::is_same_v<T, ParetoLaw>) {
                out.set("dist", "pareto");
                out.set("alpha", format_double(law.alpha));
                out.set("mean", format_double(law.mean));
            } else if constexpr (std::is_same_v<T, LogNormalLaw>) {
                out.set("dist", "log_normal");
                out.set("logmean", format_double(law.logmean));
                out.set("logsd", format_double(law.logsd));
            } else if constexpr (std::is_same_v<T, RademacherLaw>) {
                out.set("dist", "rademacher");
            } else if constexpr (std::is_same_v<T, DiscreteFinite>) {
                out.set("dist", "discrete");
                out.set("atoms", format_atoms(law));
            } else {
                const ContaminatedLaw& mix = law;
                mix.base->to_config(out);
                out.set("contaminate_epsilon", format_double(mix.epsilon));
                out.set("contaminate_value", format_double(mix.outlier_value));
            }
        },
        law_);
}

DistributionSpec DistributionSpec::from_config(const FlatConfig& config) {
    const std::string kind = config.get_string("dist");
    DistributionSpec base = [&]() -> DistributionSpec {
        if (kind == "gaussian") {
            return gaussian(config.get_double_or("mean", 0.0), config.get_double_or("sd", 1.0));
        }
        if (kind == "student_t") {
            return student_t(config.get_double("dof"), config.get_double_or("location", 0.0),
                             config.get_double_or("scale", 1.0));
        }
        if (kind == "pareto") {
            return pareto(config.get_double("alpha"), config.get_double_or("mean", 0.0));
        }
        if (kind == "log_normal") {
            return log_normal(config.get_double_or("logmean", 0.0),
                              config.get_double_or("logsd", 1.0));
        }
        if (kind == "rademacher") return rademacher();
        if (kind == "discrete") return discrete(parse_atoms(config.get_string("atoms")));
        throw ConfigError("key 'dist': unknown distribution '" + kind + "'", "dist");
    }();
    if (config.has("contaminate_epsilon") || config.has("contaminate_value")) {
        return contaminated(std::move(base), config.get_double("contaminate_epsilon"),
                            config.get_double("contaminate_value"));
    }
    return base;
}

std::vector<std::string> DistributionSpec::config_keys() {
    return {"dist",   "mean",  "sd",    "dof",   "location",            "scale",
            "alpha",  "logmean", "logsd", "atoms", "contaminate_epsilon", "contaminate_value"};
}

bool DistributionSpec::operator==(const DistributionSpec& other) const {
    FlatConfig a;
    FlatConfig b;
    to_config(a);
    other.to_config(b);
    return a.serialize() == b.serialize();
}

double sample_one(const DistributionSpec& spec, Engine& rng) {
    return std::visit(
        [&](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) {
                return law.mean + law.sd * draw_normal(rng);
            } else if constexpr (std::is_same_v<T, StudentTLaw>) {
                return law.location + law.scale * draw_student_t(rng, law.dof);
            } else if constexpr (std::is_same_v<T, ParetoLaw>) {
                return law.shift() + std::pow(rng.uniform01_open_left(), -1.0 / law.alpha);
            } else if constexpr (std::is_same_v<T, LogNormalLaw>) {
                return std::exp(law.logmean + law.logsd * draw_normal(rng));
            } else if constexpr (std::is_same_v<T, RademacherLaw>) {
                return (rng.next() >> 63) ? 1.0 : -1.0;
            } else if constexpr (std::is_same_v<T, DiscreteFinite>) {
                return draw_discrete(law, rng);
            } else {
                const ContaminatedLaw& mix = law;
                if (rng.uniform01() < mix.epsilon) return mix.outlier_value;
                return sample_one(*mix.base, rng);
            }
        },
        spec.law());
}

void sample_into(const DistributionSpec& spec, std::span<double> out, Engine& rng) {
    std::visit(
        [&](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) {
                for (double& x : out) x = law.mean + law.sd * draw_normal(rng);
            } else if constexpr (std::is_same_v<T, StudentTLaw>) {
                for (double& x : out) x = law.location + law.scale * draw_student_t(rng, law.dof);
            } else if constexpr (std::is_same_v<T, ParetoLaw>) {
                const double shift = law.shift();
                const double inv_alpha = -1.0 / law.alpha;
                for (double& x : out) x = shift + std::pow(rng.uniform01_open_left(), inv_alpha);
            } else if constexpr (std::is_same_v<T, LogNormalLaw>) {
                for (double& x : out) x = std::exp(law.logmean + law.logsd * draw_normal(rng));
            } else if constexpr (std::is_same_v<T, RademacherLaw>) {
                for (double& x : out) x = (rng.next() >> 63) ? 1.0 : -1.0;
            } else if constexpr (std::is_same_v<T, DiscreteFinite>) {
                for (double& x : out) x = draw_discrete(law, rng);
            } else {
                for (double& x : out) x = sample_one(spec, rng);
            }
        },
        spec.law());
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, Engine& rng) {
    if (n == 0) throw InvalidArgument("sample: n must be at least 1");
    std::vector<double> out(n);
    sample_into(spec, out, rng);
    return out;
}

double feller_g(const DistributionSpec& spec, std::size_t m, std::size_t budget,
                std::uint64_t seed) {
    if (m == 0) throw InvalidArgument("feller_g: m must be at least 1");
    const double mu = spec.known_mean();
    const double sigma = spec.known_sd();
    const double root_m = std::sqrt(static_cast<double>(m));
    auto integrand = [&](double x) {
        const double z = (x - mu) / sigma;
        return z * z * std::min(std::abs(z), root_m);
    };
    if (const DiscreteFinite* law = spec.as_discrete()) {
        CompensatedSum acc;
        for (const auto& [v, p] : law->atoms()) acc.add(p * integrand(v));
        return acc.value() / root_m;
    }
    if (std::holds_alternative<RademacherLaw>(spec.law())) {
        return 0.5 * (integrand(-1.0) + integrand(1.0)) / root_m;
    }
    if (budget == 0) throw InvalidArgument("feller_g: Monte Carlo budget must be positive");
    Engine rng(seed);
    CompensatedSum acc;
    for (std::size_t i = 0; i < budget; ++i) acc.add(integrand(sample_one(spec, rng)));
    return acc.value() / (root_m * static_cast<double>(budget));
}

double discrete_expectation(const DiscreteFinite& law,
                            const std::function<double(std::span<const double>)>& f,
                            std::size_t d, std::uint64_t cap) {
    if (d == 0) throw InvalidArgument("discrete_expectation: dimension must be at least 1");
    const std::size_t s = law.support_size();
    double needed = 1.0;
    for (std::size_t i = 0; i < d; ++i) needed *= static_cast<double>(s);
    if (needed > static_cast<double>(cap)) {
        const auto required = needed > 1e18 ? std::numeric_limits<std::uint64_t>::max()
                                            : static_cast<std::uint64_t>(needed);
        throw CapExceeded("discrete_expectation: |support|^d = " + format_double(needed) +
                              " exceeds cap " + std::to_string(cap),
                          required);
    }
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> args(d, law.value(0));
    CompensatedSum acc;
    for (;;) {
        double weight = 1.0;
        for (std::size_t i = 0; i < d; ++i) weight *= law.prob(idx[i]);
        acc.add(weight * f(args));
        std::size_t pos = 0;
        while (pos < d) {
            if (++idx[pos] < s) {
                args[pos] = law.value(idx[pos]);
                break;
            }
            idx[pos] = 0;
            args[pos] = law.value(0);
            ++pos;
        }
        if (pos == d) break;
    }
    return acc.value();
}

}  // namespace umom
