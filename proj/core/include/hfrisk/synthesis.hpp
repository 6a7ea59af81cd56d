#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfrisk/cohort.hpp"

namespace hfrisk {

enum class SignalShape {
    linear,       // coefficient * z
    quadratic,    // coefficient * (z^2 - 1)
    step,         // coefficient * [z > threshold]
    interaction,  // coefficient * z * z_partner
};

/// One term of the planted logistic outcome model. Continuous features enter
/// as z-scores against their schema mean/std; binary features enter centred
/// on their prevalence.
struct SignalTerm {
    std::string feature;
    double coefficient = 0.0;
    SignalShape shape = SignalShape::linear;
    double threshold = 0.0;  // step only, in z units
    std::string partner;     // interaction only
};

struct SynthesisSpec {
    Schema schema;
    std::size_t n = 0;
    double outcome_rate = 0.10;
    std::vector<SignalTerm> signal;
    double missing_rate = 0.0;
    std::uint64_t seed = 42;
    /// Optional correlation matrix over the continuous features, in schema
    /// order. Features are independent when absent.
    std::optional<std::vector<std::vector<double>>> correlation;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// Generates a cohort whose continuous features are normal with the schema's
/// mean and std, truncated at mean +/- 4 std, and whose binary features are
/// Bernoulli at the schema prevalence. Outcomes follow the planted logistic
/// model with an intercept placed so the realized event count is
/// round(outcome_rate * n). Missing cells are masked independently at
/// missing_rate; the outcome is never masked.
///
/// Identical specs produce bit-identical cohorts.
Cohort synthesize(const SynthesisSpec& spec);

/// Linear predictor of the planted model (without intercept) for a complete
/// row; exposed so tests can check recovered signal against ground truth.
double planted_score(const SynthesisSpec& spec, std::span<const double> row);

/// Name of the term feature with the largest absolute coefficient.
std::string strongest_signal_feature(const std::vector<SignalTerm>& signal);

SignalShape signal_shape_from_string(const std::string& s);
std::string to_string(SignalShape shape);

nlohmann::json to_json(const SignalTerm& term);
SignalTerm signal_term_from_json(const nlohmann::json& doc);

}  // namespace hfrisk
