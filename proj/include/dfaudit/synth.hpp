#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dfaudit/bias.hpp"
#include "dfaudit/core.hpp"

namespace dfaudit {

// Per-cell misclassification probabilities for samples carrying a defined
// label of one attribute: (group sign, truth class) -> error rate.
struct BiasSpec {
    double err_pos_fake = 0.0;
    double err_neg_fake = 0.0;
    double err_pos_pristine = 0.0;
    double err_neg_pristine = 0.0;
};

struct SynthAttribute {
    std::string name;
    double prevalence = 0.5;     // P(positive | defined)
    double undefined_rate = 0.0; // P(label == 0)
    std::optional<BiasSpec> bias;
};

// Latent-coin co-occurrence: both attributes copy a shared fair coin with
// probability `co_occurrence`, giving Pearson r = co_occurrence^2.
struct PlantedPair {
    std::string a;
    std::string b;
    double co_occurrence = 0.9;
};

struct SynthConfig {
    std::string name = "synthetic";
    std::uint64_t n_samples = 0;
    double fake_fraction = 0.5;
    // error rates for samples not covered by any attribute bias
    double base_error_fake = 0.10;
    double base_error_pristine = 0.10;
    std::vector<SynthAttribute> attributes;
    std::vector<PlantedPair> planted_pairs;
    std::uint32_t samples_per_identity = 1;
    std::uint64_t seed = 0;
};

struct SynthOutput {
    std::shared_ptr<AttributeRegistry> registry;
    AnnotationTable annotations;
    PredictionSet predictions;
    DatasetManifest manifest;
    std::uint64_t label_digest = 0; // running checksum emitted by the generator

    AuditDataset dataset() const { return join(annotations, predictions, JoinPolicy::Strict); }
};

// Draws labels independently per attribute (planted pairs share a latent
// coin) and misclassifies each sample with the probability matching its
// (attribute sign, truth class) cell. Deterministic per seed.
SynthOutput generate_population(const SynthConfig& config);

// Analytic RP implied by the configured error probabilities; the balanced
// slice uses the means of the two class probabilities. Throws
// UndefinedExpectation when the negative-group probability is zero.
double expected_rp(const SynthConfig& config, std::string_view attribute, ErrorSlice slice);

SynthConfig synth_config_from_json_text(const std::string& text);
std::string synth_config_to_json_text(const SynthConfig& config);

} // namespace dfaudit
