#include "dfaudit/synth.hpp"

#include <cstdio>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dfaudit/rng.hpp"

namespace dfaudit {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_probability(double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw InvalidConfig(std::string(what) + " must lie in [0,1]");
    }
}

void validate(const SynthConfig& config) {
    if (config.n_samples == 0) throw InvalidConfig("n_samples must be positive");
    if (!(config.fake_fraction > 0.0 && config.fake_fraction < 1.0)) {
        throw InvalidConfig("fake_fraction must lie in (0,1)");
    }
    check_probability(config.base_error_fake, "base_error_fake");
    check_probability(config.base_error_pristine, "base_error_pristine");
    if (config.attributes.empty()) throw InvalidConfig("at least one attribute is required");
    if (config.samples_per_identity == 0) {
        throw InvalidConfig("samples_per_identity must be positive");
    }
    for (const auto& attr : config.attributes) {
        if (attr.name.empty()) throw InvalidConfig("attribute names must be non-empty");
        check_probability(attr.prevalence, "prevalence");
        check_probability(attr.undefined_rate, "undefined_rate");
        if (attr.bias) {
            check_probability(attr.bias->err_pos_fake, "err_pos_fake");
            check_probability(attr.bias->err_neg_fake, "err_neg_fake");
            check_probability(attr.bias->err_pos_pristine, "err_pos_pristine");
            check_probability(attr.bias->err_neg_pristine, "err_neg_pristine");
        }
    }
    std::unordered_map<std::string, int> planted_use;
    for (const auto& pair : config.planted_pairs) {
        check_probability(pair.co_occurrence, "co_occurrence");
        for (const std::string& name : {pair.a, pair.b}) {
            bool found = false;
            for (const auto& attr : config.attributes) {
                if (attr.name != name) continue;
                found = true;
                if (attr.prevalence != 0.5) {
                    throw InvalidConfig("planted attribute '" + name +
                                        "' requires prevalence 0.5");
                }
            }
            if (!found) throw InvalidConfig("planted attribute '" + name + "' is not configured");
            if (++planted_use[name] > 1) {
                throw InvalidConfig("attribute '" + name + "' appears in multiple planted pairs");
            }
        }
    }
}

std::string padded_id(const char* prefix, std::uint64_t value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%s%08llu", prefix,
                  static_cast<unsigned long long>(value));
    return buffer;
}

} // namespace

SynthOutput generate_population(const SynthConfig& config) {
    validate(config);
    const std::size_t width = config.attributes.size();

    std::vector<AttributeInfo> infos;
    infos.reserve(width);
    for (const auto& attr : config.attributes) {
        infos.push_back({attr.name, AttributeCategory::Other, false});
    }
    auto registry = std::make_shared<AttributeRegistry>(std::move(infos));

    // planted-pair membership per attribute: pair index or -1
    std::vector<int> pair_of(width, -1);
    for (std::size_t p = 0; p < config.planted_pairs.size(); ++p) {
        pair_of[*registry->index_of(config.planted_pairs[p].a)] = static_cast<int>(p);
        pair_of[*registry->index_of(config.planted_pairs[p].b)] = static_cast<int>(p);
    }
    // first biased attribute (config order) with a defined label decides the
    // error cell for a sample; document order-sensitivity instead of guessing
    std::vector<std::size_t> biased;
    for (std::size_t a = 0; a < width; ++a) {
        if (config.attributes[a].bias) biased.push_back(a);
    }

    SynthOutput output{registry, AnnotationTable(*registry), {}, {}, 0};
    output.manifest.name = config.name;
    output.predictions.records.reserve(config.n_samples);
    output.manifest.identity_of.reserve(config.n_samples);

    auto rng = Xoshiro256ss::keyed(config.seed, {0x73796e7468ULL}); // "synth"
    std::vector<std::int8_t> row(width, 0);
    std::vector<std::int8_t> latents(std::max<std::size_t>(config.planted_pairs.size(), 1), 0);

    for (std::uint64_t i = 0; i < config.n_samples; ++i) {
        const bool fake = rng.bernoulli(config.fake_fraction);

        for (std::size_t p = 0; p < config.planted_pairs.size(); ++p) {
            latents[p] = rng.bernoulli(0.5) ? 1 : -1;
        }

        for (std::size_t a = 0; a < width; ++a) {
            const SynthAttribute& attr = config.attributes[a];
            if (attr.undefined_rate > 0.0 && rng.bernoulli(attr.undefined_rate)) {
                row[a] = 0;
                continue;
            }
            std::int8_t sign;
            if (pair_of[a] >= 0 &&
                rng.bernoulli(config.planted_pairs[static_cast<std::size_t>(pair_of[a])]
                                  .co_occurrence)) {
                sign = latents[static_cast<std::size_t>(pair_of[a])];
            } else {
                sign = rng.bernoulli(attr.prevalence) ? 1 : -1;
            }
            row[a] = sign;
        }

        double p_err = fake ? config.base_error_fake : config.base_error_pristine;
        for (const std::size_t a : biased) {
            if (row[a] == 0) continue;
            const BiasSpec& bias = *config.attributes[a].bias;
            if (row[a] == 1) {
                p_err = fake ? bias.err_pos_fake : bias.err_pos_pristine;
            } else {
                p_err = fake ? bias.err_neg_fake : bias.err_neg_pristine;
            }
            break;
        }
        const bool wrong = rng.bernoulli(p_err);

        std::string sample = padded_id("s", i);
        output.manifest.identity_of.emplace(
            sample, padded_id("id", i / config.samples_per_identity));
        output.annotations.append_row(sample, row);
        PredictionRecord record;
        record.sample_id = std::move(sample);
        record.truth = fake ? SampleClass::Fake : SampleClass::Pristine;
        const bool predicted_fake = fake != wrong;
        record.predicted = predicted_fake ? SampleClass::Fake : SampleClass::Pristine;
        output.predictions.records.push_back(std::move(record));
    }

    output.label_digest = output.annotations.label_digest();
    return output;
}

double expected_rp(const SynthConfig& config, std::string_view attribute, ErrorSlice slice) {
    const SynthAttribute* found = nullptr;
    for (const auto& attr : config.attributes) {
        if (attr.name == attribute) {
            found = &attr;
            break;
        }
    }
    if (found == nullptr) throw UnknownAttribute(std::string(attribute));

    BiasSpec bias;
    if (found->bias) {
        bias = *found->bias;
    } else {
        bias = {config.base_error_fake, config.base_error_fake,
                config.base_error_pristine, config.base_error_pristine};
    }
    double p_pos = 0.0, p_neg = 0.0;
    switch (slice) {
        case ErrorSlice::FakeOnly:
            p_pos = bias.err_pos_fake;
            p_neg = bias.err_neg_fake;
            break;
        case ErrorSlice::PristineOnly:
            p_pos = bias.err_pos_pristine;
            p_neg = bias.err_neg_pristine;
            break;
        case ErrorSlice::Balanced:
            p_pos = (bias.err_pos_fake + bias.err_pos_pristine) / 2.0;
            p_neg = (bias.err_neg_fake + bias.err_neg_pristine) / 2.0;
            break;
    }
    if (p_neg <= 0.0) {
        throw UndefinedExpectation("negative-group error probability is zero for attribute '" +
                                   std::string(attribute) + "'");
    }
    return 1.0 - p_pos / p_neg;
}

SynthConfig synth_config_from_json_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(0, 0, std::string("synth config is not valid JSON: ") + e.what());
    }
    SynthConfig config;
    config.name = doc.value("name", config.name);
    config.n_samples = doc.value("n_samples", config.n_samples);
    config.fake_fraction = doc.value("fake_fraction", config.fake_fraction);
    config.base_error_fake = doc.value("base_error_fake", config.base_error_fake);
    config.base_error_pristine = doc.value("base_error_pristine", config.base_error_pristine);
    config.samples_per_identity = doc.value("samples_per_identity", config.samples_per_identity);
    config.seed = doc.value("seed", config.seed);
    if (doc.contains("attributes")) {
        for (const auto& a : doc["attributes"]) {
            SynthAttribute attr;
            attr.name = a.value("name", "");
            attr.prevalence = a.value("prevalence", attr.prevalence);
            attr.undefined_rate = a.value("undefined_rate", attr.undefined_rate);
            if (a.contains("bias")) {
                const auto& b = a["bias"];
                attr.bias = BiasSpec{b.value("err_pos_fake", 0.0), b.value("err_neg_fake", 0.0),
                                     b.value("err_pos_pristine", 0.0),
                                     b.value("err_neg_pristine", 0.0)};
            }
            config.attributes.push_back(std::move(attr));
        }
    }
    if (doc.contains("planted_pairs")) {
        for (const auto& p : doc["planted_pairs"]) {
            config.planted_pairs.push_back(
                {p.value("a", ""), p.value("b", ""), p.value("co_occurrence", 0.9)});
        }
    }
    return config;
}

std::string synth_config_to_json_text(const SynthConfig& config) {
    ordered_json doc;
    doc["name"] = config.name;
    doc["n_samples"] = config.n_samples;
    doc["fake_fraction"] = config.fake_fraction;
    doc["base_error_fake"] = config.base_error_fake;
    doc["base_error_pristine"] = config.base_error_pristine;
    doc["samples_per_identity"] = config.samples_per_identity;
    doc["seed"] = config.seed;
    doc["attributes"] = ordered_json::array();
    for (const auto& attr : config.attributes) {
        ordered_json a;
        a["name"] = attr.name;
        a["prevalence"] = attr.prevalence;
        a["undefined_rate"] = attr.undefined_rate;
        if (attr.bias) {
            a["bias"] = {{"err_pos_fake", attr.bias->err_pos_fake},
                         {"err_neg_fake", attr.bias->err_neg_fake},
                         {"err_pos_pristine", attr.bias->err_pos_pristine},
                         {"err_neg_pristine", attr.bias->err_neg_pristine}};
        }
        doc["attributes"].push_back(std::move(a));
    }
    if (!config.planted_pairs.empty()) {
        doc["planted_pairs"] = ordered_json::array();
        for (const auto& pair : config.planted_pairs) {
            doc["planted_pairs"].push_back(
                {{"a", pair.a}, {"b", pair.b}, {"co_occurrence", pair.co_occurrence}});
        }
    }
    return doc.dump(2) + "\n";
}

} // namespace dfaudit
