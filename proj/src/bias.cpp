#include "dfaudit/bias.hpp"

#include <cmath>

#include "dfaudit/rng.hpp"

namespace dfaudit {

namespace {

// Misclassification tallies of one group, split by truth class.
struct GroupCounts {
    std::uint64_t fake_n = 0, fake_err = 0;
    std::uint64_t pris_n = 0, pris_err = 0;

    std::uint64_t size() const { return fake_n + pris_n; }

    void add(bool truth_fake, bool wrong) {
        if (truth_fake) {
            ++fake_n;
            fake_err += wrong ? 1 : 0;
        } else {
            ++pris_n;
            pris_err += wrong ? 1 : 0;
        }
    }
};

struct GroupPairCounts {
    GroupCounts pos, neg;
};

GroupPairCounts scan_data_groups(const AuditDataset& dataset, std::size_t attribute) {
    GroupPairCounts counts;
    const std::size_t n = dataset.size();
    for (std::size_t r = 0; r < n; ++r) {
        const std::int8_t label = dataset.label(r, attribute);
        if (label == 0) continue;
        GroupCounts& group = label == 1 ? counts.pos : counts.neg;
        group.add(dataset.truth_is_fake(r), dataset.misclassified(r));
    }
    return counts;
}

template <typename IndexRange>
GroupCounts scan_index_group(const AuditDataset& dataset, const IndexRange& indices) {
    GroupCounts counts;
    for (const std::uint32_t r : indices) {
        counts.add(dataset.truth_is_fake(r), dataset.misclassified(r));
    }
    return counts;
}

// Slice error of one group; empty when the slice's truth class is absent.
std::optional<double> slice_error(const GroupCounts& g, ErrorSlice slice) {
    switch (slice) {
        case ErrorSlice::FakeOnly:
            if (g.fake_n == 0) return std::nullopt;
            return static_cast<double>(g.fake_err) / static_cast<double>(g.fake_n);
        case ErrorSlice::PristineOnly:
            if (g.pris_n == 0) return std::nullopt;
            return static_cast<double>(g.pris_err) / static_cast<double>(g.pris_n);
        case ErrorSlice::Balanced: {
            if (g.fake_n == 0 || g.pris_n == 0) return std::nullopt;
            const double fake = static_cast<double>(g.fake_err) / static_cast<double>(g.fake_n);
            const double pris = static_cast<double>(g.pris_err) / static_cast<double>(g.pris_n);
            return (fake + pris) / 2.0;
        }
    }
    return std::nullopt;
}

// Names the first reason a slice cannot be computed for a group pair.
std::optional<std::pair<std::string, std::string>> degeneracy_of(const GroupPairCounts& counts,
                                                                 ErrorSlice slice) {
    const auto check = [&](const GroupCounts& g,
                           const char* name) -> std::optional<std::pair<std::string, std::string>> {
        if (g.size() == 0) return std::make_pair(std::string(name), std::string("labelled"));
        if (slice != ErrorSlice::PristineOnly && g.fake_n == 0) {
            return std::make_pair(std::string(name), std::string("fake"));
        }
        if (slice != ErrorSlice::FakeOnly && g.pris_n == 0) {
            return std::make_pair(std::string(name), std::string("pristine"));
        }
        return std::nullopt;
    };
    if (auto d = check(counts.pos, "positive")) return d;
    if (auto d = check(counts.neg, "negative")) return d;
    return std::nullopt;
}

std::optional<ErrorPair> make_pair_opt(const GroupPairCounts& counts, ErrorSlice slice) {
    const auto pos = slice_error(counts.pos, slice);
    const auto neg = slice_error(counts.neg, slice);
    if (!pos || !neg) return std::nullopt;
    return ErrorPair{*pos, *neg, counts.pos.size(), counts.neg.size()};
}

Xoshiro256ss control_stream(std::uint64_t seed, std::size_t attribute, std::uint32_t rep) {
    return Xoshiro256ss::keyed(seed, {0x6374726cULL, // "ctrl"
                                      static_cast<std::uint64_t>(attribute),
                                      static_cast<std::uint64_t>(rep)});
}

ControlDraw draw_control(const AuditDataset& dataset, std::size_t attribute,
                         std::uint64_t n_pos, std::uint64_t n_neg,
                         const ControlGroupSpec& spec, std::uint32_t rep,
                         std::vector<std::uint32_t>& scratch) {
    const std::size_t population = dataset.size();
    if (!spec.replacement && (n_pos > population || n_neg > population)) {
        throw InsufficientData("control draw larger than population for attribute '" +
                               dataset.registry().at(attribute).name + "'");
    }
    auto rng = control_stream(spec.seed, attribute, rep);
    ControlDraw draw;
    if (spec.replacement) {
        sample_with_replacement(population, n_pos, rng, draw.positive);
        sample_with_replacement(population, n_neg, rng, draw.negative);
    } else {
        sample_without_replacement(population, n_pos, rng, scratch, draw.positive);
        sample_without_replacement(population, n_neg, rng, scratch, draw.negative);
    }
    return draw;
}

double sample_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

constexpr ErrorSlice kSlices[] = {ErrorSlice::Balanced, ErrorSlice::FakeOnly,
                                  ErrorSlice::PristineOnly};

} // namespace

std::string_view slice_name(ErrorSlice slice) {
    switch (slice) {
        case ErrorSlice::Balanced: return "balanced";
        case ErrorSlice::FakeOnly: return "fake";
        case ErrorSlice::PristineOnly: return "pristine";
    }
    return "?";
}

RPValue relative_performance(const ErrorPair& pair) {
    if (pair.err_neg > 0.0) return RPValue::finite(1.0 - pair.err_pos / pair.err_neg);
    if (pair.err_pos > 0.0) return RPValue::neg_group_perfect();
    return RPValue::both_perfect();
}

RPValue corrected_relative_performance(const ErrorPair& data, const ErrorPair& control) {
    const bool data_ok = data.err_neg > 0.0;
    const bool control_ok = control.err_neg > 0.0;
    if (data_ok && control_ok) {
        return RPValue::finite(control.err_pos / control.err_neg -
                               data.err_pos / data.err_neg);
    }
    const RPValue::Side side = !data_ok && !control_ok ? RPValue::Side::Both
                               : !data_ok              ? RPValue::Side::Data
                                                       : RPValue::Side::Control;
    const ErrorPair& bad = !data_ok ? data : control;
    if (bad.err_pos > 0.0) return RPValue::neg_group_perfect(side);
    return RPValue::both_perfect(side);
}

ErrorPair group_error_rates(const AuditDataset& dataset, std::size_t attribute,
                            ErrorSlice slice) {
    const GroupPairCounts counts = scan_data_groups(dataset, attribute);
    if (const auto d = degeneracy_of(counts, slice)) {
        throw DegenerateGroup(dataset.registry().at(attribute).name, d->first, d->second);
    }
    return *make_pair_opt(counts, slice);
}

std::vector<ControlDraw> sample_control_groups(const AuditDataset& dataset,
                                               std::size_t attribute,
                                               const ControlGroupSpec& spec) {
    if (spec.reps < 1) throw InvalidConfig("control reps must be at least 1");
    const GroupPairCounts counts = scan_data_groups(dataset, attribute);
    if (counts.pos.size() == 0 || counts.neg.size() == 0) {
        throw DegenerateGroup(dataset.registry().at(attribute).name,
                              counts.pos.size() == 0 ? "positive" : "negative", "labelled");
    }
    std::vector<ControlDraw> draws;
    draws.reserve(spec.reps);
    std::vector<std::uint32_t> scratch;
    for (std::uint32_t rep = 0; rep < spec.reps; ++rep) {
        draws.push_back(draw_control(dataset, attribute, counts.pos.size(), counts.neg.size(),
                                     spec, rep, scratch));
    }
    return draws;
}

namespace {

// One attribute's full evaluation; shared by audit() and pdrp_ddrp().
BiasRow evaluate_attribute(const AuditDataset& dataset, std::size_t attribute,
                           const ControlGroupSpec& spec,
                           std::vector<std::uint32_t>& scratch) {
    const AttributeRegistry& registry = dataset.registry();
    BiasRow row;
    row.attribute = registry.at(attribute).name;
    row.category = registry.at(attribute).category;

    const GroupPairCounts data_counts = scan_data_groups(dataset, attribute);
    row.n_pos = data_counts.pos.size();
    row.n_neg = data_counts.neg.size();

    for (const ErrorSlice slice : kSlices) {
        auto pair = make_pair_opt(data_counts, slice);
        if (!pair) {
            const auto d = degeneracy_of(data_counts, slice);
            row.degenerate.push_back({slice, "data", d->first, d->second});
        }
        if (slice == ErrorSlice::Balanced) row.data.balanced = pair;
        else if (slice == ErrorSlice::FakeOnly) row.data.fake = pair;
        else row.data.pristine = pair;
    }

    if (row.n_pos > 0 && row.n_neg > 0) {
        // Accumulators across reps; a slice survives only if every rep's draw
        // contains both truth classes needed by it.
        struct SliceAcc {
            bool ok = true;
            std::vector<double> pos, neg;
            std::optional<Degeneracy> first_failure;
        };
        SliceAcc acc[3];
        for (std::uint32_t rep = 0; rep < spec.reps; ++rep) {
            const ControlDraw draw = draw_control(dataset, attribute, row.n_pos, row.n_neg,
                                                  spec, rep, scratch);
            GroupPairCounts control_counts;
            control_counts.pos = scan_index_group(dataset, draw.positive);
            control_counts.neg = scan_index_group(dataset, draw.negative);
            for (std::size_t s = 0; s < 3; ++s) {
                if (!acc[s].ok) continue;
                const auto pair = make_pair_opt(control_counts, kSlices[s]);
                if (!pair) {
                    acc[s].ok = false;
                    const auto d = degeneracy_of(control_counts, kSlices[s]);
                    acc[s].first_failure = Degeneracy{kSlices[s], "control", d->first, d->second};
                    continue;
                }
                acc[s].pos.push_back(pair->err_pos);
                acc[s].neg.push_back(pair->err_neg);
            }
        }
        for (std::size_t s = 0; s < 3; ++s) {
            std::optional<ErrorPair> pair;
            SliceStd deviation;
            if (acc[s].ok) {
                double mean_pos = 0.0, mean_neg = 0.0;
                for (double v : acc[s].pos) mean_pos += v;
                for (double v : acc[s].neg) mean_neg += v;
                mean_pos /= static_cast<double>(spec.reps);
                mean_neg /= static_cast<double>(spec.reps);
                pair = ErrorPair{mean_pos, mean_neg, row.n_pos, row.n_neg};
                if (spec.reps > 1) {
                    deviation.pos = sample_std(acc[s].pos);
                    deviation.neg = sample_std(acc[s].neg);
                }
            } else {
                row.degenerate.push_back(*acc[s].first_failure);
            }
            if (kSlices[s] == ErrorSlice::Balanced) {
                row.control.balanced = pair;
                row.std_balanced = deviation;
            } else if (kSlices[s] == ErrorSlice::FakeOnly) {
                row.control.fake = pair;
                row.std_fake = deviation;
            } else {
                row.control.pristine = pair;
                row.std_pristine = deviation;
            }
        }
    } else {
        const char* group = row.n_pos == 0 ? "positive" : "negative";
        row.degenerate.push_back({ErrorSlice::Balanced, "control", group, "labelled"});
    }

    const auto rp_of = [](const std::optional<ErrorPair>& pair, RPValue::Side missing_side) {
        return pair ? relative_performance(*pair) : RPValue::degenerate(missing_side);
    };
    const auto crp_of = [](const std::optional<ErrorPair>& data,
                           const std::optional<ErrorPair>& control) {
        if (data && control) return corrected_relative_performance(*data, *control);
        const RPValue::Side side = !data && !control ? RPValue::Side::Both
                                   : !data           ? RPValue::Side::Data
                                                     : RPValue::Side::Control;
        return RPValue::degenerate(side);
    };
    row.rp_data = rp_of(row.data.balanced, RPValue::Side::Data);
    row.rp_control = rp_of(row.control.balanced, RPValue::Side::Control);
    row.crp = crp_of(row.data.balanced, row.control.balanced);
    row.pdrp = crp_of(row.data.pristine, row.control.pristine);
    row.ddrp = crp_of(row.data.fake, row.control.fake);
    return row;
}

} // namespace

std::pair<RPValue, RPValue> pdrp_ddrp(const AuditDataset& dataset, std::size_t attribute,
                                      const ControlGroupSpec& spec) {
    std::vector<std::uint32_t> scratch;
    const BiasRow row = evaluate_attribute(dataset, attribute, spec, scratch);
    return {row.pdrp, row.ddrp};
}

BiasReport audit(const AuditDataset& dataset, const SupportFilterResult& kept,
                 const ControlGroupSpec& spec) {
    if (spec.reps < 1) throw InvalidConfig("control reps must be at least 1");
    if (kept.rows.size() != dataset.registry().size()) {
        throw InvalidConfig("support filter result does not match the registry");
    }
    BiasReport report;
    report.provenance.seed = spec.seed;
    report.provenance.reps = spec.reps;
    report.provenance.replacement = spec.replacement;
    report.provenance.min_count = kept.min_count;
    report.provenance.n_samples = dataset.size();
    report.provenance.annotations_digest = digest_hex(dataset.label_digest());
    report.provenance.predictions_digest = digest_hex(dataset.prediction_digest());

    std::vector<std::uint32_t> scratch;
    for (std::size_t a = 0; a < kept.rows.size(); ++a) {
        if (!kept.rows[a].kept) continue;
        report.rows.push_back(evaluate_attribute(dataset, a, spec, scratch));
    }
    return report;
}

} // namespace dfaudit
