#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "dfaudit/bias.hpp"
#include "dfaudit/report.hpp"
#include "dfaudit/rng.hpp"
#include "dfaudit/synth.hpp"

using namespace dfaudit;

namespace {

AttributeRegistry one_attr_registry() {
    return AttributeRegistry({{"A", AttributeCategory::Other, false}});
}

// Builds a dataset with explicit per-cell counts for one attribute:
// {pos,neg} x {fake,pristine} sample counts and error counts.
struct CellSpec {
    std::uint64_t n = 0;
    std::uint64_t errors = 0;
};

AuditDataset build_dataset(const AttributeRegistry& registry, CellSpec pos_fake,
                           CellSpec pos_pris, CellSpec neg_fake, CellSpec neg_pris,
                           CellSpec undef_fake = {}, CellSpec undef_pris = {}) {
    std::vector<std::string> ids;
    std::vector<std::int8_t> labels;
    std::vector<std::uint8_t> truth, predicted;
    std::size_t counter = 0;
    const auto add = [&](std::int8_t label, bool fake, const CellSpec& cell) {
        for (std::uint64_t i = 0; i < cell.n; ++i) {
            ids.push_back("s" + std::to_string(counter++));
            labels.push_back(label);
            truth.push_back(fake ? 1 : 0);
            const bool wrong = i < cell.errors;
            predicted.push_back(fake != wrong ? 1 : 0);
        }
    };
    add(1, true, pos_fake);
    add(1, false, pos_pris);
    add(-1, true, neg_fake);
    add(-1, false, neg_pris);
    add(0, true, undef_fake);
    add(0, false, undef_pris);
    return AuditDataset(registry, std::move(ids), std::move(labels), std::move(truth),
                        std::move(predicted));
}

SupportFilterResult keep_all(const AuditDataset& dataset) {
    return support_filter(dataset, 1);
}

} // namespace

TEST_CASE("relative performance of the published male group pair") {
    // balanced errors 15.01% / 7.79% -> RP close to the printed -92.70%
    const RPValue rp = relative_performance({0.1501, 0.0779, 1000, 1000});
    REQUIRE(rp.is_finite());
    CHECK(rp.value == doctest::Approx(-0.926829).epsilon(1e-5));
    CHECK(std::abs(rp.value - (-0.9270)) < 0.001); // within 0.1 pp
}

TEST_CASE("equal error rates mean no attribute effect") {
    const RPValue rp = relative_performance({0.05, 0.05, 10, 10});
    REQUIRE(rp.is_finite());
    CHECK(rp.value == 0.0);
}

TEST_CASE("zero denominators become sentinels, zero numerator stays finite") {
    const RPValue neg_perfect = relative_performance({0.1226, 0.0, 10, 10});
    CHECK(neg_perfect.kind == RPValue::Kind::NegGroupPerfect);
    const RPValue both = relative_performance({0.0, 0.0, 10, 10});
    CHECK(both.kind == RPValue::Kind::BothPerfect);
    const RPValue pos_perfect = relative_performance({0.0, 0.05, 10, 10});
    REQUIRE(pos_perfect.is_finite());
    CHECK(pos_perfect.value == doctest::Approx(1.0)); // prints +100%
}

TEST_CASE("swapping the groups restructures the ratio as expected") {
    Xoshiro256ss rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double ep = 0.01 + 0.5 * rng.unit();
        const double en = 0.01 + 0.5 * rng.unit();
        const RPValue rp = relative_performance({ep, en, 10, 10});
        const RPValue swapped = relative_performance({en, ep, 10, 10});
        REQUIRE(rp.is_finite());
        REQUIRE(swapped.is_finite());
        CHECK(swapped.value == doctest::Approx(1.0 - 1.0 / (1.0 - rp.value)).epsilon(1e-10));
    }
}

TEST_CASE("corrected relative performance on the published male row") {
    // data (15.01%, 7.79%), control (9.34%, 10.09%) -> 0.92567 - 1.92683 = -100.12%
    const RPValue crp = corrected_relative_performance({0.1501, 0.0779, 0, 0},
                                                       {0.0934, 0.1009, 0, 0});
    REQUIRE(crp.is_finite());
    CHECK(crp.value == doctest::Approx(-1.00116).epsilon(1e-4));
}

TEST_CASE("matching data and control pairs give zero correction") {
    const ErrorPair pair{0.12, 0.08, 100, 50};
    const RPValue crp = corrected_relative_performance(pair, pair);
    REQUIRE(crp.is_finite());
    CHECK(crp.value == 0.0);
}

TEST_CASE("the two algebraic forms of the correction agree") {
    Xoshiro256ss rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const ErrorPair data{0.001 + rng.unit(), 0.001 + rng.unit(), 10, 10};
        const ErrorPair control{0.001 + rng.unit(), 0.001 + rng.unit(), 10, 10};
        const RPValue direct = corrected_relative_performance(data, control);
        const RPValue rp_data = relative_performance(data);
        const RPValue rp_control = relative_performance(control);
        REQUIRE(direct.is_finite());
        CHECK(std::abs(direct.value - (rp_data.value - rp_control.value)) <= 1e-12);
    }
}

TEST_CASE("correction sentinels carry the degenerated side") {
    const ErrorPair good{0.1, 0.2, 10, 10};
    const ErrorPair bad_with_errors{0.1, 0.0, 10, 10};
    const ErrorPair bad_perfect{0.0, 0.0, 10, 10};

    const RPValue data_side = corrected_relative_performance(bad_with_errors, good);
    CHECK(data_side.kind == RPValue::Kind::NegGroupPerfect);
    CHECK(data_side.side == RPValue::Side::Data);

    const RPValue control_side = corrected_relative_performance(good, bad_perfect);
    CHECK(control_side.kind == RPValue::Kind::BothPerfect);
    CHECK(control_side.side == RPValue::Side::Control);

    const RPValue both = corrected_relative_performance(bad_with_errors, bad_perfect);
    CHECK(both.side == RPValue::Side::Both);
}

TEST_CASE("group error rates reproduce the published male positive row") {
    const auto registry = one_attr_registry();
    // positive group: fake error 6.87% (687/10000), pristine 23.16% (2316/10000)
    const auto dataset = build_dataset(registry, {10000, 687}, {10000, 2316},
                                       {10000, 305}, {10000, 1253});
    const ErrorPair fake = group_error_rates(dataset, 0, ErrorSlice::FakeOnly);
    const ErrorPair pristine = group_error_rates(dataset, 0, ErrorSlice::PristineOnly);
    const ErrorPair balanced = group_error_rates(dataset, 0, ErrorSlice::Balanced);
    CHECK(fake.err_pos == doctest::Approx(0.0687).epsilon(1e-12));
    CHECK(pristine.err_pos == doctest::Approx(0.2316).epsilon(1e-12));
    CHECK(balanced.err_pos == doctest::Approx(0.15015).epsilon(1e-12));
    CHECK(balanced.err_pos == (fake.err_pos + pristine.err_pos) / 2.0);
    CHECK(balanced.n_pos == 20000);
    CHECK(balanced.n_neg == 20000);
}

TEST_CASE("a perfect predictor has zero error in every slice") {
    const auto registry = one_attr_registry();
    const auto dataset =
        build_dataset(registry, {50, 0}, {50, 0}, {80, 0}, {80, 0});
    for (const auto slice :
         {ErrorSlice::Balanced, ErrorSlice::FakeOnly, ErrorSlice::PristineOnly}) {
        const ErrorPair pair = group_error_rates(dataset, 0, slice);
        CHECK(pair.err_pos == 0.0);
        CHECK(pair.err_neg == 0.0);
    }
}

TEST_CASE("six-sample fixture with one error per class in the positive group") {
    const auto registry = one_attr_registry();
    const auto dataset = build_dataset(registry, {3, 1}, {3, 1}, {4, 0}, {4, 0});
    const ErrorPair fake = group_error_rates(dataset, 0, ErrorSlice::FakeOnly);
    const ErrorPair pristine = group_error_rates(dataset, 0, ErrorSlice::PristineOnly);
    const ErrorPair balanced = group_error_rates(dataset, 0, ErrorSlice::Balanced);
    CHECK(fake.err_pos == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(pristine.err_pos == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(balanced.err_pos == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("undefined labels belong to neither group") {
    const auto registry = one_attr_registry();
    const auto with_undef = build_dataset(registry, {10, 2}, {10, 3}, {10, 1}, {10, 1},
                                          {100, 50}, {100, 50});
    const auto without = build_dataset(registry, {10, 2}, {10, 3}, {10, 1}, {10, 1});
    const ErrorPair a = group_error_rates(with_undef, 0, ErrorSlice::Balanced);
    const ErrorPair b = group_error_rates(without, 0, ErrorSlice::Balanced);
    CHECK(a.err_pos == b.err_pos);
    CHECK(a.err_neg == b.err_neg);
    CHECK(a.n_pos == b.n_pos);
}

TEST_CASE("missing truth classes raise degenerate-group errors") {
    const auto registry = one_attr_registry();
    // positive group has no pristine samples
    const auto dataset = build_dataset(registry, {10, 1}, {0, 0}, {10, 1}, {10, 1});
    CHECK_THROWS_AS(group_error_rates(dataset, 0, ErrorSlice::Balanced), DegenerateGroup);
    CHECK_THROWS_AS(group_error_rates(dataset, 0, ErrorSlice::PristineOnly), DegenerateGroup);
    CHECK_NOTHROW(group_error_rates(dataset, 0, ErrorSlice::FakeOnly));
    try {
        group_error_rates(dataset, 0, ErrorSlice::Balanced);
    } catch (const DegenerateGroup& e) {
        CHECK(e.attribute() == "A");
        CHECK(e.group() == "positive");
        CHECK(e.missing() == "pristine");
    }
}

TEST_CASE("control groups match the data group sizes") {
    const auto registry = one_attr_registry();
    // 1200 positives, 300 negatives
    const auto dataset = build_dataset(registry, {600, 30}, {600, 30}, {150, 10}, {150, 10});
    const auto draws = sample_control_groups(dataset, 0, {42, 3, false});
    REQUIRE(draws.size() == 3);
    for (const auto& draw : draws) {
        CHECK(draw.positive.size() == 1200);
        CHECK(draw.negative.size() == 300);
        // without replacement: all indices distinct and in range
        std::set<std::uint32_t> unique(draw.positive.begin(), draw.positive.end());
        CHECK(unique.size() == draw.positive.size());
        CHECK(*std::max_element(draw.positive.begin(), draw.positive.end()) <
              dataset.size());
    }
}

TEST_CASE("an attribute positive everywhere draws a full permutation") {
    const auto registry = one_attr_registry();
    const auto dataset = build_dataset(registry, {40, 3}, {40, 2}, {0, 0}, {0, 0});
    // negative group is empty: control sampling needs n_neg >= 1
    CHECK_THROWS_AS(sample_control_groups(dataset, 0, {1, 1, false}), DegenerateGroup);

    const auto mostly = build_dataset(registry, {40, 3}, {39, 2}, {1, 0}, {0, 0});
    const auto draws = sample_control_groups(mostly, 0, {1, 1, false});
    std::vector<std::uint32_t> sorted = draws[0].positive;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::uint32_t> expected(mostly.size() - 1);
    std::iota(expected.begin(), expected.end(), 0u);
    CHECK(sorted.size() == mostly.size() - 1); // positives = population - 1
}

TEST_CASE("control draws are deterministic per (seed, attribute, rep)") {
    const auto registry = one_attr_registry();
    const auto dataset = build_dataset(registry, {50, 5}, {50, 5}, {30, 2}, {30, 2});
    const auto first = sample_control_groups(dataset, 0, {7, 2, false});
    const auto second = sample_control_groups(dataset, 0, {7, 2, false});
    CHECK(first[0].positive == second[0].positive);
    CHECK(first[1].negative == second[1].negative);
    CHECK(first[0].positive != first[1].positive); // reps use distinct streams

    const auto other_seed = sample_control_groups(dataset, 0, {8, 1, false});
    CHECK(other_seed[0].positive != first[0].positive);
}

TEST_CASE("with-replacement draws can repeat samples") {
    const auto registry = one_attr_registry();
    const auto dataset = build_dataset(registry, {100, 5}, {100, 5}, {20, 2}, {20, 2});
    const auto draws = sample_control_groups(dataset, 0, {3, 1, true});
    std::set<std::uint32_t> unique(draws[0].positive.begin(), draws[0].positive.end());
    CHECK(unique.size() < draws[0].positive.size()); // 200 draws from 240 must collide
}

TEST_CASE("exhaustive four-sample enumeration: control error is unbiased") {
    // population of 4 with one misclassified sample; all size-2 subsets
    const bool wrong[4] = {true, false, false, false};
    double total = 0.0;
    int subsets = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            total += (static_cast<double>(wrong[i]) + static_cast<double>(wrong[j])) / 2.0;
            ++subsets;
        }
    }
    CHECK(subsets == 6);
    CHECK(std::abs(total / subsets - 0.25) <= 1e-12);
}

TEST_CASE("uniform draws are unbiased on every population up to six samples") {
    // enumerate every error pattern, population size and draw size; the mean
    // subset error over all C(n,k) subsets must equal the population error
    for (int n = 2; n <= 6; ++n) {
        for (int pattern = 0; pattern < (1 << n); ++pattern) {
            double population_error = 0.0;
            for (int i = 0; i < n; ++i) population_error += (pattern >> i) & 1;
            population_error /= n;
            for (int k = 1; k < n; ++k) {
                double total = 0.0;
                int subsets = 0;
                for (int mask = 0; mask < (1 << n); ++mask) {
                    if (__builtin_popcount(mask) != k) continue;
                    int errors = __builtin_popcount(mask & pattern);
                    total += static_cast<double>(errors) / k;
                    ++subsets;
                }
                CHECK(std::abs(total / subsets - population_error) <= 1e-12);
            }
        }
    }
}

TEST_CASE("the sampler includes every sample at the uniform rate") {
    const auto registry = one_attr_registry();
    const auto dataset = build_dataset(registry, {30, 3}, {30, 3}, {60, 6}, {80, 8});
    const std::size_t population = dataset.size(); // 200
    const std::size_t draw_size = 60;              // n_pos
    std::vector<std::uint64_t> inclusions(population, 0);
    const std::uint32_t reps = 4000;
    const auto draws = sample_control_groups(dataset, 0, {123, reps, false});
    for (const auto& draw : draws) {
        for (const std::uint32_t index : draw.positive) inclusions[index]++;
    }
    // binomial(reps, k/n): mean 1200, sd ~ 29; allow 5 sigma
    const double expected = static_cast<double>(reps) * draw_size / population;
    for (const std::uint64_t count : inclusions) {
        CHECK(std::abs(static_cast<double>(count) - expected) < 5.0 * 29.0);
    }
}

TEST_CASE("audit emits one row per kept attribute in registry order") {
    SynthConfig config;
    config.n_samples = 4000;
    config.seed = 10;
    config.attributes = {{"Male", 0.5, 0.1, std::nullopt},
                         {"Young", 0.4, 0.2, std::nullopt},
                         {"Rare", 0.001, 0.0, std::nullopt}};
    const auto output = generate_population(config);
    const auto dataset = output.dataset();
    const auto kept = support_filter(dataset, 100);
    CHECK(kept.rows[2].kept == false); // ~4 positives at 0.1% prevalence
    const auto report = audit(dataset, kept, {42, 1, false});
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].attribute == "Male");
    CHECK(report.rows[1].attribute == "Young");
    CHECK(report.provenance.seed == 42);

    // control group sizes equal the data group sizes
    for (const auto& row : report.rows) {
        REQUIRE(row.control.balanced.has_value());
        CHECK(row.control.balanced->n_pos == row.n_pos);
        CHECK(row.control.balanced->n_neg == row.n_neg);
    }
}

TEST_CASE("an empty kept set audits to an empty report with provenance") {
    const auto registry = one_attr_registry();
    const auto dataset = build_dataset(registry, {5, 1}, {5, 1}, {5, 1}, {5, 1});
    auto kept = support_filter(dataset, 100); // nothing reaches 100
    const auto report = audit(dataset, kept, {9, 1, false});
    CHECK(report.rows.empty());
    CHECK(report.provenance.seed == 9);
    CHECK(report.provenance.n_samples == dataset.size());
    CHECK_FALSE(report.provenance.annotations_digest.empty());
}

TEST_CASE("auditing twice with one seed is byte-identical, other seeds differ") {
    SynthConfig config;
    config.n_samples = 3000;
    config.seed = 2;
    config.attributes = {{"Male", 0.5, 0.0, std::nullopt}, {"Young", 0.3, 0.1, std::nullopt}};
    const auto output = generate_population(config);
    const auto dataset = output.dataset();
    const auto kept = support_filter(dataset, 50);
    const auto r1 = audit(dataset, kept, {42, 2, false});
    const auto r2 = audit(dataset, kept, {42, 2, false});
    CHECK(report_to_json_text(r1) == report_to_json_text(r2));
    const auto r3 = audit(dataset, kept, {43, 2, false});
    CHECK(report_to_json_text(r1) != report_to_json_text(r3));
}

TEST_CASE("balanced error is exactly the mean of the slice errors") {
    SynthConfig config;
    config.n_samples = 5000;
    config.seed = 6;
    config.attributes = {{"Male", 0.35, 0.1, BiasSpec{0.2, 0.1, 0.3, 0.05}}};
    const auto output = generate_population(config);
    const auto dataset = output.dataset();
    const auto report = audit(dataset, support_filter(dataset, 10), {1, 3, false});
    REQUIRE(report.rows.size() == 1);
    const BiasRow& row = report.rows[0];
    for (const SliceSet* source : {&row.data, &row.control}) {
        REQUIRE(source->balanced.has_value());
        CHECK(std::abs(source->balanced->err_pos -
                       (source->fake->err_pos + source->pristine->err_pos) / 2.0) <= 1e-12);
        CHECK(std::abs(source->balanced->err_neg -
                       (source->fake->err_neg + source->pristine->err_neg) / 2.0) <= 1e-12);
    }
    // reps > 1 publishes control spread
    CHECK(row.std_balanced.pos.has_value());
    CHECK(row.std_balanced.neg.has_value());
}

TEST_CASE("published wearing-hat fake-slice cells give a strongly positive ddrp") {
    // data fake errors (0.00%, 3.46%), control fake errors (5.00%, 3.63%)
    const RPValue ddrp = corrected_relative_performance({0.0, 0.0346, 0, 0},
                                                        {0.05, 0.0363, 0, 0});
    REQUIRE(ddrp.is_finite());
    CHECK(ddrp.value == doctest::Approx(1.3774).epsilon(1e-3));
    CHECK(ddrp.value > 1.0);
}

TEST_CASE("pdrp and ddrp match the audit row and collapse when slices coincide") {
    SynthConfig config;
    config.n_samples = 3000;
    config.seed = 12;
    config.attributes = {{"Male", 0.5, 0.0, BiasSpec{0.2, 0.1, 0.2, 0.1}}};
    const auto output = generate_population(config);
    const auto dataset = output.dataset();
    const ControlGroupSpec spec{5, 2, false};
    const auto [pdrp, ddrp] = pdrp_ddrp(dataset, 0, spec);
    const auto report = audit(dataset, support_filter(dataset, 10), spec);
    REQUIRE(report.rows.size() == 1);
    CHECK(pdrp == report.rows[0].pdrp);
    CHECK(ddrp == report.rows[0].ddrp);

    // symmetric fake/pristine cells make the slice pairs coincide, so the
    // two sliced corrections must be identical
    const auto registry = one_attr_registry();
    const auto symmetric =
        build_dataset(registry, {200, 20}, {200, 20}, {150, 5}, {150, 5});
    const auto [p2, d2] = pdrp_ddrp(symmetric, 0, {11, 1, false});
    REQUIRE(p2.is_finite());
    REQUIRE(d2.is_finite());
    // data slices coincide exactly; control draws differ only through the
    // class mix of the random subsets, so compare the data-side ratios
    const ErrorPair fake_pair = group_error_rates(symmetric, 0, ErrorSlice::FakeOnly);
    const ErrorPair pris_pair = group_error_rates(symmetric, 0, ErrorSlice::PristineOnly);
    CHECK(fake_pair.err_pos == pris_pair.err_pos);
    CHECK(fake_pair.err_neg == pris_pair.err_neg);
}

TEST_CASE("error-free slices collapse pdrp and ddrp to both-perfect") {
    const auto registry = one_attr_registry();
    const auto perfect = build_dataset(registry, {60, 0}, {60, 0}, {40, 0}, {40, 0});
    const auto [pdrp, ddrp] = pdrp_ddrp(perfect, 0, {2, 1, false});
    CHECK(pdrp.kind == RPValue::Kind::BothPerfect);
    CHECK(ddrp.kind == RPValue::Kind::BothPerfect);
}

TEST_CASE("class-dependent but attribute-independent errors audit to zero bias") {
    // fakes err at 4%, pristine at 20%; the attribute is rare (20% prevalence)
    // so the groups are size-imbalanced. Balanced error absorbs the class
    // asymmetry, so RP and CRP must both vanish within sampling noise.
    SynthConfig config;
    config.n_samples = 200000;
    config.seed = 33;
    config.fake_fraction = 0.5;
    config.base_error_fake = 0.04;
    config.base_error_pristine = 0.20;
    config.attributes = {{"Rare", 0.2, 0.0, std::nullopt}};
    const auto output = generate_population(config);
    const auto dataset = output.dataset();
    const auto report = audit(dataset, support_filter(dataset, 100), {17, 1, false});
    REQUIRE(report.rows.size() == 1);
    const BiasRow& row = report.rows[0];
    REQUIRE(row.rp_data.is_finite());
    REQUIRE(row.crp.is_finite());
    CHECK(std::abs(row.rp_data.value) < 0.05);
    CHECK(std::abs(row.rp_control.value) < 0.05);
    CHECK(std::abs(row.crp.value) < 0.07);
    // the balanced data errors sit near the analytic 12% for both groups
    CHECK(row.data.balanced->err_pos == doctest::Approx(0.12).epsilon(0.1));
    CHECK(row.data.balanced->err_neg == doctest::Approx(0.12).epsilon(0.1));
}

TEST_CASE("degenerate groups mark the row without aborting the audit") {
    std::vector<AttributeInfo> attrs = {{"AllFakePos", AttributeCategory::Other, false},
                                        {"Fine", AttributeCategory::Other, false}};
    const AttributeRegistry registry(std::move(attrs));
    std::vector<std::string> ids;
    std::vector<std::int8_t> labels;
    std::vector<std::uint8_t> truth, predicted;
    Xoshiro256ss rng(40);
    for (int i = 0; i < 400; ++i) {
        ids.push_back("s" + std::to_string(i));
        const bool fake = i % 2 == 0;
        // first attribute: its positive group holds only fake samples, while
        // the negative group keeps both classes (some fakes are negative)
        labels.push_back(fake ? (i % 10 == 0 ? -1 : 1) : -1);
        labels.push_back(rng.bernoulli(0.5) ? 1 : -1);
        truth.push_back(fake ? 1 : 0);
        predicted.push_back(rng.bernoulli(0.1) ? (fake ? 0 : 1) : (fake ? 1 : 0));
    }
    const AuditDataset dataset(registry, std::move(ids), std::move(labels), std::move(truth),
                               std::move(predicted));
    const auto report = audit(dataset, support_filter(dataset, 10), {3, 1, false});
    REQUIRE(report.rows.size() == 2);
    const BiasRow& bad = report.rows[0];
    CHECK_FALSE(bad.degenerate.empty());
    CHECK(bad.rp_data.kind == RPValue::Kind::Degenerate);
    CHECK_FALSE(bad.data.balanced.has_value());
    CHECK(bad.data.fake.has_value()); // fake-only slice still well-defined
    const BiasRow& good = report.rows[1];
    CHECK(good.degenerate.empty());
    CHECK(good.rp_data.is_finite());
}
