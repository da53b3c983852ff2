#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "dfaudit/core.hpp"

using namespace dfaudit;

namespace {

AttributeRegistry small_registry(std::size_t n) {
    std::vector<AttributeInfo> attrs;
    for (std::size_t i = 0; i < n; ++i) {
        attrs.push_back({"attr" + std::to_string(i), AttributeCategory::Other, false});
    }
    return AttributeRegistry(std::move(attrs));
}

PredictionSet predictions_for(const std::vector<std::string>& ids) {
    PredictionSet set;
    for (const auto& id : ids) {
        set.records.push_back({id, SampleClass::Fake, SampleClass::Fake, std::nullopt});
    }
    return set;
}

} // namespace

TEST_CASE("ternary labels serialize as -1/0/1") {
    CHECK(static_cast<int>(TernaryLabel::Negative) == -1);
    CHECK(static_cast<int>(TernaryLabel::Undefined) == 0);
    CHECK(static_cast<int>(TernaryLabel::Positive) == 1);
    CHECK(is_valid_label(-1));
    CHECK(is_valid_label(0));
    CHECK(is_valid_label(1));
    CHECK_FALSE(is_valid_label(2));
    CHECK_FALSE(is_valid_label(-2));
}

TEST_CASE("default registry lists the 47 attributes with stable order") {
    const auto& registry = AttributeRegistry::default_registry();
    REQUIRE(registry.size() == 47);
    CHECK(registry.at(0).name == "Male");
    CHECK(registry.at(46).name == "Attractive");
    CHECK(registry.index_of("Male") == 0);
    CHECK(registry.index_of("Wearing Hat").has_value());
    CHECK_FALSE(registry.index_of("Nonexistent").has_value());

    std::set<std::string> names;
    for (const auto& attr : registry.attributes()) names.insert(attr.name);
    CHECK(names.size() == 47);

    // the two eye attributes flagged for low annotation accuracy
    std::size_t flagged = 0;
    for (const auto& attr : registry.attributes()) {
        if (attr.excluded_low_accuracy) {
            ++flagged;
            CHECK((attr.name == "Brown Eyes" || attr.name == "Bags Under Eyes"));
        }
    }
    CHECK(flagged == 2);

    CHECK(registry.at(*registry.index_of("Goatee")).category == AttributeCategory::Beard);
    CHECK(registry.at(*registry.index_of("Smiling")).category == AttributeCategory::Mouth);
    CHECK(registry.at(*registry.index_of("Attractive")).category == AttributeCategory::Other);
}

TEST_CASE("registry rejects duplicate names") {
    std::vector<AttributeInfo> attrs = {{"A", AttributeCategory::Other, false},
                                        {"A", AttributeCategory::Other, false}};
    CHECK_THROWS_AS(AttributeRegistry(std::move(attrs)), InvalidConfig);
}

TEST_CASE("validation of a well-formed table yields an empty report") {
    const auto registry = small_registry(3);
    AnnotationTable table(registry);
    const std::int8_t rows[3][3] = {{1, -1, 0}, {0, 0, 1}, {-1, 1, 1}};
    table.append_row("a", rows[0]);
    table.append_row("b", rows[1]);
    table.append_row("c", rows[2]);
    const auto report = validate_annotations(table, registry);
    CHECK(report.ok());
}

TEST_CASE("validation flags out-of-domain labels with the row id") {
    const auto registry = small_registry(2);
    AnnotationTable table(registry);
    const std::int8_t bad[2] = {2, 0};
    table.append_row("weird", bad);
    const auto report = validate_annotations(table, registry);
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].kind == ValidationFinding::Kind::InvalidLabel);
    CHECK(report.findings[0].sample_id == "weird");
}

TEST_CASE("validation counts duplicate sample ids") {
    const auto registry = small_registry(2);
    AnnotationTable table(registry);
    const std::int8_t row[2] = {1, -1};
    table.append_row("v001_f009", row);
    table.append_row("v001_f010", row);
    table.append_row("v001_f011", row);
    table.append_row("v001_f010", row);
    const auto report = validate_annotations(table, registry);

    // linear-scan oracle over the id list
    std::size_t oracle = 0;
    const auto& ids = table.sample_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (ids[i] == ids[j]) {
                ++oracle;
                break;
            }
        }
    }
    CHECK(oracle == 1);
    CHECK(report.count(ValidationFinding::Kind::DuplicateId) == oracle);
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].sample_id == "v001_f010");
}

TEST_CASE("validation records rows of unexpected arity") {
    const auto registry = small_registry(3);
    AnnotationTable table(registry);
    const std::int8_t short_row[2] = {1, -1};
    table.append_row("stub", short_row);
    const auto report = validate_annotations(table, registry);
    CHECK(report.count(ValidationFinding::Kind::WrongArity) == 1);
}

TEST_CASE("strict join accepts identical id sets") {
    const auto registry = small_registry(2);
    AnnotationTable table(registry);
    const std::int8_t row[2] = {1, 0};
    for (const char* id : {"x", "y", "z"}) table.append_row(id, row);
    const auto joined = join(table, predictions_for({"x", "y", "z"}), JoinPolicy::Strict);
    CHECK(joined.size() == 3);
}

TEST_CASE("intersect join keeps the common ids only") {
    const auto registry = small_registry(2);
    AnnotationTable table(registry);
    const std::int8_t row[2] = {1, 0};
    for (const char* id : {"a", "b", "c", "d"}) table.append_row(id, row);
    const auto joined = join(table, predictions_for({"b", "d"}), JoinPolicy::Intersect);
    CHECK(joined.size() == 2);
    CHECK(joined.sample_ids() == std::vector<std::string>{"b", "d"});
}

TEST_CASE("strict join reports the symmetric difference count") {
    const auto registry = small_registry(1);
    AnnotationTable table(registry);
    const std::int8_t row[1] = {1};
    const std::vector<std::string> annotation_ids = {"s1", "s2", "s3", "s4", "s5"};
    for (const auto& id : annotation_ids) table.append_row(id, row);
    const std::vector<std::string> prediction_ids = {"s1", "s2", "s3", "s4", "s5", "s6"};

    // set-difference oracle
    std::set<std::string> a(annotation_ids.begin(), annotation_ids.end());
    std::set<std::string> p(prediction_ids.begin(), prediction_ids.end());
    std::vector<std::string> sym;
    std::set_symmetric_difference(a.begin(), a.end(), p.begin(), p.end(),
                                  std::back_inserter(sym));
    CHECK(sym.size() == 1);

    try {
        join(table, predictions_for(prediction_ids), JoinPolicy::Strict);
        FAIL("expected MismatchedIds");
    } catch (const MismatchedIds& e) {
        CHECK(e.difference() == sym.size());
    }
}

TEST_CASE("intersect join is idempotent") {
    const auto registry = small_registry(3);
    AnnotationTable table(registry);
    const std::int8_t r1[3] = {1, -1, 0};
    const std::int8_t r2[3] = {0, 1, 1};
    table.append_row("a", r1);
    table.append_row("b", r2);
    table.append_row("c", r1);
    PredictionSet predictions = predictions_for({"b", "c", "zz"});

    const auto joined = join(table, predictions, JoinPolicy::Intersect);
    const auto annotations = joined.annotations_copy();
    const auto again = join(annotations, joined.predictions_copy(), JoinPolicy::Intersect);
    CHECK(again.sample_ids() == joined.sample_ids());
    CHECK(again.label_digest() == joined.label_digest());
    CHECK(again.prediction_digest() == joined.prediction_digest());
}

TEST_CASE("fnv1a64 matches reference values") {
    CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
    CHECK(digest_hex(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}
