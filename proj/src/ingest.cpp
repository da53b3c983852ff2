#include "dfaudit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dfaudit/rng.hpp"

namespace dfaudit {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

// getline that tolerates both \n and \r\n endings.
bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + path);
    return in;
}

// Strict ternary cell parser: exactly "-1", "0" or "1".
bool parse_label_cell(const std::string& cell, std::int8_t& out) {
    if (cell.size() == 1) {
        if (cell[0] == '0') { out = 0; return true; }
        if (cell[0] == '1') { out = 1; return true; }
        return false;
    }
    if (cell.size() == 2 && cell[0] == '-' && cell[1] == '1') {
        out = -1;
        return true;
    }
    return false;
}

bool parse_binary_cell(const std::string& cell, bool& out) {
    if (cell == "0") { out = false; return true; }
    if (cell == "1") { out = true; return true; }
    return false;
}

bool parse_real_cell(const std::string& cell, double& out) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace

std::string_view split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

std::array<std::size_t, 3> SplitAssignment::counts() const {
    std::array<std::size_t, 3> out{0, 0, 0};
    for (const auto& [identity, split] : assignment) {
        out[static_cast<std::size_t>(split)]++;
    }
    return out;
}

AnnotationTable load_annotations(std::istream& source, const AttributeRegistry& registry) {
    std::string line;
    if (!read_line(source, line)) {
        throw HeaderMismatch("annotations input is empty");
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "sample_id") {
        throw HeaderMismatch("first column must be sample_id");
    }
    if (header.size() != registry.size() + 1) {
        throw HeaderMismatch("expected " + std::to_string(registry.size()) +
                             " attribute columns, found " + std::to_string(header.size() - 1));
    }
    // column -> registry index; any order is accepted, the table is stored in
    // registry order regardless.
    std::vector<std::size_t> column_attr(header.size() - 1);
    std::vector<bool> seen(registry.size(), false);
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto idx = registry.index_of(header[c]);
        if (!idx) throw HeaderMismatch("unknown attribute column: " + header[c]);
        if (seen[*idx]) throw HeaderMismatch("duplicate attribute column: " + header[c]);
        seen[*idx] = true;
        column_attr[c - 1] = *idx;
    }

    AnnotationTable table(registry);
    std::vector<std::int8_t> row(registry.size(), 0);
    std::size_t line_no = 1;
    while (read_line(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t start = 0;
        std::size_t field = 0;
        std::string id;
        std::string cell;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::size_t len =
                (comma == std::string::npos ? line.size() : comma) - start;
            cell.assign(line, start, len);
            if (field == 0) {
                id = cell;
            } else {
                if (field > column_attr.size()) {
                    throw ParseError(line_no, field + 1, "too many fields");
                }
                std::int8_t value = 0;
                if (!parse_label_cell(cell, value)) {
                    throw ParseError(line_no, field + 1,
                                     "label must be -1, 0 or 1, got '" + cell + "'");
                }
                row[column_attr[field - 1]] = value;
            }
            ++field;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (field != column_attr.size() + 1) {
            throw ParseError(line_no, field, "expected " +
                                                 std::to_string(column_attr.size() + 1) +
                                                 " fields, found " + std::to_string(field));
        }
        table.append_row(std::move(id), row);
    }
    return table;
}

AnnotationTable load_annotations_file(const std::string& path, const AttributeRegistry& registry) {
    auto in = open_input(path);
    return load_annotations(in, registry);
}

void write_annotations_csv(const AnnotationTable& table, std::ostream& out) {
    out << "sample_id";
    for (const auto& attr : table.registry().attributes()) {
        out << ',' << attr.name;
    }
    out << '\n';
    std::string buffer;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        buffer.clear();
        buffer += table.sample_id(r);
        for (std::size_t a = 0; a < table.attribute_count(); ++a) {
            const std::int8_t v = table.raw(r, a);
            buffer += (v == -1) ? ",-1" : (v == 1 ? ",1" : ",0");
        }
        buffer += '\n';
        out << buffer;
    }
}

PredictionSet load_predictions(std::istream& source, double score_threshold,
                               std::vector<std::string>* warnings) {
    if (!(score_threshold > 0.0 && score_threshold < 1.0)) {
        throw InvalidConfig("score threshold must lie in (0,1)");
    }
    std::string line;
    if (!read_line(source, line)) {
        throw HeaderMismatch("predictions input is empty");
    }
    const std::vector<std::string> header = split_csv_line(line);
    int id_col = -1, truth_col = -1, predicted_col = -1, score_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == "sample_id") id_col = static_cast<int>(c);
        else if (name == "truth") truth_col = static_cast<int>(c);
        else if (name == "predicted") predicted_col = static_cast<int>(c);
        else if (name == "score") score_col = static_cast<int>(c);
        else throw HeaderMismatch("unknown prediction column: " + name);
    }
    if (id_col < 0) throw MissingColumn("predictions are missing the sample_id column");
    if (truth_col < 0) throw MissingColumn("predictions are missing the truth column");
    if (predicted_col < 0 && score_col < 0) {
        throw MissingColumn("predictions need a predicted or a score column");
    }

    PredictionSet set;
    std::size_t line_no = 1;
    while (read_line(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError(line_no, fields.size(), "expected " +
                                                         std::to_string(header.size()) +
                                                         " fields, found " +
                                                         std::to_string(fields.size()));
        }
        PredictionRecord record;
        record.sample_id = fields[static_cast<std::size_t>(id_col)];
        bool truth_fake = false;
        if (!parse_binary_cell(fields[static_cast<std::size_t>(truth_col)], truth_fake)) {
            throw ParseError(line_no, static_cast<std::size_t>(truth_col) + 1,
                             "truth must be 0 or 1");
        }
        record.truth = truth_fake ? SampleClass::Fake : SampleClass::Pristine;

        bool have_score = false;
        double score = 0.0;
        if (score_col >= 0) {
            const std::string& cell = fields[static_cast<std::size_t>(score_col)];
            if (!cell.empty()) {
                if (!parse_real_cell(cell, score) || score < 0.0 || score > 1.0) {
                    throw ParseError(line_no, static_cast<std::size_t>(score_col) + 1,
                                     "score must be a real in [0,1]");
                }
                record.score = score;
                have_score = true;
            }
        }

        if (predicted_col >= 0) {
            bool predicted_fake = false;
            if (!parse_binary_cell(fields[static_cast<std::size_t>(predicted_col)],
                                   predicted_fake)) {
                throw ParseError(line_no, static_cast<std::size_t>(predicted_col) + 1,
                                 "predicted must be 0 or 1");
            }
            record.predicted = predicted_fake ? SampleClass::Fake : SampleClass::Pristine;
            if (have_score) {
                const bool from_score = score >= score_threshold;
                if (from_score != predicted_fake && warnings != nullptr) {
                    warnings->push_back("line " + std::to_string(line_no) + ": explicit predicted=" +
                                        (predicted_fake ? std::string("1") : std::string("0")) +
                                        " overrides score rule (score " + fields[static_cast<std::size_t>(score_col)] +
                                        " vs threshold)");
                }
            }
        } else {
            if (!have_score) {
                throw ParseError(line_no, static_cast<std::size_t>(score_col) + 1,
                                 "missing score value");
            }
            record.predicted = score >= score_threshold ? SampleClass::Fake
                                                        : SampleClass::Pristine;
        }
        set.records.push_back(std::move(record));
    }
    return set;
}

PredictionSet load_predictions_file(const std::string& path, double score_threshold,
                                    std::vector<std::string>* warnings) {
    auto in = open_input(path);
    return load_predictions(in, score_threshold, warnings);
}

void write_predictions_csv(const PredictionSet& predictions, std::ostream& out) {
    bool any_score = false;
    for (const auto& r : predictions.records) {
        if (r.score) { any_score = true; break; }
    }
    out << (any_score ? "sample_id,truth,predicted,score" : "sample_id,truth,predicted") << '\n';
    char buffer[64];
    for (const auto& r : predictions.records) {
        out << r.sample_id << ',' << (r.truth == SampleClass::Fake ? '1' : '0') << ','
            << (r.predicted == SampleClass::Fake ? '1' : '0');
        if (any_score) {
            out << ',';
            if (r.score) {
                std::snprintf(buffer, sizeof(buffer), "%.6f", *r.score);
                out << buffer;
            }
        }
        out << '\n';
    }
}

DatasetManifest load_manifest(std::istream& source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ParseError(0, 0, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("identities") || !doc["identities"].is_object()) {
        throw HeaderMismatch("manifest must be an object with an 'identities' map");
    }
    DatasetManifest manifest;
    manifest.name = doc.value("name", "");
    for (auto it = doc["identities"].begin(); it != doc["identities"].end(); ++it) {
        if (!it.value().is_string()) {
            throw HeaderMismatch("identity for sample '" + it.key() + "' must be a string");
        }
        manifest.identity_of.emplace(it.key(), it.value().get<std::string>());
    }
    return manifest;
}

DatasetManifest load_manifest_file(const std::string& path) {
    auto in = open_input(path);
    return load_manifest(in);
}

void write_manifest_json(const DatasetManifest& manifest, std::ostream& out) {
    ordered_json doc;
    doc["name"] = manifest.name;
    // sorted for stable output
    std::vector<std::pair<std::string, std::string>> entries(manifest.identity_of.begin(),
                                                             manifest.identity_of.end());
    std::sort(entries.begin(), entries.end());
    ordered_json identities = ordered_json::object();
    for (const auto& [sample, identity] : entries) {
        identities[sample] = identity;
    }
    doc["identities"] = std::move(identities);
    out << doc.dump(2) << '\n';
}

SplitAssignment subject_exclusive_split(const DatasetManifest& manifest,
                                        const std::array<double, 3>& ratios,
                                        std::uint64_t seed) {
    for (double r : ratios) {
        if (!(r > 0.0)) throw InvalidConfig("split ratios must be positive");
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw InvalidConfig("split ratios must sum to 1");
    }
    if (manifest.identity_of.empty()) throw EmptyManifest();

    std::vector<std::string> identities;
    identities.reserve(manifest.identity_of.size());
    for (const auto& [sample, identity] : manifest.identity_of) {
        identities.push_back(identity);
    }
    std::sort(identities.begin(), identities.end());
    identities.erase(std::unique(identities.begin(), identities.end()), identities.end());

    auto rng = Xoshiro256ss::keyed(seed, {0x73706c6974ULL}); // "split"
    shuffle(identities, rng);

    const std::size_t n = identities.size();
    const auto boundary = [&](double cumulative) {
        auto b = static_cast<std::size_t>(std::llround(cumulative * static_cast<double>(n)));
        return std::min(b, n);
    };
    const std::size_t b1 = boundary(ratios[0]);
    const std::size_t b2 = std::max(b1, boundary(ratios[0] + ratios[1]));

    SplitAssignment result;
    result.ratios = ratios;
    for (std::size_t i = 0; i < n; ++i) {
        const Split split = i < b1 ? Split::Train : (i < b2 ? Split::Val : Split::Test);
        result.assignment.emplace(std::move(identities[i]), split);
    }
    return result;
}

void write_splits_csv(const SplitAssignment& assignment, std::ostream& out) {
    out << "identity_id,split\n";
    for (const auto& [identity, split] : assignment.assignment) {
        out << identity << ',' << split_name(split) << '\n';
    }
}

AttributeRegistry load_registry(std::istream& source) {
    std::vector<AttributeInfo> attributes;
    std::string line;
    while (read_line(source, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> fields = split_csv_line(line);
        AttributeInfo info;
        info.name = fields[0];
        if (fields.size() > 1 && !fields[1].empty()) {
            const auto category = category_from_name(fields[1]);
            if (!category) throw HeaderMismatch("unknown attribute category: " + fields[1]);
            info.category = *category;
        }
        if (fields.size() > 2 && !fields[2].empty()) {
            info.excluded_low_accuracy = fields[2] == "1" || fields[2] == "true";
        }
        attributes.push_back(std::move(info));
    }
    if (attributes.empty()) throw HeaderMismatch("registry file lists no attributes");
    return AttributeRegistry(std::move(attributes));
}

AttributeRegistry load_registry_file(const std::string& path) {
    auto in = open_input(path);
    return load_registry(in);
}

void write_registry(const AttributeRegistry& registry, std::ostream& out) {
    for (const auto& attr : registry.attributes()) {
        out << attr.name << ',' << category_name(attr.category) << ','
            << (attr.excluded_low_accuracy ? '1' : '0') << '\n';
    }
}

} // namespace dfaudit
