#include "dfaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dfaudit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
    return buffer;
}

const char* side_name(RPValue::Side side) {
    switch (side) {
        case RPValue::Side::Data: return "data";
        case RPValue::Side::Control: return "control";
        case RPValue::Side::Both: return "both";
        default: return nullptr;
    }
}

RPValue::Side side_from_name(const std::string& name) {
    if (name == "data") return RPValue::Side::Data;
    if (name == "control") return RPValue::Side::Control;
    if (name == "both") return RPValue::Side::Both;
    return RPValue::Side::None;
}

ordered_json rp_to_json(const RPValue& value) {
    ordered_json out;
    switch (value.kind) {
        case RPValue::Kind::Finite:
            out["kind"] = "finite";
            out["value"] = value.value;
            break;
        case RPValue::Kind::NegGroupPerfect:
            out["kind"] = "neg_group_perfect";
            out["value"] = nullptr;
            break;
        case RPValue::Kind::BothPerfect:
            out["kind"] = "both_perfect";
            out["value"] = nullptr;
            break;
        case RPValue::Kind::Degenerate:
            out["kind"] = "degenerate";
            out["value"] = nullptr;
            break;
    }
    if (const char* side = side_name(value.side)) out["side"] = side;
    return out;
}

RPValue rp_from_json(const ordered_json& doc) {
    RPValue value;
    const std::string kind = doc.value("kind", "degenerate");
    if (kind == "finite") {
        value = RPValue::finite(doc.value("value", 0.0));
    } else if (kind == "neg_group_perfect") {
        value.kind = RPValue::Kind::NegGroupPerfect;
    } else if (kind == "both_perfect") {
        value.kind = RPValue::Kind::BothPerfect;
    } else {
        value.kind = RPValue::Kind::Degenerate;
    }
    if (doc.contains("side")) value.side = side_from_name(doc["side"].get<std::string>());
    return value;
}

ordered_json pair_to_json(const std::optional<ErrorPair>& pair) {
    if (!pair) return nullptr;
    ordered_json out;
    out["pos"] = pair->err_pos;
    out["neg"] = pair->err_neg;
    return out;
}

std::optional<ErrorPair> pair_from_json(const ordered_json& doc, std::uint64_t n_pos,
                                        std::uint64_t n_neg) {
    if (doc.is_null()) return std::nullopt;
    return ErrorPair{doc.value("pos", 0.0), doc.value("neg", 0.0), n_pos, n_neg};
}

ordered_json std_to_json(const SliceStd& deviation) {
    if (!deviation.pos && !deviation.neg) return nullptr;
    ordered_json out;
    out["pos"] = deviation.pos ? ordered_json(*deviation.pos) : ordered_json(nullptr);
    out["neg"] = deviation.neg ? ordered_json(*deviation.neg) : ordered_json(nullptr);
    return out;
}

SliceStd std_from_json(const ordered_json& doc) {
    SliceStd out;
    if (doc.is_null()) return out;
    if (doc.contains("pos") && !doc["pos"].is_null()) out.pos = doc["pos"].get<double>();
    if (doc.contains("neg") && !doc["neg"].is_null()) out.neg = doc["neg"].get<double>();
    return out;
}

ErrorSlice slice_from_name(const std::string& name) {
    if (name == "fake") return ErrorSlice::FakeOnly;
    if (name == "pristine") return ErrorSlice::PristineOnly;
    return ErrorSlice::Balanced;
}

// Per-slice relative performance derived from the stored error pairs;
// missing pairs render as degenerate.
RPValue derived_rp(const std::optional<ErrorPair>& pair) {
    return pair ? relative_performance(*pair) : RPValue::degenerate();
}

} // namespace

std::string format_percent(double fraction, int decimals) {
    return fmt_fixed(fraction * 100.0, decimals) + "%";
}

std::string format_rp(const RPValue& value, const RenderOptions& options) {
    switch (value.kind) {
        case RPValue::Kind::Finite:
            return format_percent(value.value, options.percent_decimals);
        case RPValue::Kind::NegGroupPerfect:
            return options.legacy_sentinels ? "All wrong" : "n/a (negative group perfect)";
        case RPValue::Kind::BothPerfect:
            return options.legacy_sentinels ? "All correct" : "n/a (both perfect)";
        case RPValue::Kind::Degenerate:
            return options.legacy_sentinels ? "-" : "n/a (degenerate group)";
    }
    return "?";
}

namespace {

std::string render_table_text(const BiasReport& report, const RenderOptions& options) {
    constexpr const char* kColumns[] = {"Bal. Data",  "Bal. Ctrl",  "Fake Data",
                                        "Fake Ctrl",  "Prist. Data", "Prist. Ctrl"};
    const int name_width = 24;
    const int class_width = 12;
    const int cell_width = 14;

    std::ostringstream out;
    auto put = [&](const std::string& text, int width) {
        out << text;
        for (int i = static_cast<int>(text.size()); i < width; ++i) out << ' ';
    };
    put("Attribute", name_width);
    put("Class", class_width);
    for (const char* column : kColumns) put(column, cell_width);
    out << '\n';
    out << std::string(name_width + class_width + 6 * cell_width, '-') << '\n';

    for (const BiasRow& row : report.rows) {
        const std::optional<ErrorPair>* pairs[6] = {
            &row.data.balanced, &row.control.balanced, &row.data.fake,
            &row.control.fake,  &row.data.pristine,    &row.control.pristine,
        };
        put(row.attribute, name_width);
        put("Positive", class_width);
        for (const auto* pair : pairs) {
            put(*pair ? format_percent((*pair)->err_pos, options.percent_decimals)
                      : std::string(options.legacy_sentinels ? "-" : "n/a"),
                cell_width);
        }
        out << '\n';
        put("", name_width);
        put("Negative", class_width);
        for (const auto* pair : pairs) {
            put(*pair ? format_percent((*pair)->err_neg, options.percent_decimals)
                      : std::string(options.legacy_sentinels ? "-" : "n/a"),
                cell_width);
        }
        out << '\n';
        put("", name_width);
        put("Rel. Perf.", class_width);
        for (const auto* pair : pairs) {
            put(format_rp(derived_rp(*pair), options), cell_width);
        }
        out << '\n';
    }
    return out.str();
}

std::string render_table_csv(const BiasReport& report, const RenderOptions& options) {
    std::ostringstream out;
    out << "attribute,category,n_pos,n_neg";
    for (const char* source : {"data", "ctrl"}) {
        for (const char* slice : {"bal", "fake", "prist"}) {
            out << ',' << slice << '_' << source << "_pos,"
                << slice << '_' << source << "_neg";
        }
    }
    out << ",rp_data,rp_control,crp,pdrp,ddrp\n";

    for (const BiasRow& row : report.rows) {
        out << row.attribute << ',' << category_name(row.category) << ',' << row.n_pos << ','
            << row.n_neg;
        const SliceSet* sources[2] = {&row.data, &row.control};
        for (const SliceSet* source : sources) {
            const std::optional<ErrorPair>* pairs[3] = {&source->balanced, &source->fake,
                                                        &source->pristine};
            for (const auto* pair : pairs) {
                if (*pair) {
                    out << ',' << fmt_fixed((*pair)->err_pos * 100.0, options.percent_decimals)
                        << ',' << fmt_fixed((*pair)->err_neg * 100.0, options.percent_decimals);
                } else {
                    out << ",,";
                }
            }
        }
        for (const RPValue* value : {&row.rp_data, &row.rp_control, &row.crp, &row.pdrp,
                                     &row.ddrp}) {
            out << ',';
            if (value->is_finite()) {
                out << fmt_fixed(value->value * 100.0, options.percent_decimals);
            } else {
                out << format_rp(*value, options);
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace

std::string render_table(const BiasReport& report, const RenderOptions& options) {
    switch (options.format) {
        case RenderFormat::Text:
            if (report.rows.empty()) throw EmptyTable();
            return render_table_text(report, options);
        case RenderFormat::Csv:
            if (report.rows.empty()) throw EmptyTable();
            return render_table_csv(report, options);
        case RenderFormat::Json:
            return report_to_json_text(report);
        case RenderFormat::Svg:
            throw InvalidConfig("tables have no SVG rendering; use the scatter output");
    }
    return {};
}

std::string report_to_json_text(const BiasReport& report) {
    ordered_json doc;
    ordered_json provenance;
    provenance["seed"] = report.provenance.seed;
    provenance["reps"] = report.provenance.reps;
    provenance["replacement"] = report.provenance.replacement;
    provenance["min_count"] = report.provenance.min_count;
    provenance["n_samples"] = report.provenance.n_samples;
    provenance["annotations_digest"] = report.provenance.annotations_digest;
    provenance["predictions_digest"] = report.provenance.predictions_digest;
    doc["provenance"] = std::move(provenance);

    doc["rows"] = ordered_json::array();
    for (const BiasRow& row : report.rows) {
        ordered_json r;
        r["attribute"] = row.attribute;
        r["category"] = std::string(category_name(row.category));
        r["counts"] = {{"pos", row.n_pos}, {"neg", row.n_neg}};
        ordered_json errors;
        const std::pair<const char*, const SliceSet*> sources[2] = {{"data", &row.data},
                                                                    {"control", &row.control}};
        for (const auto& [name, source] : sources) {
            ordered_json s;
            s["balanced"] = pair_to_json(source->balanced);
            s["fake"] = pair_to_json(source->fake);
            s["pristine"] = pair_to_json(source->pristine);
            errors[name] = std::move(s);
        }
        r["errors"] = std::move(errors);
        ordered_json control_std;
        control_std["balanced"] = std_to_json(row.std_balanced);
        control_std["fake"] = std_to_json(row.std_fake);
        control_std["pristine"] = std_to_json(row.std_pristine);
        r["control_std"] = std::move(control_std);
        r["degenerate"] = ordered_json::array();
        for (const Degeneracy& d : row.degenerate) {
            r["degenerate"].push_back({{"slice", std::string(slice_name(d.slice))},
                                       {"source", d.source},
                                       {"group", d.group},
                                       {"missing", d.missing}});
        }
        r["rp_data"] = rp_to_json(row.rp_data);
        r["rp_control"] = rp_to_json(row.rp_control);
        r["crp"] = rp_to_json(row.crp);
        r["pdrp"] = rp_to_json(row.pdrp);
        r["ddrp"] = rp_to_json(row.ddrp);
        doc["rows"].push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
}

BiasReport report_from_json_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(0, 0, std::string("report is not valid JSON: ") + e.what());
    }
    BiasReport report;
    const auto& provenance = doc.at("provenance");
    report.provenance.seed = provenance.value("seed", 0ULL);
    report.provenance.reps = provenance.value("reps", 1U);
    report.provenance.replacement = provenance.value("replacement", false);
    report.provenance.min_count = provenance.value("min_count", 0ULL);
    report.provenance.n_samples = provenance.value("n_samples", 0ULL);
    report.provenance.annotations_digest = provenance.value("annotations_digest", "");
    report.provenance.predictions_digest = provenance.value("predictions_digest", "");

    for (const auto& r : doc.at("rows")) {
        BiasRow row;
        row.attribute = r.value("attribute", "");
        if (const auto category = category_from_name(r.value("category", "Other"))) {
            row.category = *category;
        }
        row.n_pos = r.at("counts").value("pos", 0ULL);
        row.n_neg = r.at("counts").value("neg", 0ULL);
        const auto& errors = r.at("errors");
        row.data.balanced = pair_from_json(errors.at("data").at("balanced"), row.n_pos, row.n_neg);
        row.data.fake = pair_from_json(errors.at("data").at("fake"), row.n_pos, row.n_neg);
        row.data.pristine = pair_from_json(errors.at("data").at("pristine"), row.n_pos, row.n_neg);
        row.control.balanced =
            pair_from_json(errors.at("control").at("balanced"), row.n_pos, row.n_neg);
        row.control.fake = pair_from_json(errors.at("control").at("fake"), row.n_pos, row.n_neg);
        row.control.pristine =
            pair_from_json(errors.at("control").at("pristine"), row.n_pos, row.n_neg);
        if (r.contains("control_std")) {
            row.std_balanced = std_from_json(r["control_std"].value("balanced", ordered_json()));
            row.std_fake = std_from_json(r["control_std"].value("fake", ordered_json()));
            row.std_pristine = std_from_json(r["control_std"].value("pristine", ordered_json()));
        }
        for (const auto& d : r.value("degenerate", ordered_json::array())) {
            row.degenerate.push_back({slice_from_name(d.value("slice", "balanced")),
                                      d.value("source", ""), d.value("group", ""),
                                      d.value("missing", "")});
        }
        row.rp_data = rp_from_json(r.at("rp_data"));
        row.rp_control = rp_from_json(r.at("rp_control"));
        row.crp = rp_from_json(r.at("crp"));
        row.pdrp = rp_from_json(r.at("pdrp"));
        row.ddrp = rp_from_json(r.at("ddrp"));
        report.rows.push_back(std::move(row));
    }
    return report;
}

ScatterData scatter_data(const BiasReport& report, ScatterKind kind) {
    ScatterData data;
    if (kind == ScatterKind::RpVsCrp) {
        data.x_label = "CRP";
        data.y_label = "RP";
    } else {
        data.x_label = "DDRP";
        data.y_label = "PDRP";
    }
    for (const BiasRow& row : report.rows) {
        const RPValue& x = kind == ScatterKind::RpVsCrp ? row.crp : row.ddrp;
        const RPValue& y = kind == ScatterKind::RpVsCrp ? row.rp_data : row.pdrp;
        if (x.is_finite() && y.is_finite()) {
            data.points.push_back({row.attribute, x.value, y.value});
        } else {
            const RPValue& bad = x.is_finite() ? y : x;
            std::string reason = (x.is_finite() ? data.y_label : data.x_label) + ": ";
            switch (bad.kind) {
                case RPValue::Kind::NegGroupPerfect: reason += "negative group perfect"; break;
                case RPValue::Kind::BothPerfect: reason += "both groups perfect"; break;
                default: reason += "degenerate group"; break;
            }
            data.skipped.push_back({row.attribute, std::move(reason)});
        }
    }
    return data;
}

std::string render_scatter_csv(const ScatterData& data, const RenderOptions& options) {
    std::ostringstream out;
    out << "attribute,x,y\n";
    for (const ScatterPoint& p : data.points) {
        out << p.attribute << ',' << fmt_fixed(p.x * 100.0, options.percent_decimals) << ','
            << fmt_fixed(p.y * 100.0, options.percent_decimals) << '\n';
    }
    return out.str();
}

std::string render_scatter_json(const ScatterData& data, const RenderOptions&) {
    ordered_json doc;
    doc["x_label"] = data.x_label;
    doc["y_label"] = data.y_label;
    doc["points"] = ordered_json::array();
    for (const ScatterPoint& p : data.points) {
        doc["points"].push_back({{"attribute", p.attribute}, {"x", p.x}, {"y", p.y}});
    }
    doc["skipped"] = ordered_json::array();
    for (const ScatterSkipped& s : data.skipped) {
        doc["skipped"].push_back({{"attribute", s.attribute}, {"reason", s.reason}});
    }
    return doc.dump(2) + "\n";
}

std::string render_scatter_svg(const ScatterData& data, const RenderOptions& options) {
    // Symmetric range in percent units, rounded up to a multiple of 50.
    double extent = 100.0;
    for (const ScatterPoint& p : data.points) {
        extent = std::max({extent, std::abs(p.x) * 100.0, std::abs(p.y) * 100.0});
    }
    extent = std::ceil(extent / 50.0) * 50.0;

    const double size = 560.0;
    const double margin = 60.0;
    const double canvas = size + 2.0 * margin;
    const auto sx = [&](double pct) { return margin + (pct + extent) / (2.0 * extent) * size; };
    const auto sy = [&](double pct) { return margin + (extent - pct) / (2.0 * extent) * size; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << canvas << "\" height=\""
        << canvas << "\" viewBox=\"0 0 " << canvas << ' ' << canvas << "\">\n";
    out << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size
        << "\" height=\"" << size / 2.0
        << "\" fill=\"#3a3\" fill-opacity=\"0.08\"/>\n"; // y > 0: better with attribute
    out << "  <rect x=\"" << margin << "\" y=\"" << margin + size / 2.0 << "\" width=\"" << size
        << "\" height=\"" << size / 2.0
        << "\" fill=\"#a33\" fill-opacity=\"0.08\"/>\n"; // y < 0: worse with attribute
    out << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size
        << "\" height=\"" << size << "\" fill=\"none\" stroke=\"#444\"/>\n";

    // axes through the origin and the bisectrix y = x
    out << "  <line x1=\"" << sx(-extent) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(extent)
        << "\" y2=\"" << sy(0) << "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << sx(0) << "\" y1=\"" << sy(-extent) << "\" x2=\"" << sx(0)
        << "\" y2=\"" << sy(extent) << "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << sx(-extent) << "\" y1=\"" << sy(-extent) << "\" x2=\"" << sx(extent)
        << "\" y2=\"" << sy(extent)
        << "\" stroke=\"#36c\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";

    for (double tick = -extent; tick <= extent + 1e-9; tick += 50.0) {
        out << "  <line x1=\"" << sx(tick) << "\" y1=\"" << sy(0) - 4 << "\" x2=\"" << sx(tick)
            << "\" y2=\"" << sy(0) + 4 << "\" stroke=\"#888\"/>\n";
        out << "  <line x1=\"" << sx(0) - 4 << "\" y1=\"" << sy(tick) << "\" x2=\"" << sx(0) + 4
            << "\" y2=\"" << sy(tick) << "\" stroke=\"#888\"/>\n";
        if (tick != 0.0) {
            out << "  <text x=\"" << sx(tick) << "\" y=\"" << sy(0) + 18
                << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#555\">"
                << fmt_fixed(tick, 0) << "</text>\n";
            out << "  <text x=\"" << sx(0) + 8 << "\" y=\"" << sy(tick) + 3
                << "\" font-size=\"10\" fill=\"#555\">" << fmt_fixed(tick, 0) << "</text>\n";
        }
    }

    for (const ScatterPoint& p : data.points) {
        out << "  <circle cx=\"" << fmt_fixed(sx(p.x * 100.0), 2) << "\" cy=\""
            << fmt_fixed(sy(p.y * 100.0), 2)
            << "\" r=\"4\" fill=\"#c60\" fill-opacity=\"0.85\"><title>" << p.attribute << " ("
            << fmt_fixed(p.x * 100.0, options.percent_decimals) << ", "
            << fmt_fixed(p.y * 100.0, options.percent_decimals) << ")</title></circle>\n";
        out << "  <text x=\"" << fmt_fixed(sx(p.x * 100.0) + 6.0, 2) << "\" y=\""
            << fmt_fixed(sy(p.y * 100.0) + 3.0, 2) << "\" font-size=\"9\" fill=\"#333\">"
            << p.attribute << "</text>\n";
    }

    out << "  <text x=\"" << margin + size / 2.0 << "\" y=\"" << canvas - 14
        << "\" font-size=\"13\" text-anchor=\"middle\">" << data.x_label << " (%)</text>\n";
    out << "  <text x=\"18\" y=\"" << margin + size / 2.0
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << margin + size / 2.0 << ")\">" << data.y_label << " (%)</text>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << margin - 24
        << "\" font-size=\"12\" fill=\"#333\">" << data.y_label << " over " << data.x_label
        << "; dashed line marks " << data.y_label << " = " << data.x_label << "</text>\n";
    if (!data.skipped.empty()) {
        out << "  <text x=\"" << margin << "\" y=\"" << margin - 8
            << "\" font-size=\"11\" fill=\"#777\">" << data.skipped.size()
            << " attribute(s) without finite coordinates omitted</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_distribution_json(const DistributionSummary& summary) {
    ordered_json doc;
    doc["samples"] = summary.sample_count;
    doc["attributes"] = ordered_json::array();
    for (const DistributionRow& row : summary.rows) {
        doc["attributes"].push_back({{"attribute", row.attribute},
                                     {"positive_pct", row.positive_pct},
                                     {"negative_pct", row.negative_pct},
                                     {"undefined_pct", row.undefined_pct}});
    }
    return doc.dump(2) + "\n";
}

std::string render_correlations_csv(const AttributeRegistry& registry,
                                    const TopCorrelations& top) {
    std::ostringstream out;
    out << "attr_a,attr_b,pearson,support\n";
    const auto write = [&](const std::vector<CorrelationEntry>& entries) {
        for (const CorrelationEntry& e : entries) {
            out << registry.at(e.a).name << ',' << registry.at(e.b).name << ','
                << fmt_fixed(e.r, 6) << ',' << e.support << '\n';
        }
    };
    write(top.positive);
    write(top.negative);
    return out.str();
}

std::string render_correlation_matrix_csv(const AttributeRegistry& registry,
                                          const CorrelationMatrix& matrix) {
    std::ostringstream out;
    out << "attr_a,attr_b,pearson,support\n";
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = i + 1; j < matrix.size(); ++j) {
            out << registry.at(i).name << ',' << registry.at(j).name << ',';
            if (const auto value = matrix.at(i, j)) {
                out << fmt_fixed(*value, 6);
            } else {
                out << "n/a";
            }
            out << ',' << matrix.support(i, j) << '\n';
        }
    }
    return out.str();
}

std::string render_correctness_text(const CorrectnessReport& report) {
    std::ostringstream out;
    out << "attribute,accuracy,precision,recall,support\n";
    const auto opt = [&](const std::optional<double>& value) {
        return value ? fmt_fixed(*value, 2) : std::string("n/a");
    };
    for (const CorrectnessRow& row : report.rows) {
        out << row.attribute << ',' << fmt_fixed(row.accuracy, 2) << ',' << opt(row.precision)
            << ',' << opt(row.recall) << ',' << row.support << '\n';
    }
    out << "macro," << report.macro_summary() << '\n';
    return out.str();
}

} // namespace dfaudit
