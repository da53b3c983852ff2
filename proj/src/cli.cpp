#include "dfaudit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dfaudit/annotate.hpp"
#include "dfaudit/bias.hpp"
#include "dfaudit/core.hpp"
#include "dfaudit/ingest.hpp"
#include "dfaudit/report.hpp"
#include "dfaudit/stats.hpp"
#include "dfaudit/synth.hpp"

namespace dfaudit::cli {

namespace {

namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << content;
    if (!out) throw IoError("failed writing output file: " + path);
}

// "-" means standard output.
void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    write_file(path, content);
}

AttributeRegistry resolve_registry(const std::string& registry_path) {
    if (registry_path.empty()) return AttributeRegistry::default_registry();
    return load_registry_file(registry_path);
}

RenderFormat parse_format(const std::string& name) {
    if (name == "text") return RenderFormat::Text;
    if (name == "json") return RenderFormat::Json;
    if (name == "csv") return RenderFormat::Csv;
    if (name == "svg") return RenderFormat::Svg;
    throw CLI::ValidationError("--format", "unknown format: " + name);
}

struct AuditArgs {
    std::string annotations, predictions, registry, out = "-";
    std::uint64_t min_count = 100;
    std::uint64_t seed = 0;
    std::uint32_t reps = 1;
    bool replacement = false;
    double threshold = 0.5;
};

struct ReportArgs {
    std::string in, out = "-";
    std::string format = "text";
    std::string kind = "table";
    int decimals = 2;
    bool legacy = false;
};

int run_audit(const AuditArgs& args) {
    const AttributeRegistry registry = resolve_registry(args.registry);
    const AnnotationTable annotations = load_annotations_file(args.annotations, registry);
    std::vector<std::string> warnings;
    const PredictionSet predictions =
        load_predictions_file(args.predictions, args.threshold, &warnings);
    for (const std::string& warning : warnings) {
        std::cerr << "warning: " << warning << '\n';
    }
    const AuditDataset dataset = join(annotations, predictions, JoinPolicy::Intersect);
    if (dataset.size() == 0) throw EmptyTable();
    const SupportFilterResult kept = support_filter(dataset, args.min_count);
    const BiasReport report = audit(dataset, kept, {args.seed, args.reps, args.replacement});
    write_output(args.out, report_to_json_text(report));
    return 0;
}

int run_report(const ReportArgs& args) {
    std::ifstream in(args.in, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + args.in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const BiasReport report = report_from_json_text(buffer.str());

    RenderOptions options;
    options.format = parse_format(args.format);
    options.percent_decimals = args.decimals;
    options.legacy_sentinels = args.legacy;

    std::string rendered;
    if (args.kind == "table") {
        rendered = render_table(report, options);
    } else {
        const ScatterKind kind =
            args.kind == "rp-vs-crp" ? ScatterKind::RpVsCrp : ScatterKind::PdrpVsDdrp;
        const ScatterData data = scatter_data(report, kind);
        switch (options.format) {
            case RenderFormat::Svg: rendered = render_scatter_svg(data, options); break;
            case RenderFormat::Json: rendered = render_scatter_json(data, options); break;
            default: rendered = render_scatter_csv(data, options); break;
        }
    }
    write_output(args.out, rendered);
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"dfaudit - attribute-conditioned bias audits for deepfake detectors"};
    app.require_subcommand(1);

    // filter-annotations
    std::string fa_in, fa_out = "-";
    double fa_threshold = 0.90;
    auto* filter = app.add_subcommand("filter-annotations",
                                      "turn classifier confidences into ternary labels");
    filter->add_option("--in", fa_in, "confidences.csv")->required();
    filter->add_option("--out", fa_out, "annotations.csv output");
    filter->add_option("--threshold", fa_threshold,
                       "decisions with confidence strictly below become undefined")
        ->check(CLI::Range(0.0, 1.0));

    // stats
    std::string st_in, st_out = "-", st_registry;
    auto* stats_cmd = app.add_subcommand("stats", "label distribution per attribute");
    stats_cmd->add_option("--in", st_in, "annotations.csv")->required();
    stats_cmd->add_option("--out", st_out, "dist.json output");
    stats_cmd->add_option("--registry", st_registry, "registry file (default: built-in 47)");

    // correlate
    std::string co_in, co_out = "-", co_registry, co_policy = "defined-pairs";
    std::size_t co_top = 20;
    bool co_matrix = false;
    auto* correlate = app.add_subcommand("correlate", "pairwise Pearson correlations");
    correlate->add_option("--in", co_in, "annotations.csv")->required();
    correlate->add_option("--out", co_out, "corr.csv output");
    correlate->add_option("--registry", co_registry, "registry file");
    correlate->add_option("--top", co_top, "strongest pairs per direction")
        ->check(CLI::PositiveNumber);
    correlate->add_option("--policy", co_policy, "defined-pairs | zero-as-value")
        ->check(CLI::IsMember({"defined-pairs", "zero-as-value"}));
    correlate->add_flag("--matrix", co_matrix, "emit the full matrix instead of top pairs");

    // split
    std::string sp_manifest, sp_out = "-", sp_ratios = "0.6,0.2,0.2";
    std::uint64_t sp_seed = 0;
    auto* split_cmd = app.add_subcommand("split", "subject-exclusive train/val/test split");
    split_cmd->add_option("--manifest", sp_manifest, "manifest.json")->required();
    split_cmd->add_option("--out", sp_out, "splits.csv output");
    split_cmd->add_option("--ratios", sp_ratios, "train,val,test ratios");
    split_cmd->add_option("--seed", sp_seed, "shuffle seed")->envname("DFAUDIT_SEED");

    // audit
    AuditArgs audit_args;
    auto* audit_cmd = app.add_subcommand("audit", "full per-attribute bias audit");
    audit_cmd->add_option("--annotations", audit_args.annotations, "annotations.csv")->required();
    audit_cmd->add_option("--predictions", audit_args.predictions, "predictions.csv")->required();
    audit_cmd->add_option("--registry", audit_args.registry, "registry file");
    audit_cmd->add_option("--out", audit_args.out, "report.json output");
    audit_cmd->add_option("--min-count", audit_args.min_count,
                          "minimum positives and negatives per kept attribute");
    audit_cmd->add_option("--seed", audit_args.seed, "control-group seed")->envname("DFAUDIT_SEED");
    audit_cmd->add_option("--control-reps", audit_args.reps, "control draws to average")
        ->check(CLI::PositiveNumber);
    audit_cmd->add_flag("--replacement", audit_args.replacement,
                        "draw control groups with replacement");
    audit_cmd->add_option("--threshold", audit_args.threshold,
                          "score threshold when predictions carry only scores");

    // synth
    std::string sy_config, sy_out_dir = ".";
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic audit dataset");
    synth_cmd->add_option("--config", sy_config, "synth.json")->required();
    synth_cmd->add_option("--out-dir", sy_out_dir, "output directory");

    // report
    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "render a report.json");
    report_cmd->add_option("--in", report_args.in, "report.json")->required();
    report_cmd->add_option("--out", report_args.out, "output file");
    report_cmd->add_option("--format", report_args.format, "text | json | csv | svg")
        ->check(CLI::IsMember({"text", "json", "csv", "svg"}));
    report_cmd->add_option("--kind", report_args.kind, "table | rp-vs-crp | pdrp-vs-ddrp")
        ->check(CLI::IsMember({"table", "rp-vs-crp", "pdrp-vs-ddrp"}));
    report_cmd->add_option("--decimals", report_args.decimals, "percent decimals")
        ->check(CLI::Range(0, 12));
    report_cmd->add_flag("--legacy-sentinels", report_args.legacy,
                         "render the historical All correct / All wrong strings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // help/version exit 0, anything else is usage
    }

    try {
        if (filter->parsed()) {
            const auto records = load_confidences_file(fa_in);
            const AnnotationTable table = apply_confidence_filter(
                records, {fa_threshold}, AttributeRegistry::default_registry());
            std::ostringstream out;
            write_annotations_csv(table, out);
            write_output(fa_out, out.str());
            return 0;
        }
        if (stats_cmd->parsed()) {
            const AttributeRegistry registry = resolve_registry(st_registry);
            const AnnotationTable table = load_annotations_file(st_in, registry);
            write_output(st_out, render_distribution_json(attribute_distribution(table)));
            return 0;
        }
        if (correlate->parsed()) {
            const AttributeRegistry registry = resolve_registry(co_registry);
            const AnnotationTable table = load_annotations_file(co_in, registry);
            const CorrelationPolicy policy = co_policy == "zero-as-value"
                                                 ? CorrelationPolicy::ZeroAsValue
                                                 : CorrelationPolicy::DefinedPairsOnly;
            const CorrelationMatrix matrix = pearson_correlations(table, policy);
            if (co_matrix) {
                write_output(co_out, render_correlation_matrix_csv(registry, matrix));
            } else {
                write_output(co_out,
                             render_correlations_csv(registry, top_correlations(matrix, co_top)));
            }
            return 0;
        }
        if (split_cmd->parsed()) {
            const DatasetManifest manifest = load_manifest_file(sp_manifest);
            std::array<double, 3> ratios{};
            if (std::sscanf(sp_ratios.c_str(), "%lf,%lf,%lf", &ratios[0], &ratios[1],
                            &ratios[2]) != 3) {
                throw InvalidConfig("--ratios must be three comma-separated numbers");
            }
            const SplitAssignment assignment = subject_exclusive_split(manifest, ratios, sp_seed);
            std::ostringstream out;
            write_splits_csv(assignment, out);
            write_output(sp_out, out.str());
            return 0;
        }
        if (audit_cmd->parsed()) return run_audit(audit_args);
        if (synth_cmd->parsed()) {
            std::ifstream in(sy_config, std::ios::binary);
            if (!in) throw IoError("cannot open input file: " + sy_config);
            std::stringstream buffer;
            buffer << in.rdbuf();
            const SynthConfig config = synth_config_from_json_text(buffer.str());
            const SynthOutput output = generate_population(config);

            fs::create_directories(sy_out_dir);
            const fs::path dir(sy_out_dir);
            {
                std::ofstream out(dir / "annotations.csv", std::ios::binary);
                if (!out) throw IoError("cannot write annotations.csv");
                write_annotations_csv(output.annotations, out);
            }
            {
                std::ofstream out(dir / "predictions.csv", std::ios::binary);
                if (!out) throw IoError("cannot write predictions.csv");
                write_predictions_csv(output.predictions, out);
            }
            {
                std::ofstream out(dir / "manifest.json", std::ios::binary);
                if (!out) throw IoError("cannot write manifest.json");
                write_manifest_json(output.manifest, out);
            }
            {
                std::ofstream out(dir / "registry.txt", std::ios::binary);
                if (!out) throw IoError("cannot write registry.txt");
                write_registry(*output.registry, out);
            }
            std::cerr << "annotations label digest: " << digest_hex(output.label_digest) << '\n';
            return 0;
        }
        if (report_cmd->parsed()) return run_report(report_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace dfaudit::cli
