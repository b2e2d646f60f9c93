#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "finsler/report.hpp"

namespace {

using finsler::report::Document;
using finsler::report::RunConfig;

struct CommonOpts {
    RunConfig cfg;
    std::string depth = "second";
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o, const char* default_depth) {
    o.depth = default_depth;
    cmd->add_option("--metric", o.cfg.metric, "builtin family name or metric file path");
    cmd->add_option("--n", o.cfg.n, "dimension for builtin metrics");
    cmd->add_option("--kappa", o.cfg.kappa, "curvature parameter for builtin metrics");
    cmd->add_option("--points", o.cfg.points, "number of sample points");
    cmd->add_option("--seed", o.cfg.seed, "sampling seed");
    cmd->add_option("--order", o.cfg.order, "jet truncation order");
    cmd->add_option("--depth", o.depth, "derivative depth: base, first or second");
    cmd->add_option("--eps-fit", o.cfg.eps.fit, "fit residual tolerance");
    cmd->add_option("--eps-deg", o.cfg.eps.deg, "degenerate-target tolerance");
    cmd->add_option("--eps-form", o.cfg.eps.form, "nonzero-form tolerance");
    cmd->add_option("--eps-gram", o.cfg.eps.gram, "Gram conditioning tolerance");
    cmd->add_option("--out", o.cfg.out, "report path ('-' for stdout)");
    cmd->add_option("--format", o.format, "report format: json or text");
}

int finish_config(CommonOpts& o, bool needs_second) {
    if (o.depth == "base") {
        o.cfg.depth = finsler::geom::Depth::Base;
    } else if (o.depth == "first") {
        o.cfg.depth = finsler::geom::Depth::First;
    } else if (o.depth == "second") {
        o.cfg.depth = finsler::geom::Depth::Second;
    } else {
        std::cerr << "error: unknown depth '" << o.depth << "'\n";
        return 1;
    }
    if (o.format == "json") {
        o.cfg.format = RunConfig::Format::Json;
    } else if (o.format == "text") {
        o.cfg.format = RunConfig::Format::Text;
    } else {
        std::cerr << "error: unknown format '" << o.format << "'\n";
        return 1;
    }
    if (needs_second && o.cfg.depth != finsler::geom::Depth::Second) {
        std::cerr << "error: this command requires --depth second\n";
        return 1;
    }
    if (o.cfg.depth == finsler::geom::Depth::Second && o.cfg.order < 8) {
        std::cerr << "error: depth second requires jet order >= 8\n";
        return 1;
    }
    if (o.cfg.points < 1) {
        std::cerr << "error: at least one sample point is required\n";
        return 1;
    }
    return -1;
}

int emit(const Document& doc, const RunConfig& cfg) {
    const std::string& payload =
        cfg.format == RunConfig::Format::Json ? doc.json : doc.text;
    if (cfg.out == "-") {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        if (cfg.format == RunConfig::Format::Json) std::fputc('\n', stdout);
    } else {
        std::ofstream out(cfg.out, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write report to '" << cfg.out << "'\n";
            return 1;
        }
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (cfg.format == RunConfig::Format::Json) out.put('\n');
    }
    return doc.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finsler curvature and recurrence toolkit"};
    app.require_subcommand(1);

    CommonOpts classify_opts, verify_opts, diagram_opts, oracle_opts;
    auto* classify = app.add_subcommand("classify", "fit and judge all recurrence conditions");
    add_common(classify, classify_opts, "second");
    auto* verify = app.add_subcommand("verify", "evaluate the curvature identities as residuals");
    add_common(verify, verify_opts, "second");
    auto* diag = app.add_subcommand("diagram", "evaluate the implication rules over a classification");
    add_common(diag, diagram_opts, "second");
    auto* oracle = app.add_subcommand("oracle", "cross-check the jet pipeline against finite differences");
    add_common(oracle, oracle_opts, "first");

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify->parsed()) {
            int rc = finish_config(classify_opts, true);
            if (rc >= 0) return rc;
            return emit(finsler::report::run_classify(classify_opts.cfg), classify_opts.cfg);
        }
        if (verify->parsed()) {
            int rc = finish_config(verify_opts, true);
            if (rc >= 0) return rc;
            return emit(finsler::report::run_verify(verify_opts.cfg), verify_opts.cfg);
        }
        if (diag->parsed()) {
            int rc = finish_config(diagram_opts, true);
            if (rc >= 0) return rc;
            return emit(finsler::report::run_diagram(diagram_opts.cfg), diagram_opts.cfg);
        }
        if (oracle->parsed()) {
            int rc = finish_config(oracle_opts, false);
            if (rc >= 0) return rc;
            if (oracle_opts.cfg.depth == finsler::geom::Depth::Second) {
                std::cerr << "error: oracle supports --depth base or first\n";
                return 1;
            }
            return emit(finsler::report::run_oracle(oracle_opts.cfg), oracle_opts.cfg);
        }
    } catch (const finsler::report::MetricLoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const finsler::report::SamplingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
