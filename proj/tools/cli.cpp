#include "cli.hpp"

#include <mchom/error.hpp>
#include <mchom/parallel.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mchom::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const int v = std::stoi(trim(item), &pos);
            if (pos != trim(item).size())
                throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            config_error("cli", key + " expects comma-separated integers, got '" + text + "'");
        }
    }
    if (out.empty())
        config_error("cli", key + " is empty");
    return out;
}

std::string out_path(const ExperimentConfig& c, const std::string& name)
{
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec)
        io_error("output", "cannot create directory " + c.out_dir + ": " + ec.message());
    return (fs::path(c.out_dir) / name).string();
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        io_error("output", "cannot write " + path);
    return os;
}

void write_manifest(const ExperimentConfig& c, const std::vector<std::string>& outputs, const ErrorReport* error,
                    double runtime)
{
    const std::string path = out_path(c, "manifest_" + config_hash(c).substr(0, 12) + ".json");
    auto os = open_out(path);
    os << manifest_json(c, outputs, error, runtime);
}

int cmd_solve_fine(const ExperimentConfig& c, std::ostream& out)
{
    const CaseData data = build_case(c);
    const FineSolution sol = solve_reference(data, c);
    std::vector<std::string> outputs;
    outputs.push_back(out_path(c, "fine_u.txt"));
    write_scalar_field_file(outputs.back(), sol.u);
    if (c.formulation == Formulation::mixed) {
        outputs.push_back(out_path(c, "fine_v.txt"));
        write_vector_field_file(outputs.back(), sol.v);
    }
    outputs.push_back(out_path(c, "medium.txt"));
    write_raster_file(outputs.back(), data.medium);
    write_manifest(c, outputs, nullptr, 0.0);
    out << "fine solve: " << data.medium.grid.nx << "x" << data.medium.grid.ny
        << " cells, residual " << format_number(sol.residual) << "\n";
    return 0;
}

int cmd_cells(const ExperimentConfig& c, const std::vector<int>& block, bool dump_decay, bool dump_columns,
              std::ostream& out)
{
    if (block.size() != 2)
        config_error("cli", "--block expects bx,by");
    const CaseData data = build_case(c);
    const CoarsePartition partition(data.medium.grid, c.M);
    const BlockIndex b{block[0], block[1]};
    if (b.bx < 0 || b.bx >= c.M || b.by < 0 || b.by >= c.M)
        config_error("cells", "block (" + std::to_string(b.bx) + "," + std::to_string(b.by) + ") outside 0.."
                                  + std::to_string(c.M - 1));
    CellOptions opts;
    opts.boundary = c.cell_boundary;
    const LayerChoice lc = c.layer_choice();
    const RegionSet regions = build_regions(partition, b, lc.l, lc.l_v, lc.l_i);
    const CellSolutionSet set = c.formulation == Formulation::mixed
                                    ? MixedCellSolver(data.medium, partition, regions, opts).solve_all()
                                    : EllipticCellSolver(data.medium, partition, regions, opts).solve_all();
    std::vector<std::string> outputs;
    double worst = 0.0;
    for (const auto& col : set.columns) {
        worst = std::max(worst, col.constraint_residual);
        if (dump_columns) {
            outputs.push_back(out_path(c, "column_" + std::to_string(b.bx) + "_" + std::to_string(b.by) + "_"
                                              + col.id.name() + ".txt"));
            write_scalar_field_file(outputs.back(), column_scalar_field(set, col, data.medium.grid));
        }
    }
    out << "block " << b.bx << "," << b.by << ": " << set.columns.size() << " columns, max constraint residual "
        << format_number(worst) << "\n";
    if (dump_decay) {
        std::vector<LayerChoice> layers;
        for (int l = 1; l <= c.layers; ++l) {
            ExperimentConfig cl = c;
            cl.layers = l;
            cl.layers_v = cl.layers_i = -1;
            layers.push_back(cl.layer_choice());
        }
        const DecayReport rep = decay_report(data.medium, partition, b, layers, c.formulation, opts);
        outputs.push_back(out_path(c, "decay_" + std::to_string(b.bx) + "_" + std::to_string(b.by) + ".jsonl"));
        auto os = open_out(outputs.back());
        write_decay_jsonl(os, rep);
        write_decay_jsonl(out, rep);
    }
    write_manifest(c, outputs, nullptr, 0.0);
    return 0;
}

int cmd_upscale(const ExperimentConfig& c, std::ostream& out)
{
    const CaseData data = build_case(c);
    const CoarsePartition partition(data.medium.grid, c.M);
    const auto coeffs = upscale(data, partition, c);
    const std::string path = out_path(c, "tensors.json");
    auto os = open_out(path);
    write_coefficients_json(os, coeffs, c.M);
    write_manifest(c, {path}, nullptr, 0.0);
    out << "wrote " << path << "\n";
    return 0;
}

int cmd_solve_coarse(const ExperimentConfig& c, const std::string& tensors, std::ostream& out)
{
    std::vector<EffectiveCoefficients> coeffs;
    int M = c.M;
    if (!tensors.empty()) {
        std::ifstream is(tensors);
        if (!is)
            io_error("solve-coarse", "cannot read " + tensors);
        coeffs = read_coefficients_json(is, &M);
    } else {
        const CaseData data = build_case(c);
        coeffs = upscale(data, CoarsePartition(data.medium.grid, c.M), c);
    }
    const CoarseSolution sol = solve_coarse(coeffs, M, c);
    const std::string table = out_path(c, "coarse.txt");
    const std::string meta = out_path(c, "coarse.json");
    {
        auto os = open_out(table);
        write_coarse_table(os, sol);
    }
    {
        auto os = open_out(meta);
        write_coarse_metadata(os, sol);
    }
    write_manifest(c, {table, meta}, nullptr, 0.0);
    out << "coarse solve: M=" << M << ", residual " << format_number(sol.residual) << "\n";
    return 0;
}

void report_row(const ExperimentConfig& c, const CaseResult& r, std::ostream& out, std::ostream& err)
{
    for (const auto& w : r.error.warnings)
        err << "warning: " << w << "\n";
    const std::string row = csv_row(c, r.error, r.runtime_s);
    const std::string csv = out_path(c, "results.csv");
    append_csv(csv, row);
    write_manifest(c, {csv}, &r.error, r.runtime_s);
    out << row << "\n";
}

int cmd_run_case(const ExperimentConfig& c, std::ostream& out, std::ostream& err)
{
    const CaseResult r = run_case(c);
    out << csv_header() << "\n";
    report_row(c, r, out, err);
    return 0;
}

int cmd_sweep(const ExperimentConfig& base, const std::vector<int>& pairs, int fixed_M, const std::string& layers,
              std::ostream& out, std::ostream& err)
{
    std::vector<int> per_level;
    if (!layers.empty()) {
        per_level = parse_int_list("--layers-per-level", layers);
        if (per_level.size() != pairs.size())
            config_error("cli", "--layers-per-level needs one entry per sweep level");
    }
    std::vector<ExperimentConfig> configs;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (pairs[k] < 1)
            config_error("cli", "sweep levels must be positive");
        ExperimentConfig c = base;
        c.eps = 1.0 / pairs[k];
        c.M = fixed_M > 0 ? fixed_M : pairs[k];
        if (!per_level.empty())
            c.layers = per_level[k];
        c.validate();
        configs.push_back(c);
    }
    // Configs run side by side; each pipeline then works on one thread.
    const int workers = std::min<int>(resolve_threads(base.threads), static_cast<int>(configs.size()));
    if (workers > 1)
        for (auto& c : configs)
            c.threads = 1;
    std::vector<CaseResult> results(configs.size());
    parallel_for(static_cast<int>(configs.size()), workers, [&](int k) { results[k] = run_case(configs[k]); });
    out << csv_header() << "\n";
    for (std::size_t k = 0; k < configs.size(); ++k) {
        configs[k].threads = base.threads;
        report_row(configs[k], results[k], out, err);
    }
    return 0;
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int n = 0;
    while (std::getline(ss, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_error("config", "line " + std::to_string(n) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            config_error("config", "line " + std::to_string(n) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        io_error("config", "cannot read " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_text(const ExperimentConfig& config)
{
    std::string text;
    for (const auto& [k, v] : config.to_map(true))
        text += k + " = " + v + "\n";
    return text;
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multicontinuum homogenization: cell problems, effective tensors and coarse solves"};
    app.require_subcommand(1, 1);

    RunSpec spec;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;

    // Options shared by every subcommand. Each maps onto a config key.
    struct KeyFlag
    {
        const char* flag;
        const char* key;
        const char* help;
    };
    static const KeyFlag key_flags[] = {
        {"--case", "case", "0 homogeneous, 1 layers, 2 inclusions, 3 fixed-value layers, 4 raster"},
        {"--M", "M", "coarse blocks per axis (H = 1/M)"},
        {"--eps", "eps", "period of the microstructure"},
        {"--layers", "layers", "oversampling layers l"},
        {"--layers-v", "layers_v", "velocity-constraint layers"},
        {"--layers-i", "layers_i", "integration layers"},
        {"--formulation", "formulation", "mixed or elliptic"},
        {"--cell-boundary", "cell_boundary", "consistent, zero_pressure or zero_flux"},
        {"--neglect", "neglect", "drop alpha_v and the paired convection terms"},
        {"--gradient-source", "gradient_source", "keep the source paired with test gradients"},
        {"--fraction", "fraction", "geometry fraction override"},
        {"--kappa", "kappa", "homogeneous coefficient"},
        {"--labels", "labels", "homogeneous case: 1 or 2 continua"},
        {"--kappa-low", "kappa_low", "case 3 low value"},
        {"--kappa-high", "kappa_high", "case 3 high value"},
        {"--medium", "medium_file", "raster file for case 4"},
        {"--threads", "threads", "worker threads (default MCHOM_THREADS or all cores)"},
        {"--out", "out", "output directory"},
    };

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", spec.config_path, "key = value configuration file");
        sub->add_option("--set", sets, "key=value override (repeatable)");
        for (const auto& kf : key_flags) {
            const std::string key = kf.key;
            sub->add_option_function<std::string>(kf.flag, [&flags, key](const std::string& v) { flags[key] = v; },
                                                  kf.help)
                ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
    };

    auto* fine = app.add_subcommand("solve-fine", "fine-scale reference solve");
    auto* cells = app.add_subcommand("cells", "cell problems of one coarse block");
    auto* ups = app.add_subcommand("upscale", "effective tensors for every block");
    auto* coarse = app.add_subcommand("solve-coarse", "coarse multicontinuum solve");
    auto* runc = app.add_subcommand("run-case", "full pipeline with error report");
    auto* sweep = app.add_subcommand("sweep", "run-case over a list of levels");
    for (auto* s : {fine, cells, ups, coarse, runc, sweep})
        add_common(s);

    std::string block_text;
    bool dump_decay = false, dump_columns = false;
    cells->add_option("--block", block_text, "bx,by (0-based)")->required();
    cells->add_flag("--dump-decay", dump_decay, "decay ratios for l = 1..layers as JSON lines");
    cells->add_flag("--dump-columns", dump_columns, "write every column as a fine-grid field");

    std::string tensors;
    coarse->add_option("--tensors", tensors, "tensor JSON from upscale");

    std::string pairs_text, layers_text;
    int fixed_M = 0;
    sweep->add_option("--pairs", pairs_text, "levels n: eps = 1/n and, unless --fixed-M, H = 1/n")->required();
    sweep->add_option("--fixed-M", fixed_M, "keep M fixed across levels");
    sweep->add_option("--layers-per-level", layers_text, "one l per level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error [config] cli: " << e.what() << "\n";
        return exit_code(ErrorCategory::config);
    }

    try {
        spec.command = app.get_subcommands().front()->get_name();
        if (!spec.config_path.empty())
            spec.overrides = read_config_file(spec.config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                config_error("cli", "--set expects key=value, got '" + s + "'");
            spec.overrides[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
        }
        for (const auto& [k, v] : flags)
            spec.overrides[k] = v;
        spec.config.apply(spec.overrides);
        spec.config.validate();

        const ExperimentConfig& c = spec.config;
        if (spec.command == "solve-fine")
            return cmd_solve_fine(c, out);
        if (spec.command == "cells")
            return cmd_cells(c, parse_int_list("--block", block_text), dump_decay, dump_columns, out);
        if (spec.command == "upscale")
            return cmd_upscale(c, out);
        if (spec.command == "solve-coarse")
            return cmd_solve_coarse(c, tensors, out);
        if (spec.command == "run-case")
            return cmd_run_case(c, out, err);
        return cmd_sweep(c, parse_int_list("--pairs", pairs_text), fixed_M, layers_text, out, err);
    } catch (const Error& e) {
        err << "error [" << category_name(e.category()) << "] " << e.stage() << ": " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        err << "error [io] output: " << e.what() << "\n";
        return exit_code(ErrorCategory::io);
    } catch (const std::exception& e) {
        err << "error [solver] " << spec.command << ": " << e.what() << "\n";
        return exit_code(ErrorCategory::solver);
    }
}

} // namespace mchom::cli
