#include <mchom/experiments.hpp>

#include <mchom/error.hpp>
#include <mchom/parallel.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mchom {

namespace {

const char* formulation_name(Formulation f) { return f == Formulation::mixed ? "mixed" : "elliptic"; }

const char* boundary_name(CellBoundary b)
{
    switch (b) {
    case CellBoundary::consistent_pressure: return "consistent";
    case CellBoundary::zero_pressure: return "zero_pressure";
    case CellBoundary::zero_flux: return "zero_flux";
    }
    return "consistent";
}

int parse_int(const std::string& key, const std::string& v)
{
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        config_error("config", "key '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        // Allow fractions such as 1/20 for periods.
        const auto slash = v.find('/');
        if (slash != std::string::npos) {
            const double a = parse_double(key, v.substr(0, slash));
            const double b = parse_double(key, v.substr(slash + 1));
            if (b != 0.0)
                return a / b;
        }
        config_error("config", "key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    config_error("config", "key '" + key + "' expects a boolean, got '" + v + "'");
}

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

int ExperimentConfig::fine_cells() const
{
    const double n = M / eps;
    const long r = std::lround(n);
    if (r < 2 || std::abs(n - r) > 1e-6 * n)
        config_error("config", "M / eps must be an integer number of fine cells");
    return static_cast<int>(r);
}

LayerChoice ExperimentConfig::layer_choice() const
{
    LayerChoice lc = default_layers(layers, formulation, cell_boundary);
    if (layers_v >= 0)
        lc.l_v = layers_v;
    if (layers_i >= 0)
        lc.l_i = layers_i;
    return lc;
}

void ExperimentConfig::validate() const
{
    if (case_id < 0 || case_id > 4)
        config_error("config", "case must be 0..4");
    if (M < 1)
        config_error("config", "M must be >= 1");
    if (!(eps > 0.0) || eps > 1.0)
        config_error("config", "eps must lie in (0,1]");
    if (layers < 1)
        config_error("config", "layers must be >= 1");
    if (layers_v > layers || layers_i > layers)
        config_error("config", "layers_v and layers_i cannot exceed layers");
    if (labels != 1 && labels != 2)
        config_error("config", "labels must be 1 or 2");
    if (case_id == 4 && medium_file.empty())
        config_error("config", "case 4 needs medium_file");
    if (case_id != 4)
        (void)fine_cells();
}

std::map<std::string, std::string> ExperimentConfig::to_map(bool with_runtime) const
{
    std::map<std::string, std::string> m;
    m["case"] = std::to_string(case_id);
    m["M"] = std::to_string(M);
    m["eps"] = format_number(eps);
    m["layers"] = std::to_string(layers);
    m["layers_v"] = std::to_string(layers_v);
    m["layers_i"] = std::to_string(layers_i);
    m["formulation"] = formulation_name(formulation);
    m["cell_boundary"] = boundary_name(cell_boundary);
    m["neglect_alpha_v"] = neglect.alpha_v ? "true" : "false";
    m["neglect_convection"] = neglect.convection ? "true" : "false";
    m["gradient_source"] = gradient_source ? "true" : "false";
    m["fraction"] = format_number(fraction);
    m["orientation"] = orientation == LayerOrientation::horizontal ? "horizontal" : "vertical";
    m["kappa"] = format_number(kappa);
    m["labels"] = std::to_string(labels);
    m["kappa_low"] = format_number(kappa_low);
    m["kappa_high"] = format_number(kappa_high);
    m["medium_file"] = medium_file;
    if (with_runtime) {
        m["threads"] = std::to_string(threads);
        m["out"] = out_dir;
    }
    return m;
}

void ExperimentConfig::apply(const std::map<std::string, std::string>& kv)
{
    for (const auto& [k, v] : kv) {
        if (k == "case")
            case_id = parse_int(k, v);
        else if (k == "M")
            M = parse_int(k, v);
        else if (k == "eps")
            eps = parse_double(k, v);
        else if (k == "layers")
            layers = parse_int(k, v);
        else if (k == "layers_v")
            layers_v = parse_int(k, v);
        else if (k == "layers_i")
            layers_i = parse_int(k, v);
        else if (k == "formulation") {
            if (v == "mixed")
                formulation = Formulation::mixed;
            else if (v == "elliptic")
                formulation = Formulation::elliptic;
            else
                config_error("config", "formulation must be mixed or elliptic");
        } else if (k == "cell_boundary") {
            if (v == "consistent")
                cell_boundary = CellBoundary::consistent_pressure;
            else if (v == "zero_pressure")
                cell_boundary = CellBoundary::zero_pressure;
            else if (v == "zero_flux")
                cell_boundary = CellBoundary::zero_flux;
            else
                config_error("config", "cell_boundary must be consistent, zero_pressure or zero_flux");
        } else if (k == "neglect")
            neglect.alpha_v = neglect.convection = parse_bool(k, v);
        else if (k == "neglect_alpha_v")
            neglect.alpha_v = parse_bool(k, v);
        else if (k == "neglect_convection")
            neglect.convection = parse_bool(k, v);
        else if (k == "gradient_source")
            gradient_source = parse_bool(k, v);
        else if (k == "fraction")
            fraction = parse_double(k, v);
        else if (k == "orientation") {
            if (v == "horizontal")
                orientation = LayerOrientation::horizontal;
            else if (v == "vertical")
                orientation = LayerOrientation::vertical;
            else
                config_error("config", "orientation must be horizontal or vertical");
        } else if (k == "kappa")
            kappa = parse_double(k, v);
        else if (k == "labels")
            labels = parse_int(k, v);
        else if (k == "kappa_low")
            kappa_low = parse_double(k, v);
        else if (k == "kappa_high")
            kappa_high = parse_double(k, v);
        else if (k == "medium_file")
            medium_file = v;
        else if (k == "threads")
            threads = parse_int(k, v);
        else if (k == "out")
            out_dir = v;
        else
            config_error("config", "unknown key '" + k + "'");
    }
}

ErrorReport compute_error(const CoarseSolution& coarse, const ScalarField& fine, const CoarsePartition& partition,
                          const ContinuumMap& continua)
{
    const int nc = continua.num_continua;
    if (coarse.num_continua != nc)
        config_error("compute_error", "coarse and fine continuum counts differ");
    if (coarse.M != partition.M())
        config_error("compute_error", "coarse solution and partition disagree on M");
    const FineGrid& g = partition.fine();
    if (fine.grid.nx != g.nx || fine.grid.ny != g.ny)
        config_error("compute_error", "fine solution lives on a different grid");

    ErrorReport rep;
    std::vector<double> num(nc, 0.0), den(nc, 0.0);
    rep.block_terms.assign(partition.num_blocks(), std::vector<double>(nc, 0.0));
    for (int id = 0; id < partition.num_blocks(); ++id) {
        const BlockIndex b = partition.block(id);
        const IndexRect cells = partition.block_cells(b);
        std::vector<double> sum(nc, 0.0);
        std::vector<int> cnt(nc, 0);
        for (int j = cells.y0; j < cells.y1; ++j)
            for (int i = cells.x0; i < cells.x1; ++i) {
                const int k = g.cell(i, j);
                sum[continua.label[k]] += fine.values[k];
                ++cnt[continua.label[k]];
            }
        for (int n = 0; n < nc; ++n) {
            if (cnt[n] == 0) {
                ++rep.excluded;
                rep.warnings.push_back("block (" + std::to_string(b.bx) + "," + std::to_string(b.by)
                                       + ") has no cells of continuum " + std::to_string(n + 1));
                continue;
            }
            const double ref = sum[n] / cnt[n];
            const double d = coarse.block_mean(n, b.bx, b.by) - ref;
            rep.block_terms[id][n] = d * d;
            num[n] += d * d;
            den[n] += ref * ref;
        }
    }
    for (int n = 0; n < nc; ++n) {
        const double r = den[n] > 0 ? num[n] / den[n] : 0.0;
        rep.e2_sq.push_back(r);
        rep.e2.push_back(std::sqrt(r));
    }
    return rep;
}

CaseData build_case(const ExperimentConfig& c)
{
    c.validate();
    GeometryOptions opts;
    opts.fraction = c.fraction;
    opts.orientation = c.orientation;
    CaseData d;
    switch (c.case_id) {
    case 0: {
        const FineGrid g = FineGrid::square(c.fine_cells());
        d.medium = c.labels == 1 ? make_homogeneous(g, c.kappa) : make_homogeneous_layered(g, c.kappa, c.eps);
        d.medium.eps = c.eps;
        d.source = gaussian_source(g);
        break;
    }
    case 1: d = make_case1(c.eps, FineGrid::square(c.fine_cells()), opts); break;
    case 2: d = make_case2(c.eps, FineGrid::square(c.fine_cells()), opts); break;
    case 3:
        d.medium = make_layered(FineGrid::square(c.fine_cells()), c.eps, c.kappa_low, c.kappa_high, opts);
        d.source = case_source(d.medium);
        break;
    case 4:
        d.medium = read_raster_file(c.medium_file);
        d.medium.eps = c.eps;
        d.source = case_source(d.medium);
        break;
    }
    return d;
}

std::vector<EffectiveCoefficients> upscale(const CaseData& data, const CoarsePartition& partition,
                                           const ExperimentConfig& config)
{
    const LayerChoice lc = config.layer_choice();
    CellOptions opts;
    opts.boundary = config.cell_boundary;
    std::vector<EffectiveCoefficients> out(partition.num_blocks());
    parallel_for(partition.num_blocks(), resolve_threads(config.threads), [&](int id) {
        const RegionSet r = build_regions(partition, partition.block(id), lc.l, lc.l_v, lc.l_i);
        if (config.formulation == Formulation::mixed) {
            const MixedCellSolver solver(data.medium, partition, r, opts);
            out[id] = assemble_mixed(solver.solve_all(), data.medium, data.source, partition);
        } else {
            const EllipticCellSolver solver(data.medium, partition, r, opts);
            out[id] = assemble_elliptic(solver.solve_all(), data.medium, data.source, partition);
        }
    });
    return out;
}

CoarseSolution solve_coarse(const std::vector<EffectiveCoefficients>& coeffs, int M, const ExperimentConfig& config)
{
    MacroOptions o;
    o.neglect = config.neglect;
    o.gradient_source = config.gradient_source;
    return config.formulation == Formulation::mixed ? solve_mixed_macro(coeffs, M, o)
                                                    : solve_elliptic_macro(coeffs, M, o);
}

FineSolution solve_reference(const CaseData& data, const ExperimentConfig& config)
{
    return config.formulation == Formulation::mixed ? solve_mixed_fine(data.medium, data.source)
                                                    : solve_elliptic_fine(data.medium, data.source);
}

CaseResult run_case(const ExperimentConfig& config)
{
    const auto t0 = std::chrono::steady_clock::now();
    const CaseData data = build_case(config);
    const CoarsePartition partition(data.medium.grid, config.M);
    CaseResult r;
    r.fine = solve_reference(data, config);
    r.coeffs = upscale(data, partition, config);
    r.coarse = solve_coarse(r.coeffs, config.M, config);
    r.error = compute_error(r.coarse, r.fine.u, partition, data.medium.continua);
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string csv_header() { return "case,H,eps,l,e2_1,e2_2,e2_1_sq,e2_2_sq,runtime_s"; }

std::string csv_row(const ExperimentConfig& c, const ErrorReport& e, double runtime_s)
{
    auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? format_number(v[i]) : ""; };
    char rt[32];
    std::snprintf(rt, sizeof rt, "%.3f", runtime_s);
    std::ostringstream os;
    os << c.case_id << ',' << format_number(c.H()) << ',' << format_number(c.eps) << ',' << c.layers << ','
       << at(e.e2, 0) << ',' << at(e.e2, 1) << ',' << at(e.e2_sq, 0) << ',' << at(e.e2_sq, 1) << ',' << rt;
    return os.str();
}

void append_csv(const std::string& path, const std::string& row)
{
    namespace fs = std::filesystem;
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os)
        io_error("csv", "cannot open " + path);
    if (fresh)
        os << csv_header() << '\n';
    os << row << '\n';
}

std::string config_hash(const ExperimentConfig& config)
{
    std::string text;
    for (const auto& [k, v] : config.to_map(false))
        text += k + "=" + v + "\n";
    const std::string blob = "blob " + std::to_string(text.size()) + std::string(1, '\0') + text;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
        io_error("manifest", "SHA-1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string manifest_json(const ExperimentConfig& config, const std::vector<std::string>& outputs,
                          const ErrorReport* error, double runtime_s)
{
    nlohmann::json j;
    j["tool"] = "mchom";
    j["config"] = config.to_map(true);
    j["config_hash"] = config_hash(config);
    j["linear_solver"] = SparseLU::backend();
    j["outputs"] = outputs;
    if (error) {
        j["e2"] = error->e2;
        j["e2_sq"] = error->e2_sq;
        j["excluded"] = error->excluded;
        j["runtime_s"] = runtime_s;
    }
    return j.dump(1) + "\n";
}

ExperimentConfig config_from_manifest(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        io_error("manifest", e.what());
    }
    if (!j.contains("config") || !j["config"].is_object())
        io_error("manifest", "missing config object");
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : j["config"].items())
        kv[k] = v.get<std::string>();
    ExperimentConfig c;
    c.apply(kv);
    return c;
}

} // namespace mchom
