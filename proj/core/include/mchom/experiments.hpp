#pragma once

#include <mchom/cell_problems.hpp>
#include <mchom/coarse_solvers.hpp>
#include <mchom/effective.hpp>
#include <mchom/fine_solvers.hpp>
#include <mchom/media.hpp>

#include <map>
#include <string>
#include <vector>

namespace mchom {

// Case ids: 0 homogeneous, 1 layers, 2 inclusions, 3 layers with fixed
// coefficient values (kappa_low / kappa_high), 4 raster file.
struct ExperimentConfig
{
    int case_id = 1;
    int M = 10;
    double eps = 0.1;
    int layers = 2;
    int layers_v = -1;  // negative: default for the formulation
    int layers_i = -1;
    Formulation formulation = Formulation::mixed;
    CellBoundary cell_boundary = CellBoundary::consistent_pressure;
    NeglectFlags neglect;
    bool gradient_source = true;
    double fraction = -1.0;
    LayerOrientation orientation = LayerOrientation::horizontal;
    double kappa = 1.0;  // homogeneous value
    int labels = 1;      // homogeneous: 1 continuum, or 2 with layer labels
    double kappa_low = 1e-5;
    double kappa_high = 1.0;
    std::string medium_file;
    int threads = 0;
    std::string out_dir = "out";

    double H() const { return 1.0 / M; }
    // Fine cells per axis for h = H eps.
    int fine_cells() const;
    LayerChoice layer_choice() const;
    void validate() const;

    // Flat key=value view. Keys that do not change results (threads, out)
    // are included only when `with_runtime` is set.
    std::map<std::string, std::string> to_map(bool with_runtime = true) const;
    // Applies known keys; unknown keys raise a config error.
    void apply(const std::map<std::string, std::string>& kv);
};

struct ErrorReport
{
    std::vector<double> e2;     // sqrt variant (headline)
    std::vector<double> e2_sq;  // as displayed, without the square root
    // Per block (id = by * M + bx), per continuum: squared numerator term.
    std::vector<std::vector<double>> block_terms;
    int excluded = 0;  // (block, continuum) pairs with empty K ∩ Omega_i
    std::vector<std::string> warnings;
};

ErrorReport compute_error(const CoarseSolution& coarse, const ScalarField& fine, const CoarsePartition& partition,
                          const ContinuumMap& continua);

CaseData build_case(const ExperimentConfig& config);

// Cell problems and effective tensors for every block, in block-id order.
std::vector<EffectiveCoefficients> upscale(const CaseData& data, const CoarsePartition& partition,
                                           const ExperimentConfig& config);
CoarseSolution solve_coarse(const std::vector<EffectiveCoefficients>& coeffs, int M, const ExperimentConfig& config);
FineSolution solve_reference(const CaseData& data, const ExperimentConfig& config);

struct CaseResult
{
    ErrorReport error;
    CoarseSolution coarse;
    FineSolution fine;
    std::vector<EffectiveCoefficients> coeffs;
    double runtime_s = 0.0;
};

CaseResult run_case(const ExperimentConfig& config);

std::string csv_header();
std::string csv_row(const ExperimentConfig& config, const ErrorReport& error, double runtime_s);
// Appends a row, writing the header first when the file is new or empty.
void append_csv(const std::string& path, const std::string& row);

std::string format_number(double v);
// SHA-1 of the canonical "key=value" text, hashed as a git blob.
std::string config_hash(const ExperimentConfig& config);
std::string manifest_json(const ExperimentConfig& config, const std::vector<std::string>& outputs,
                          const ErrorReport* error = nullptr, double runtime_s = 0.0);
// Rebuilds the configuration stored in a manifest.
ExperimentConfig config_from_manifest(const std::string& text);

} // namespace mchom
