#pragma once

#include <mchom/grid.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace mchom {

struct MediumSpec
{
    double eps = 0.0;  // period; 0 when unknown (e.g. imported raster)
    FineGrid grid;
    std::vector<double> kappa;        // per fine cell
    ContinuumMap continua;
    std::vector<double> values;       // coefficient value per continuum (contrast descriptor)

    double contrast() const;
};

struct SourceSpec
{
    std::vector<double> f;  // per fine cell
};

struct CaseData
{
    MediumSpec medium;
    SourceSpec source;
};

enum class LayerOrientation { horizontal, vertical };

struct GeometryOptions
{
    // Volume fraction of the low-conductivity continuum per period cell.
    double fraction = -1.0;  // negative: case default (1/2 layers, 1/4 inclusions)
    LayerOrientation orientation = LayerOrientation::horizontal;
};

// Cells per period; throws if eps does not divide the grid or is unresolved.
int cells_per_period(double eps, const FineGrid& grid);

double low_kappa(double eps);   // eps / 10000
double high_kappa(double eps);  // 1 / (100 eps)
double gaussian_bump(double x, double y);

// Periodic layers; continuum 0 is the low-conductivity layer.
CaseData make_case1(double eps, const FineGrid& grid, const GeometryOptions& opts = {});
// Periodic centered square inclusions; continuum 0 is the inclusion.
CaseData make_case2(double eps, const FineGrid& grid, const GeometryOptions& opts = {});

// Constant coefficient, one continuum.
MediumSpec make_homogeneous(const FineGrid& grid, double value);
// Constant coefficient with two continuum labels laid out as Case-1 layers.
MediumSpec make_homogeneous_layered(const FineGrid& grid, double value, double eps);
// Two-continuum layered medium with fixed coefficient values.
MediumSpec make_layered(const FineGrid& grid, double eps, double kappa_low, double kappa_high,
                        const GeometryOptions& opts = {});

// Source used by the two cases: 1000 min(kappa) g on continuum 0 and g elsewhere.
SourceSpec case_source(const MediumSpec& medium);
// g everywhere.
SourceSpec gaussian_source(const FineGrid& grid);

// Raster exchange format: header "mchom-raster v1, n_x n_y" then one
// "continuum_index kappa_value" record per cell in row-major order.
void write_raster(std::ostream& os, const MediumSpec& medium);
MediumSpec read_raster(std::istream& is);
void write_raster_file(const std::string& path, const MediumSpec& medium);
MediumSpec read_raster_file(const std::string& path);

} // namespace mchom
