#pragma once

#include <mchom/fine_solvers.hpp>
#include <mchom/grid.hpp>
#include <mchom/linear_solver.hpp>
#include <mchom/media.hpp>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace mchom {

enum class ColumnKind { constant, linear, velocity };

// A cell-solution column: constant-pressure P_i, linear-pressure L_im or
// velocity W_ik. `direction` is m (linear) or k (velocity), -1 otherwise.
struct ColumnId
{
    ColumnKind kind = ColumnKind::constant;
    int continuum = 0;
    int direction = -1;

    std::string name() const;  // "P1", "L2x", "W1y" (1-based continuum)
    friend bool operator==(const ColumnId&, const ColumnId&) = default;
};

// Column order used everywhere: all P, then L (continuum-major), then W.
std::vector<ColumnId> elliptic_columns(int num_continua);
std::vector<ColumnId> mixed_columns(int num_continua);

struct ConstraintRow
{
    int tile = 0;
    int continuum = 0;
    int component = -1;  // -1: scalar/pressure average, 0/1: velocity component
};

// Linear functionals C x = target acting on the full cell unknown vector.
struct ConstraintSet
{
    std::vector<ConstraintRow> rows;
    SpMat functionals;  // rows x unknowns
    Vec target;

    int size() const { return static_cast<int>(rows.size()); }
    double residual(const Vec& x) const { return (functionals * x - target).lpNorm<Eigen::Infinity>(); }
};

// Smallest over largest eigenvalue of C C^T; throws a solver error below tol.
double check_rank(const SpMat& functionals, const std::string& stage, double tol = 1e-12);

struct CellColumn
{
    ColumnId id;
    // Elliptic: nodal values on the oversampled region. Mixed: face fluxes
    // followed by cell pressures.
    Vec field;
    // Mixed: pressure data on the boundary faces of the oversampled region.
    std::vector<double> boundary;
    Vec multipliers;
    double constraint_residual = 0.0;
    double system_residual = 0.0;
};

struct DecayEntry
{
    BlockIndex block;
    ColumnId column;
    int layers = 0;
    double outer_norm = 0.0;
    double central_norm = 0.0;
    double ratio = 0.0;
};

struct DecayReport
{
    std::vector<DecayEntry> entries;
};

enum class Formulation { elliptic, mixed };

// Boundary treatment of cell problems on the oversampled region.
enum class CellBoundary {
    // Data matching the column's own target profile (psi_i,
    // (x_m - c_m) psi_i, or 0 for velocity columns). Elliptic columns get
    // it as nodal Dirichlet values, mixed columns as boundary pressure.
    consistent_pressure,
    // Homogeneous Dirichlet data in both formulations.
    zero_pressure,
    // Mixed only: no-flux walls. Elliptic cells fall back to zero data.
    zero_flux,
};

struct CellOptions
{
    CellBoundary boundary = CellBoundary::consistent_pressure;
    // Abort when a column misses its constraints by more than this.
    double constraint_tolerance = 1e-9;
};

struct CellSolutionSet
{
    Formulation formulation = Formulation::mixed;
    RegionSet regions;
    IndexRect cells;  // fine-cell rectangle of the oversampled region
    std::vector<CellColumn> columns;
    std::shared_ptr<const EllipticOperator> elliptic;
    std::shared_ptr<const MixedOperator> mixed;
    // Per local cell: tile index (-1 never happens inside the region).
    std::vector<int> cell_tile;

    const CellColumn& column(const ColumnId& id) const;
};

// Constrained elliptic cell problems on the oversampled region with
// Dirichlet data chosen by CellOptions::boundary. One factorization serves
// every column.
class EllipticCellSolver
{
public:
    EllipticCellSolver(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& regions,
                       const CellOptions& options = {});
    ~EllipticCellSolver();

    ConstraintSet constraints(const ColumnId& id) const;
    CellColumn solve(const ColumnId& id) const;
    // Response to the central-tile targets of `id` alone.
    CellColumn solve_localized(const ColumnId& id) const;
    CellSolutionSet solve_all() const;
    DecayEntry decay(const ColumnId& id) const;

    const EllipticOperator& op() const;
    const RegionSet& regions() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Constrained mixed cell problems. Unknowns are ordered
// [face fluxes, cell pressures, velocity multipliers, pressure multipliers];
// pressure-average constraints force the mass equation and velocity-average
// constraints force the momentum equation.
class MixedCellSolver
{
public:
    MixedCellSolver(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& regions,
                    const CellOptions& options = {});
    ~MixedCellSolver();

    ConstraintSet constraints(const ColumnId& id) const;
    CellColumn solve(const ColumnId& id) const;
    CellColumn solve_localized(const ColumnId& id) const;
    CellSolutionSet solve_all() const;
    DecayEntry decay(const ColumnId& id) const;

    const MixedOperator& op() const;
    const RegionSet& regions() const;
    int num_unknowns() const;
    const SpMat& system() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Single-column conveniences (each factorizes its own system).
CellColumn solve_cell_elliptic_const(const MediumSpec& medium, const CoarsePartition& partition,
                                     const RegionSet& regions, int continuum);
CellColumn solve_cell_elliptic_linear(const MediumSpec& medium, const CoarsePartition& partition,
                                      const RegionSet& regions, int continuum, int direction);
CellColumn solve_cell_mixed(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& regions,
                            const ColumnId& id, const CellOptions& options = {});

struct LayerChoice
{
    int l = 1;
    int l_v = 0;
    int l_i = 0;
};

// Default nested widths for l oversampling layers: mixed problems with
// pressure data on the outer boundary constrain velocities everywhere and
// integrate over one layer less; otherwise l_V = l_I = l - 1.
LayerChoice default_layers(int l, Formulation formulation,
                           CellBoundary boundary = CellBoundary::consistent_pressure);

// Decay ratios of every column of one block for each oversampling choice.
DecayReport decay_report(const MediumSpec& medium, const CoarsePartition& partition, BlockIndex block,
                         const std::vector<LayerChoice>& layers, Formulation formulation,
                         const CellOptions& options = {});

// One JSON object per line: block, column, l, norms, ratio.
void write_decay_jsonl(std::ostream& os, const DecayReport& report);

// Fine-grid dump of a column's scalar part (cell values; zero outside the
// oversampled region).
ScalarField column_scalar_field(const CellSolutionSet& set, const CellColumn& col, const FineGrid& grid);

} // namespace mchom
