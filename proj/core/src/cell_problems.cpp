#include <mchom/cell_problems.hpp>

#include <mchom/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mchom {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::string ColumnId::name() const
{
    static const char axis[2] = {'x', 'y'};
    const char k = kind == ColumnKind::constant ? 'P' : kind == ColumnKind::linear ? 'L' : 'W';
    std::string s(1, k);
    s += std::to_string(continuum + 1);
    if (direction >= 0)
        s += axis[direction];
    return s;
}

std::vector<ColumnId> elliptic_columns(int nc)
{
    std::vector<ColumnId> out;
    for (int i = 0; i < nc; ++i)
        out.push_back({ColumnKind::constant, i, -1});
    for (int i = 0; i < nc; ++i)
        for (int m = 0; m < 2; ++m)
            out.push_back({ColumnKind::linear, i, m});
    return out;
}

std::vector<ColumnId> mixed_columns(int nc)
{
    std::vector<ColumnId> out = elliptic_columns(nc);
    for (int i = 0; i < nc; ++i)
        for (int k = 0; k < 2; ++k)
            out.push_back({ColumnKind::velocity, i, k});
    return out;
}

double check_rank(const SpMat& C, const std::string& stage, double tol)
{
    if (C.rows() == 0)
        return 1.0;
    const Mat gram = Mat(C * C.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    const double r = hi > 0 ? lo / hi : 0.0;
    if (!(r > tol))
        solver_error(stage, "constraint functionals are rank deficient (eigenvalue ratio " + std::to_string(r) + ")");
    return r;
}

const CellColumn& CellSolutionSet::column(const ColumnId& id) const
{
    for (const auto& c : columns)
        if (c.id == id)
            return c;
    config_error("cell_solutions", "missing column " + id.name());
}

namespace {

// Geometry shared by both cell solvers.
struct CellGeometry
{
    FineGrid grid;
    RegionSet regions;
    IndexRect cells;
    int ncx = 0, ncy = 0;
    std::vector<int> cell_tile;
    std::vector<int> cell_label;
    std::vector<TileMoment> moments;
    std::vector<double> cell_x, cell_y;  // centres
    std::vector<double> cell_kappa;
    double H = 0.0;

    CellGeometry(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& r)
        : grid(medium.grid), regions(r), cells(partition.cells_of(r.oversampled))
    {
        ncx = cells.width();
        ncy = cells.height();
        cell_tile.resize(static_cast<std::size_t>(ncx) * ncy);
        cell_label.resize(cell_tile.size());
        cell_x.resize(cell_tile.size());
        cell_y.resize(cell_tile.size());
        cell_kappa.resize(cell_tile.size());
        for (int cj = 0; cj < ncy; ++cj)
            for (int ci = 0; ci < ncx; ++ci) {
                const int i = cells.x0 + ci, j = cells.y0 + cj;
                const int c = cj * ncx + ci;
                cell_tile[c] = r.tile_index(partition.block_of_cell(i, j));
                cell_label[c] = medium.continua.label[grid.cell(i, j)];
                cell_kappa[c] = medium.kappa[grid.cell(i, j)];
                cell_x[c] = grid.xc(i);
                cell_y[c] = grid.yc(j);
            }
        moments = tile_moments(partition, r, medium.continua);
        H = partition.H();
    }

    int num_cells() const { return ncx * ncy; }

    bool localized_row(int tile) const { return tile == 0; }

    // Pressure/scalar targets for a column.
    Vec scalar_targets(const ColumnId& id, bool localized) const
    {
        Vec t = Vec::Zero(static_cast<Eigen::Index>(moments.size()));
        if (id.kind == ColumnKind::velocity)
            return t;
        for (std::size_t k = 0; k < moments.size(); ++k) {
            const TileMoment& m = moments[k];
            if (m.continuum != id.continuum || (localized && !localized_row(m.tile)))
                continue;
            // Localized linear columns are driven by H times the central
            // area. The first moment vanishes on symmetric blocks, and under
            // zeroth-moment constraints only the target's size matters.
            if (id.kind == ColumnKind::constant)
                t[static_cast<Eigen::Index>(k)] = m.area;
            else
                t[static_cast<Eigen::Index>(k)] = localized ? H * m.area : m.first[id.direction];
        }
        return t;
    }

    double tile_norm_ratio(const std::vector<double>& cell_energy, int layers) const
    {
        const int T = regions.num_tiles();
        std::vector<double> e(T, 0.0);
        for (int c = 0; c < num_cells(); ++c)
            e[cell_tile[c]] += cell_energy[c];
        int ring = layers;
        bool present = false;
        for (int p = 0; p < T; ++p)
            present = present || regions.ring(p) == ring;
        if (!present)
            ring = regions.outer_ring();
        double outer = 0.0;
        for (int p = 0; p < T; ++p)
            if (regions.ring(p) == ring)
                outer = std::max(outer, std::sqrt(e[p]));
        return outer;
    }

    double central_norm(const std::vector<double>& cell_energy) const
    {
        double s = 0.0;
        for (int c = 0; c < num_cells(); ++c)
            if (cell_tile[c] == 0)
                s += cell_energy[c];
        return std::sqrt(s);
    }
};

void finish_decay(DecayEntry& d)
{
    d.ratio = d.central_norm > 0 ? d.outer_norm / d.central_norm : 0.0;
}

} // namespace

// ---------------------------------------------------------------------------
// Elliptic

struct EllipticCellSolver::Impl
{
    CellGeometry geo;
    CellOptions options;
    std::shared_ptr<EllipticOperator> op;
    SpMat C;       // constraints x nodes
    SpMat Cd;      // the Dirichlet-node columns of C
    SpMat Kfd;     // stiffness coupling free rows to Dirichlet columns
    SpMat saddle;
    SparseLU lu;

    Impl(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& r, const CellOptions& o)
        : geo(medium, partition, r), options(o)
    {
        op = std::make_shared<EllipticOperator>(build_elliptic_operator(medium, geo.cells, DirichletSides::all));
        const int nn = op->num_nodes();
        const int nu = static_cast<int>(geo.moments.size());
        const double q = geo.grid.h * geo.grid.h / 4.0;

        // Row index of each (tile, continuum) pair.
        std::vector<int> row_of(static_cast<std::size_t>(r.num_tiles()) * medium.continua.num_continua, -1);
        for (int k = 0; k < nu; ++k)
            row_of[geo.moments[k].tile * medium.continua.num_continua + geo.moments[k].continuum] = k;

        Triplets tc;
        for (int cj = 0; cj < geo.ncy; ++cj)
            for (int ci = 0; ci < geo.ncx; ++ci) {
                const int c = cj * geo.ncx + ci;
                const int row = row_of[geo.cell_tile[c] * medium.continua.num_continua + geo.cell_label[c]];
                if (row < 0)
                    continue;
                for (int n : {op->node(ci, cj), op->node(ci + 1, cj), op->node(ci, cj + 1), op->node(ci + 1, cj + 1)})
                    tc.emplace_back(row, n, q);
            }
        C.resize(nu, nn);
        C.setFromTriplets(tc.begin(), tc.end());
        Triplets tcf, tcd;
        for (int k = 0; k < C.outerSize(); ++k)
            for (SpMat::InnerIterator it(C, k); it; ++it)
                (op->dirichlet[it.col()] ? tcd : tcf).emplace_back(it.row(), it.col(), it.value());
        SpMat Cf(nu, nn);
        Cf.setFromTriplets(tcf.begin(), tcf.end());
        Cd.resize(nu, nn);
        Cd.setFromTriplets(tcd.begin(), tcd.end());
        check_rank(Cf, "cell_elliptic");

        Triplets t, tk;
        for (int k = 0; k < op->stiffness.outerSize(); ++k)
            for (SpMat::InnerIterator it(op->stiffness, k); it; ++it) {
                if (op->dirichlet[it.row()])
                    continue;
                if (op->dirichlet[it.col()])
                    tk.emplace_back(it.row(), it.col(), it.value());
                else
                    t.emplace_back(it.row(), it.col(), it.value());
            }
        Kfd.resize(nn, nn);
        Kfd.setFromTriplets(tk.begin(), tk.end());
        for (int n = 0; n < nn; ++n)
            if (op->dirichlet[n])
                t.emplace_back(n, n, 1.0);
        for (const auto& e : tcf) {
            t.emplace_back(nn + e.row(), e.col(), e.value());
            t.emplace_back(e.col(), nn + e.row(), e.value());
        }
        saddle.resize(nn + nu, nn + nu);
        saddle.setFromTriplets(t.begin(), t.end());
        lu.factorize(saddle, "cell_elliptic");
    }

    // Nodal Dirichlet values, zero off the boundary. A boundary node takes
    // psi_i averaged over its adjacent cells with kappa weights: a node on a
    // high-contrast interface moves with the conducting side, as the
    // interior solution does.
    Vec boundary_data(const ColumnId& id, bool localized) const
    {
        const int nn = op->num_nodes();
        Vec g = Vec::Zero(nn);
        if (localized || options.boundary != CellBoundary::consistent_pressure)
            return g;
        for (int b = 0; b < op->nny; ++b)
            for (int a = 0; a < op->nnx; ++a) {
                const int n = op->node(a, b);
                if (!op->dirichlet[n])
                    continue;
                double total = 0.0, hit = 0.0;
                for (int cj = b - 1; cj <= b; ++cj)
                    for (int ci = a - 1; ci <= a; ++ci) {
                        if (ci < 0 || cj < 0 || ci >= geo.ncx || cj >= geo.ncy)
                            continue;
                        const int c = cj * geo.ncx + ci;
                        total += geo.cell_kappa[c];
                        if (geo.cell_label[c] == id.continuum)
                            hit += geo.cell_kappa[c];
                    }
                double v = hit / total;
                if (id.kind == ColumnKind::linear) {
                    const int i = geo.cells.x0 + a, j = geo.cells.y0 + b;
                    const double xn = id.direction == 0 ? i * geo.grid.h : j * geo.grid.h;
                    v *= xn - geo.regions.centre[id.direction];
                }
                g[n] = v;
            }
        return g;
    }

    CellColumn run(const ColumnId& id, bool localized) const
    {
        if (id.kind == ColumnKind::velocity)
            config_error("cell_elliptic", "velocity columns exist only for the mixed formulation");
        const int nn = op->num_nodes();
        const Vec target = geo.scalar_targets(id, localized);
        const Vec g = boundary_data(id, localized);
        Vec rhs = Vec::Zero(saddle.rows());
        rhs.head(nn) = g - Kfd * g;
        rhs.tail(target.size()) = target - Cd * g;
        const Vec x = lu.solve(rhs);
        CellColumn col;
        col.id = id;
        col.field = x.head(nn);
        col.multipliers = x.tail(target.size());
        col.constraint_residual = (C * col.field - target).lpNorm<Eigen::Infinity>();
        col.system_residual = (saddle * x - rhs).lpNorm<Eigen::Infinity>();
        if (!(col.constraint_residual <= options.constraint_tolerance))
            solver_error("cell_elliptic", "column " + id.name() + " misses its constraints by "
                                              + std::to_string(col.constraint_residual));
        return col;
    }
};

EllipticCellSolver::EllipticCellSolver(const MediumSpec& medium, const CoarsePartition& partition,
                                       const RegionSet& regions, const CellOptions& options)
    : impl_(std::make_unique<Impl>(medium, partition, regions, options))
{}

EllipticCellSolver::~EllipticCellSolver() = default;

ConstraintSet EllipticCellSolver::constraints(const ColumnId& id) const
{
    ConstraintSet s;
    for (const auto& m : impl_->geo.moments)
        s.rows.push_back({m.tile, m.continuum, -1});
    s.functionals = impl_->C;
    s.target = impl_->geo.scalar_targets(id, false);
    return s;
}

CellColumn EllipticCellSolver::solve(const ColumnId& id) const { return impl_->run(id, false); }
CellColumn EllipticCellSolver::solve_localized(const ColumnId& id) const { return impl_->run(id, true); }
const EllipticOperator& EllipticCellSolver::op() const { return *impl_->op; }
const RegionSet& EllipticCellSolver::regions() const { return impl_->geo.regions; }

CellSolutionSet EllipticCellSolver::solve_all() const
{
    CellSolutionSet set;
    set.formulation = Formulation::elliptic;
    set.regions = impl_->geo.regions;
    set.cells = impl_->geo.cells;
    set.elliptic = impl_->op;
    set.cell_tile = impl_->geo.cell_tile;
    const int nc = *std::max_element(impl_->geo.cell_label.begin(), impl_->geo.cell_label.end()) + 1;
    for (const auto& id : elliptic_columns(std::max(nc, 1)))
        set.columns.push_back(solve(id));
    return set;
}

DecayEntry EllipticCellSolver::decay(const ColumnId& id) const
{
    const CellColumn col = solve_localized(id);
    const auto& g = impl_->geo;
    const EllipticOperator& op = *impl_->op;
    std::vector<double> e(g.num_cells());
    const double a = g.grid.h * g.grid.h;
    for (int cj = 0; cj < g.ncy; ++cj)
        for (int ci = 0; ci < g.ncx; ++ci) {
            const double m = 0.25 * (col.field[op.node(ci, cj)] + col.field[op.node(ci + 1, cj)]
                                     + col.field[op.node(ci, cj + 1)] + col.field[op.node(ci + 1, cj + 1)]);
            e[cj * g.ncx + ci] = a * m * m;
        }
    DecayEntry d;
    d.block = g.regions.block;
    d.column = id;
    d.layers = g.regions.layers;
    d.outer_norm = g.tile_norm_ratio(e, g.regions.layers);
    d.central_norm = g.central_norm(e);
    finish_decay(d);
    return d;
}

// ---------------------------------------------------------------------------
// Mixed

struct MixedCellSolver::Impl
{
    CellGeometry geo;
    CellOptions options;
    std::shared_ptr<MixedOperator> op;
    std::vector<ConstraintRow> vrows;
    std::vector<int> vrow_moment;  // moment (area) index of each velocity row
    SpMat Cu;                      // pressure rows x cells
    SpMat Cv;                      // velocity rows x faces
    SpMat saddle;
    SparseLU lu;
    int nf = 0, nc = 0, nv = 0, nu = 0;

    Impl(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& r, const CellOptions& o)
        : geo(medium, partition, r), options(o)
    {
        const MixedBoundary b =
            o.boundary == CellBoundary::zero_flux ? MixedBoundary::zero_flux : MixedBoundary::dirichlet;
        op = std::make_shared<MixedOperator>(build_mixed_operator(medium, geo.cells, b));
        nf = op->num_faces();
        nc = op->num_cells();
        nu = static_cast<int>(geo.moments.size());
        const int ncont = medium.continua.num_continua;
        const double a = geo.grid.h * geo.grid.h;

        std::vector<int> prow(static_cast<std::size_t>(r.num_tiles()) * ncont, -1);
        for (int k = 0; k < nu; ++k)
            prow[geo.moments[k].tile * ncont + geo.moments[k].continuum] = k;
        std::vector<int> vrow(static_cast<std::size_t>(r.num_tiles()) * ncont * 2, -1);
        for (int k = 0; k < nu; ++k) {
            const TileMoment& m = geo.moments[k];
            if (!r.in_velocity(m.tile))
                continue;
            for (int s = 0; s < 2; ++s) {
                vrow[(m.tile * ncont + m.continuum) * 2 + s] = static_cast<int>(vrows.size());
                vrows.push_back({m.tile, m.continuum, s});
                vrow_moment.push_back(k);
            }
        }
        nv = static_cast<int>(vrows.size());

        Triplets tu;
        for (int c = 0; c < nc; ++c) {
            const int row = prow[geo.cell_tile[c] * ncont + geo.cell_label[c]];
            if (row >= 0)
                tu.emplace_back(row, c, a);
        }
        Cu.resize(nu, nc);
        Cu.setFromTriplets(tu.begin(), tu.end());

        // A face contributes half a cell to each adjacent cell's average.
        Triplets tv;
        for (int f = 0; f < nf; ++f) {
            const MixedFace& fc = op->faces[f];
            for (int c : {fc.lo, fc.hi}) {
                if (c < 0)
                    continue;
                const int row = vrow[(geo.cell_tile[c] * ncont + geo.cell_label[c]) * 2 + fc.dir];
                if (row >= 0)
                    tv.emplace_back(row, f, a / 2);
            }
        }
        Cv.resize(nv, nf);
        Cv.setFromTriplets(tv.begin(), tv.end());
        check_rank(Cu, "cell_mixed");
        check_rank(Cv, "cell_mixed");

        // [[M, G, Cv^T, 0], [-G^T, 0, 0, Cu^T], [Cv, 0, 0, 0], [0, Cu, 0, 0]]
        const int ov = nf + nc, ou = nf + nc + nv;
        Triplets t;
        for (int f = 0; f < nf; ++f)
            t.emplace_back(f, f, op->mass[f]);
        for (int k = 0; k < op->G.outerSize(); ++k)
            for (SpMat::InnerIterator it(op->G, k); it; ++it) {
                t.emplace_back(it.row(), nf + it.col(), it.value());
                t.emplace_back(nf + it.col(), it.row(), -it.value());
            }
        for (int k = 0; k < Cv.outerSize(); ++k)
            for (SpMat::InnerIterator it(Cv, k); it; ++it) {
                t.emplace_back(it.col(), ov + it.row(), it.value());
                t.emplace_back(ov + it.row(), it.col(), it.value());
            }
        for (int k = 0; k < Cu.outerSize(); ++k)
            for (SpMat::InnerIterator it(Cu, k); it; ++it) {
                t.emplace_back(nf + it.col(), ou + it.row(), it.value());
                t.emplace_back(ou + it.row(), nf + it.col(), it.value());
            }
        const int n = nf + nc + nv + nu;
        saddle.resize(n, n);
        saddle.setFromTriplets(t.begin(), t.end());
        lu.factorize(saddle, "cell_mixed");
    }

    Vec velocity_targets(const ColumnId& id, bool localized) const
    {
        Vec t = Vec::Zero(nv);
        if (id.kind != ColumnKind::velocity)
            return t;
        for (int k = 0; k < nv; ++k) {
            const ConstraintRow& row = vrows[k];
            if (row.continuum != id.continuum || row.component != id.direction)
                continue;
            if (localized && !geo.localized_row(row.tile))
                continue;
            t[k] = geo.moments[vrow_moment[k]].area;
        }
        return t;
    }

    std::vector<double> boundary_data(const ColumnId& id, bool localized) const
    {
        const int nb = nf - op->num_interior;
        std::vector<double> ub(nb, 0.0);
        if (localized || options.boundary != CellBoundary::consistent_pressure
            || id.kind == ColumnKind::velocity)
            return ub;
        for (int f = op->num_interior; f < nf; ++f) {
            const MixedFace& fc = op->faces[f];
            if (geo.cell_label[fc.inner()] != id.continuum)
                continue;
            double v = 1.0;
            if (id.kind == ColumnKind::linear)
                v = (id.direction == 0 ? fc.x : fc.y) - geo.regions.centre[id.direction];
            ub[f - op->num_interior] = v;
        }
        return ub;
    }

    CellColumn run(const ColumnId& id, bool localized) const
    {
        CellColumn col;
        col.id = id;
        col.boundary = boundary_data(id, localized);
        const Vec tu = geo.scalar_targets(id, localized);
        const Vec tv = velocity_targets(id, localized);
        Vec rhs = Vec::Zero(saddle.rows());
        if (op->boundary == MixedBoundary::dirichlet)
            rhs.head(nf) = op->boundary_rhs(col.boundary);
        rhs.segment(nf + nc, nv) = tv;
        rhs.tail(nu) = tu;
        const Vec x = lu.solve(rhs);
        col.field = x.head(nf + nc);
        col.multipliers = x.tail(nv + nu);
        const double ru = (Cu * x.segment(nf, nc) - tu).lpNorm<Eigen::Infinity>();
        const double rv = nv > 0 ? (Cv * x.head(nf) - tv).lpNorm<Eigen::Infinity>() : 0.0;
        col.constraint_residual = std::max(ru, rv);
        col.system_residual = (saddle * x - rhs).lpNorm<Eigen::Infinity>();
        if (!(col.constraint_residual <= options.constraint_tolerance))
            solver_error("cell_mixed", "column " + id.name() + " misses its constraints by "
                                           + std::to_string(col.constraint_residual));
        return col;
    }
};

MixedCellSolver::MixedCellSolver(const MediumSpec& medium, const CoarsePartition& partition,
                                 const RegionSet& regions, const CellOptions& options)
    : impl_(std::make_unique<Impl>(medium, partition, regions, options))
{}

MixedCellSolver::~MixedCellSolver() = default;

ConstraintSet MixedCellSolver::constraints(const ColumnId& id) const
{
    const Impl& m = *impl_;
    ConstraintSet s;
    for (const auto& v : m.vrows)
        s.rows.push_back(v);
    for (const auto& mo : m.geo.moments)
        s.rows.push_back({mo.tile, mo.continuum, -1});
    Triplets t;
    for (int k = 0; k < m.Cv.outerSize(); ++k)
        for (SpMat::InnerIterator it(m.Cv, k); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < m.Cu.outerSize(); ++k)
        for (SpMat::InnerIterator it(m.Cu, k); it; ++it)
            t.emplace_back(m.nv + it.row(), m.nf + it.col(), it.value());
    s.functionals.resize(m.nv + m.nu, m.nf + m.nc);
    s.functionals.setFromTriplets(t.begin(), t.end());
    s.target.resize(m.nv + m.nu);
    s.target << m.velocity_targets(id, false), m.geo.scalar_targets(id, false);
    return s;
}

CellColumn MixedCellSolver::solve(const ColumnId& id) const { return impl_->run(id, false); }
CellColumn MixedCellSolver::solve_localized(const ColumnId& id) const { return impl_->run(id, true); }
const MixedOperator& MixedCellSolver::op() const { return *impl_->op; }
const RegionSet& MixedCellSolver::regions() const { return impl_->geo.regions; }
int MixedCellSolver::num_unknowns() const { return static_cast<int>(impl_->saddle.rows()); }
const SpMat& MixedCellSolver::system() const { return impl_->saddle; }

CellSolutionSet MixedCellSolver::solve_all() const
{
    CellSolutionSet set;
    set.formulation = Formulation::mixed;
    set.regions = impl_->geo.regions;
    set.cells = impl_->geo.cells;
    set.mixed = impl_->op;
    set.cell_tile = impl_->geo.cell_tile;
    const int nc = *std::max_element(impl_->geo.cell_label.begin(), impl_->geo.cell_label.end()) + 1;
    for (const auto& id : mixed_columns(std::max(nc, 1)))
        set.columns.push_back(solve(id));
    return set;
}

DecayEntry MixedCellSolver::decay(const ColumnId& id) const
{
    const CellColumn col = solve_localized(id);
    const Impl& m = *impl_;
    const auto& g = m.geo;
    const double a = g.grid.h * g.grid.h;
    std::vector<double> e(g.num_cells(), 0.0);
    if (id.kind == ColumnKind::velocity) {
        // Each face's kinetic term is shared evenly by its adjacent cells.
        for (int f = 0; f < m.nf; ++f) {
            const MixedFace& fc = m.op->faces[f];
            const double v = col.field[f];
            for (int c : {fc.lo, fc.hi})
                if (c >= 0)
                    e[c] += 0.5 * a * v * v;
        }
    } else {
        for (int c = 0; c < m.nc; ++c) {
            const double u = col.field[m.nf + c];
            e[c] = a * u * u;
        }
    }
    DecayEntry d;
    d.block = g.regions.block;
    d.column = id;
    d.layers = g.regions.layers;
    d.outer_norm = g.tile_norm_ratio(e, g.regions.layers);
    d.central_norm = g.central_norm(e);
    finish_decay(d);
    return d;
}

// ---------------------------------------------------------------------------

CellColumn solve_cell_elliptic_const(const MediumSpec& medium, const CoarsePartition& partition,
                                     const RegionSet& regions, int continuum)
{
    return EllipticCellSolver(medium, partition, regions).solve({ColumnKind::constant, continuum, -1});
}

CellColumn solve_cell_elliptic_linear(const MediumSpec& medium, const CoarsePartition& partition,
                                      const RegionSet& regions, int continuum, int direction)
{
    return EllipticCellSolver(medium, partition, regions).solve({ColumnKind::linear, continuum, direction});
}

CellColumn solve_cell_mixed(const MediumSpec& medium, const CoarsePartition& partition, const RegionSet& regions,
                            const ColumnId& id, const CellOptions& options)
{
    return MixedCellSolver(medium, partition, regions, options).solve(id);
}

LayerChoice default_layers(int l, Formulation formulation, CellBoundary boundary)
{
    if (formulation == Formulation::mixed && boundary != CellBoundary::zero_flux)
        return {l, l, std::max(l - 1, 0)};
    return {l, std::max(l - 1, 0), std::max(l - 1, 0)};
}

DecayReport decay_report(const MediumSpec& medium, const CoarsePartition& partition, BlockIndex block,
                         const std::vector<LayerChoice>& layers, Formulation formulation, const CellOptions& options)
{
    DecayReport rep;
    for (const LayerChoice& lc : layers) {
        const RegionSet r = build_regions(partition, block, lc.l, lc.l_v, lc.l_i);
        if (formulation == Formulation::elliptic) {
            EllipticCellSolver s(medium, partition, r, options);
            for (const auto& id : elliptic_columns(medium.continua.num_continua))
                rep.entries.push_back(s.decay(id));
        } else {
            MixedCellSolver s(medium, partition, r, options);
            for (const auto& id : mixed_columns(medium.continua.num_continua))
                rep.entries.push_back(s.decay(id));
        }
    }
    return rep;
}

void write_decay_jsonl(std::ostream& os, const DecayReport& report)
{
    for (const auto& e : report.entries) {
        nlohmann::json j;
        j["block"] = {e.block.bx, e.block.by};
        j["column"] = e.column.name();
        j["l"] = e.layers;
        j["outer_norm"] = e.outer_norm;
        j["central_norm"] = e.central_norm;
        j["ratio"] = e.ratio;
        os << j.dump() << '\n';
    }
}

ScalarField column_scalar_field(const CellSolutionSet& set, const CellColumn& col, const FineGrid& grid)
{
    ScalarField out(grid);
    const IndexRect& r = set.cells;
    for (int cj = 0; cj < r.height(); ++cj)
        for (int ci = 0; ci < r.width(); ++ci) {
            double v = 0.0;
            if (set.formulation == Formulation::mixed) {
                v = col.field[set.mixed->num_faces() + cj * r.width() + ci];
            } else {
                const EllipticOperator& op = *set.elliptic;
                v = 0.25 * (col.field[op.node(ci, cj)] + col.field[op.node(ci + 1, cj)]
                            + col.field[op.node(ci, cj + 1)] + col.field[op.node(ci + 1, cj + 1)]);
            }
            out(r.x0 + ci, r.y0 + cj) = v;
        }
    return out;
}

} // namespace mchom
