#include <mchom/fine_solvers.hpp>

#include <mchom/error.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace mchom {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void check_region(const FineGrid& g, const IndexRect& r, const char* stage)
{
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > g.nx || r.y1 > g.ny || r.width() < 1 || r.height() < 1)
        config_error(stage, "region outside the fine grid");
}

void check_positive(const MediumSpec& m, const char* stage)
{
    for (double k : m.kappa)
        if (!(k > 0.0) || !std::isfinite(k))
            solver_error(stage, "coefficient must be positive and finite");
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

} // namespace

const double (&q1_stiffness())[4][4]
{
    static const double K[4][4] = {{4.0 / 6, -1.0 / 6, -1.0 / 6, -2.0 / 6},
                                   {-1.0 / 6, 4.0 / 6, -2.0 / 6, -1.0 / 6},
                                   {-1.0 / 6, -2.0 / 6, 4.0 / 6, -1.0 / 6},
                                   {-2.0 / 6, -1.0 / 6, -1.0 / 6, 4.0 / 6}};
    return K;
}

EllipticOperator build_elliptic_operator(const MediumSpec& medium, const IndexRect& region, DirichletSides sides)
{
    const FineGrid& g = medium.grid;
    check_region(g, region, "elliptic_operator");
    EllipticOperator op;
    op.region = region;
    op.h = g.h;
    op.nnx = region.width() + 1;
    op.nny = region.height() + 1;

    const auto& K = q1_stiffness();
    Triplets t;
    t.reserve(static_cast<std::size_t>(region.count()) * 16);
    for (int cj = 0; cj < region.height(); ++cj)
        for (int ci = 0; ci < region.width(); ++ci) {
            const double k = medium.kappa[g.cell(region.x0 + ci, region.y0 + cj)];
            const int n[4] = {op.node(ci, cj), op.node(ci + 1, cj), op.node(ci, cj + 1), op.node(ci + 1, cj + 1)};
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    t.emplace_back(n[a], n[b], k * K[a][b]);
        }
    op.stiffness.resize(op.num_nodes(), op.num_nodes());
    op.stiffness.setFromTriplets(t.begin(), t.end());

    op.dirichlet.assign(op.num_nodes(), 0);
    for (int b = 0; b < op.nny; ++b)
        for (int a = 0; a < op.nnx; ++a) {
            const bool xside = a == 0 || a == op.nnx - 1;
            const bool yside = b == 0 || b == op.nny - 1;
            op.dirichlet[op.node(a, b)] = xside || (sides == DirichletSides::all && yside);
        }
    return op;
}

FineSolution solve_elliptic_fine(const MediumSpec& medium, const SourceSpec& source, const IndexRect& region,
                                 DirichletSides sides)
{
    check_positive(medium, "solve_elliptic_fine");
    const FineGrid& g = medium.grid;
    const EllipticOperator op = build_elliptic_operator(medium, region, sides);
    const double q = g.h * g.h / 4.0;

    Vec load = Vec::Zero(op.num_nodes());
    for (int cj = 0; cj < region.height(); ++cj)
        for (int ci = 0; ci < region.width(); ++ci) {
            const double f = source.f[g.cell(region.x0 + ci, region.y0 + cj)] * q;
            load[op.node(ci, cj)] += f;
            load[op.node(ci + 1, cj)] += f;
            load[op.node(ci, cj + 1)] += f;
            load[op.node(ci + 1, cj + 1)] += f;
        }

    std::vector<int> map(op.num_nodes(), -1);
    int nfree = 0;
    for (int n = 0; n < op.num_nodes(); ++n)
        if (!op.dirichlet[n])
            map[n] = nfree++;
    Triplets t;
    for (int k = 0; k < op.stiffness.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.stiffness, k); it; ++it)
            if (map[it.row()] >= 0 && map[it.col()] >= 0)
                t.emplace_back(map[it.row()], map[it.col()], it.value());
    SpMat A(nfree, nfree);
    A.setFromTriplets(t.begin(), t.end());
    Vec rhs(nfree);
    for (int n = 0; n < op.num_nodes(); ++n)
        if (map[n] >= 0)
            rhs[map[n]] = load[n];

    SparseSPD solver;
    solver.factorize(A, "solve_elliptic_fine");
    const Vec x = solver.solve(rhs);

    FineSolution sol;
    sol.region = region;
    const double rn = rhs.norm();
    sol.residual = rn > 0 ? (A * x - rhs).norm() / rn : (A * x - rhs).norm();
    sol.nodal.assign(op.num_nodes(), 0.0);
    for (int n = 0; n < op.num_nodes(); ++n)
        if (map[n] >= 0)
            sol.nodal[n] = x[map[n]];
    sol.u = ScalarField(g);
    for (int cj = 0; cj < region.height(); ++cj)
        for (int ci = 0; ci < region.width(); ++ci)
            sol.u(region.x0 + ci, region.y0 + cj) = 0.25 * (sol.nodal[op.node(ci, cj)] + sol.nodal[op.node(ci + 1, cj)]
                                                             + sol.nodal[op.node(ci, cj + 1)]
                                                             + sol.nodal[op.node(ci + 1, cj + 1)]);
    return sol;
}

FineSolution solve_elliptic_fine(const MediumSpec& medium, const SourceSpec& source)
{
    return solve_elliptic_fine(medium, source, {0, medium.grid.nx, 0, medium.grid.ny});
}

MixedOperator build_mixed_operator(const MediumSpec& medium, const IndexRect& region, MixedBoundary boundary)
{
    const FineGrid& g = medium.grid;
    check_region(g, region, "mixed_operator");
    MixedOperator op;
    op.region = region;
    op.h = g.h;
    op.ncx = region.width();
    op.ncy = region.height();
    op.boundary = boundary;
    const double h = g.h;
    auto kap = [&](int ci, int cj) { return medium.kappa[g.cell(region.x0 + ci, region.y0 + cj)]; };
    auto X = [&](int i) { return (region.x0 + i) * h; };
    auto Y = [&](int j) { return (region.y0 + j) * h; };

    for (int cj = 0; cj < op.ncy; ++cj)
        for (int ci = 0; ci + 1 < op.ncx; ++ci)
            op.faces.push_back({op.local_cell(ci, cj), op.local_cell(ci + 1, cj), 0, 1.0,
                                harmonic(kap(ci, cj), kap(ci + 1, cj)), X(ci + 1), Y(cj) + h / 2});
    for (int cj = 0; cj + 1 < op.ncy; ++cj)
        for (int ci = 0; ci < op.ncx; ++ci)
            op.faces.push_back({op.local_cell(ci, cj), op.local_cell(ci, cj + 1), 1, 1.0,
                                harmonic(kap(ci, cj), kap(ci, cj + 1)), X(ci) + h / 2, Y(cj + 1)});
    op.num_interior = static_cast<int>(op.faces.size());

    if (boundary == MixedBoundary::dirichlet) {
        for (int cj = 0; cj < op.ncy; ++cj)
            op.faces.push_back({-1, op.local_cell(0, cj), 0, 0.5, kap(0, cj), X(0), Y(cj) + h / 2});
        for (int cj = 0; cj < op.ncy; ++cj)
            op.faces.push_back(
                {op.local_cell(op.ncx - 1, cj), -1, 0, 0.5, kap(op.ncx - 1, cj), X(op.ncx), Y(cj) + h / 2});
        for (int ci = 0; ci < op.ncx; ++ci)
            op.faces.push_back({-1, op.local_cell(ci, 0), 1, 0.5, kap(ci, 0), X(ci) + h / 2, Y(0)});
        for (int ci = 0; ci < op.ncx; ++ci)
            op.faces.push_back(
                {op.local_cell(ci, op.ncy - 1), -1, 1, 0.5, kap(ci, op.ncy - 1), X(ci) + h / 2, Y(op.ncy)});
    }

    const int nf = op.num_faces();
    op.mass.resize(nf);
    Triplets t;
    t.reserve(2 * static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f) {
        const MixedFace& fc = op.faces[f];
        op.mass[f] = fc.weight * h * h / fc.kappa;
        if (fc.lo >= 0)
            t.emplace_back(f, fc.lo, -h);
        if (fc.hi >= 0)
            t.emplace_back(f, fc.hi, h);
    }
    op.G.resize(nf, op.num_cells());
    op.G.setFromTriplets(t.begin(), t.end());
    return op;
}

SpMat MixedOperator::system() const
{
    const int nf = num_faces(), nc = num_cells();
    Triplets t;
    t.reserve(static_cast<std::size_t>(nf) * 5);
    for (int f = 0; f < nf; ++f)
        t.emplace_back(f, f, mass[f]);
    for (int k = 0; k < G.outerSize(); ++k)
        for (SpMat::InnerIterator it(G, k); it; ++it) {
            t.emplace_back(it.row(), nf + it.col(), it.value());
            t.emplace_back(nf + it.col(), it.row(), -it.value());
        }
    SpMat A(nf + nc, nf + nc);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

Vec MixedOperator::boundary_rhs(const std::vector<double>& ub) const
{
    Vec r = Vec::Zero(num_faces());
    for (int f = num_interior; f < num_faces(); ++f)
        r[f] = -h * faces[f].side() * ub[f - num_interior];
    return r;
}

Vec MixedOperator::face_gradient(const Vec& u, const std::vector<double>* ub) const
{
    Vec gr(num_faces());
    for (int f = 0; f < num_faces(); ++f) {
        const MixedFace& fc = faces[f];
        if (!fc.boundary()) {
            gr[f] = (u[fc.hi] - u[fc.lo]) / h;
        } else {
            const double b = ub ? (*ub)[f - num_interior] : 0.0;
            gr[f] = fc.side() * (b - u[fc.inner()]) / (h / 2);
        }
    }
    return gr;
}

FineSolution solve_mixed_fine(const MediumSpec& medium, const SourceSpec& source, const IndexRect& region)
{
    check_positive(medium, "solve_mixed_fine");
    const FineGrid& g = medium.grid;
    const MixedOperator op = build_mixed_operator(medium, region, MixedBoundary::dirichlet);
    const int nc = op.num_cells();
    Vec load(nc);
    for (int cj = 0; cj < op.ncy; ++cj)
        for (int ci = 0; ci < op.ncx; ++ci)
            load[op.local_cell(ci, cj)] = source.f[g.cell(region.x0 + ci, region.y0 + cj)] * g.h * g.h;

    // The mass block is diagonal: eliminate fluxes and solve the SPD
    // pressure system G^T M^-1 G u = load.
    const Vec minv = op.mass.cwiseInverse();
    const SpMat S = SpMat(op.G.transpose() * minv.asDiagonal() * op.G);
    SparseSPD solver;
    solver.factorize(S, "solve_mixed_fine");
    const Vec u = solver.solve(load);
    const Vec v = -(minv.asDiagonal() * (op.G * u));

    Vec x(op.num_faces() + nc), rhs = Vec::Zero(op.num_faces() + nc);
    x << v, u;
    rhs.tail(nc) = load;
    FineSolution sol;
    sol.region = region;
    const double rn = rhs.norm();
    sol.residual = (op.system() * x - rhs).norm() / (rn > 0 ? rn : 1.0);

    sol.u = ScalarField(g);
    for (int cj = 0; cj < op.ncy; ++cj)
        for (int ci = 0; ci < op.ncx; ++ci)
            sol.u(region.x0 + ci, region.y0 + cj) = u[op.local_cell(ci, cj)];
    sol.v = FaceField(g);
    for (int f = 0; f < op.num_faces(); ++f) {
        const MixedFace& fc = op.faces[f];
        if (fc.dir == 0)
            sol.v.xf(static_cast<int>(std::lround(fc.x / g.h)), static_cast<int>(std::floor(fc.y / g.h))) = v[f];
        else
            sol.v.yf(static_cast<int>(std::floor(fc.x / g.h)), static_cast<int>(std::lround(fc.y / g.h))) = v[f];
    }
    return sol;
}

FineSolution solve_mixed_fine(const MediumSpec& medium, const SourceSpec& source)
{
    return solve_mixed_fine(medium, source, {0, medium.grid.nx, 0, medium.grid.ny});
}

ScalarField solve_zero_order_fine(const ScalarField& A, const std::vector<double>& f)
{
    if (f.size() != A.values.size())
        config_error("solve_zero_order_fine", "source size does not match the grid");
    ScalarField u(A.grid);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!(A.values[k] > 0.0))
            solver_error("solve_zero_order_fine", "zero-order coefficient must be positive");
        u.values[k] = f[k] / A.values[k];
    }
    return u;
}

std::vector<std::array<double, 2>> cell_velocity(const FaceField& v)
{
    const FineGrid& g = v.grid;
    std::vector<std::array<double, 2>> out(g.num_cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.cell(i, j)] = {0.5 * (v.xf(i, j) + v.xf(i + 1, j)), 0.5 * (v.yf(i, j) + v.yf(i, j + 1))};
    return out;
}

void write_scalar_field(std::ostream& os, const ScalarField& u)
{
    const FineGrid& g = u.grid;
    os << std::setprecision(12);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            os << g.xc(i) << ' ' << g.yc(j) << ' ' << u(i, j) << '\n';
}

void write_vector_field(std::ostream& os, const FaceField& v)
{
    const FineGrid& g = v.grid;
    const auto c = cell_velocity(v);
    os << std::setprecision(12);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            os << g.xc(i) << ' ' << g.yc(j) << ' ' << c[g.cell(i, j)][0] << ' ' << c[g.cell(i, j)][1] << '\n';
}

void write_scalar_field_file(const std::string& path, const ScalarField& u)
{
    std::ofstream os(path);
    if (!os)
        io_error("field_dump", "cannot open " + path);
    write_scalar_field(os, u);
}

void write_vector_field_file(const std::string& path, const FaceField& v)
{
    std::ofstream os(path);
    if (!os)
        io_error("field_dump", "cannot open " + path);
    write_vector_field(os, v);
}

} // namespace mchom
