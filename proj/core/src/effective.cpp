#include <mchom/effective.hpp>

#include <mchom/error.hpp>

#include <json.hpp>

#include <cmath>
#include <istream>
#include <ostream>

namespace mchom {

using nlohmann::json;

ZeroOrderCoefficients assemble_zero_order(const CoarsePartition& partition, const ContinuumMap& continua,
                                          const std::vector<double>& A, const std::vector<double>& f,
                                          BlockIndex block)
{
    const FineGrid& g = partition.fine();
    const int nc = continua.num_continua;
    const IndexRect cells = partition.block_cells(block);
    const double a = g.cell_area();
    std::vector<double> inv(nc, 0.0);
    ZeroOrderCoefficients z;
    z.block = block;
    z.measure.assign(nc, 0.0);
    z.C.assign(nc, 0.0);
    for (int j = cells.y0; j < cells.y1; ++j)
        for (int i = cells.x0; i < cells.x1; ++i) {
            const int k = g.cell(i, j);
            if (!(A[k] > 0.0))
                solver_error("assemble_zero_order", "zero-order coefficient must be positive");
            z.measure[continua.label[k]] += a;
            inv[continua.label[k]] += a / A[k];
        }
    for (int n = 0; n < nc; ++n) {
        if (z.measure[n] <= 0.0)
            config_error("assemble_zero_order", "continuum " + std::to_string(n + 1) + " missing from block");
        z.C[n] = z.measure[n] / inv[n];
    }
    z.alpha = Mat::Zero(nc, nc);
    for (int n = 0; n < nc; ++n)
        z.alpha(n, n) = z.C[n] * z.measure[n];
    z.b = Vec::Zero(nc);
    for (int j = cells.y0; j < cells.y1; ++j)
        for (int i = cells.x0; i < cells.x1; ++i) {
            const int k = g.cell(i, j);
            const int n = continua.label[k];
            z.b[n] += a * f[k] * z.C[n] / A[k];
        }
    return z;
}

Mat zero_order_alpha_quadrature(const CoarsePartition& partition, const ContinuumMap& continua,
                                const std::vector<double>& A, const ZeroOrderCoefficients& z)
{
    const FineGrid& g = partition.fine();
    const int nc = continua.num_continua;
    const IndexRect cells = partition.block_cells(z.block);
    Mat alpha = Mat::Zero(nc, nc);
    std::vector<double> phi(nc);
    for (int j = cells.y0; j < cells.y1; ++j)
        for (int i = cells.x0; i < cells.x1; ++i) {
            const int k = g.cell(i, j);
            for (int n = 0; n < nc; ++n)
                phi[n] = z.C[n] * continua.psi(n, k) / A[k];
            for (int m = 0; m < nc; ++m)
                for (int n = 0; n < nc; ++n)
                    alpha(m, n) += g.cell_area() * A[k] * phi[m] * phi[n];
        }
    return alpha;
}

namespace {

double element_energy(const EllipticOperator& op, const MediumSpec& medium, const IndexRect& r, const Vec& z)
{
    const auto& K = q1_stiffness();
    const FineGrid& g = medium.grid;
    double e = 0.0;
    for (int j = r.y0; j < r.y1; ++j)
        for (int i = r.x0; i < r.x1; ++i) {
            const int ci = i - op.region.x0, cj = j - op.region.y0;
            const double v[4] = {z[op.node(ci, cj)], z[op.node(ci + 1, cj)], z[op.node(ci, cj + 1)],
                                 z[op.node(ci + 1, cj + 1)]};
            double s = 0.0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    s += v[a] * K[a][b] * v[b];
            e += medium.kappa[g.cell(i, j)] * s;
        }
    return e;
}

double cell_mean(const EllipticOperator& op, const Vec& z, int ci, int cj)
{
    return 0.25 * (z[op.node(ci, cj)] + z[op.node(ci + 1, cj)] + z[op.node(ci, cj + 1)] + z[op.node(ci + 1, cj + 1)]);
}

IndexRect blocks_for(const RegionSet& r, IntegrationRegion region)
{
    return region == IntegrationRegion::central ? r.central : r.integration;
}

} // namespace

double elliptic_energy(const EllipticOperator& op, const MediumSpec& medium, const IndexRect& cells_region,
                       const Vec& x, const Vec& y)
{
    const Vec s = x + y;
    const Vec d = x - y;
    return 0.25 * (element_energy(op, medium, cells_region, s) - element_energy(op, medium, cells_region, d));
}

EffectiveCoefficients assemble_elliptic(const CellSolutionSet& set, const MediumSpec& medium,
                                        const SourceSpec& source, const CoarsePartition& partition,
                                        IntegrationRegion region)
{
    if (set.formulation != Formulation::elliptic || !set.elliptic)
        config_error("assemble_elliptic", "elliptic cell solutions required");
    const int nc = medium.continua.num_continua;
    const EllipticOperator& op = *set.elliptic;
    const IndexRect cells = partition.cells_of(blocks_for(set.regions, region));
    const FineGrid& g = medium.grid;
    const double measure = cells.count() * g.cell_area();

    std::vector<const Vec*> P(nc), L(2 * nc);
    for (int i = 0; i < nc; ++i) {
        P[i] = &set.column({ColumnKind::constant, i, -1}).field;
        for (int m = 0; m < 2; ++m)
            L[gi(i, m)] = &set.column({ColumnKind::linear, i, m}).field;
    }
    auto a = [&](const Vec* trial, const Vec* test) {
        return elliptic_energy(op, medium, cells, *trial, *test) / measure;
    };

    EffectiveCoefficients out;
    out.block = set.regions.block;
    out.formulation = Formulation::elliptic;
    out.num_continua = nc;
    out.measure = measure;
    EllipticCoefficients& e = out.elliptic;
    e.B.resize(nc, nc);
    e.B_i.resize(nc, 2 * nc);
    e.B_bar.resize(2 * nc, nc);
    e.B_ik.resize(2 * nc, 2 * nc);
    for (int n = 0; n < nc; ++n)
        for (int m = 0; m < nc; ++m)
            e.B(n, m) = a(P[m], P[n]);
    for (int n = 0; n < nc; ++n)
        for (int q = 0; q < 2 * nc; ++q) {
            e.B_i(n, q) = a(L[q], P[n]);
            e.B_bar(q, n) = a(P[n], L[q]);
        }
    for (int p = 0; p < 2 * nc; ++p)
        for (int q = 0; q < 2 * nc; ++q)
            e.B_ik(p, q) = a(L[q], L[p]);

    e.A = Mat::Zero(nc, nc);
    e.b = Vec::Zero(nc);
    e.b_k = Vec::Zero(2 * nc);
    for (int j = cells.y0; j < cells.y1; ++j)
        for (int i = cells.x0; i < cells.x1; ++i) {
            const int ci = i - op.region.x0, cj = j - op.region.y0;
            const double w = g.cell_area() / measure;
            const double f = source.f[g.cell(i, j)];
            for (int n = 0; n < nc; ++n) {
                const double pn = cell_mean(op, *P[n], ci, cj);
                e.b[n] += w * f * pn;
                for (int m = 0; m < nc; ++m)
                    e.A(n, m) += w * pn * cell_mean(op, *P[m], ci, cj);
            }
            for (int q = 0; q < 2 * nc; ++q)
                e.b_k[q] += w * f * cell_mean(op, *L[q], ci, cj);
        }
    if (!e.B.allFinite() || !e.B_ik.allFinite() || !e.b.allFinite())
        solver_error("assemble_elliptic", "non-finite effective coefficient");
    return out;
}

std::vector<double> mixed_face_weights(const CellSolutionSet& set, const CoarsePartition& partition,
                                       const IndexRect& blocks)
{
    const MixedOperator& op = *set.mixed;
    const double a = op.h * op.h;
    std::vector<char> inside(op.num_cells());
    for (int cj = 0; cj < op.ncy; ++cj)
        for (int ci = 0; ci < op.ncx; ++ci) {
            const BlockIndex b = partition.block_of_cell(op.region.x0 + ci, op.region.y0 + cj);
            inside[op.local_cell(ci, cj)] = blocks.contains(b.bx, b.by);
        }
    std::vector<double> w(op.num_faces(), 0.0);
    for (int f = 0; f < op.num_faces(); ++f) {
        const MixedFace& fc = op.faces[f];
        for (int c : {fc.lo, fc.hi})
            if (c >= 0 && inside[c])
                w[f] += a / 2;
    }
    return w;
}

namespace {

struct ColumnParts
{
    Vec v, u, grad;
};

ColumnParts split(const MixedOperator& op, const CellColumn& c)
{
    ColumnParts p;
    p.v = c.field.head(op.num_faces());
    p.u = c.field.tail(op.num_cells());
    p.grad = op.face_gradient(p.u, c.boundary.empty() ? nullptr : &c.boundary);
    return p;
}

double form(const MixedOperator& op, const ColumnParts& tr, const ColumnParts& te, const std::vector<double>& w)
{
    double s = 0.0;
    for (int f = 0; f < op.num_faces(); ++f) {
        if (w[f] == 0.0)
            continue;
        s += w[f] * (te.v[f] * tr.v[f] / op.faces[f].kappa + te.v[f] * tr.grad[f] - tr.v[f] * te.grad[f]);
    }
    return s;
}

} // namespace

double mixed_form(const CellSolutionSet& set, const CellColumn& trial, const CellColumn& test,
                  const std::vector<double>& face_weight)
{
    const MixedOperator& op = *set.mixed;
    return form(op, split(op, trial), split(op, test), face_weight);
}

EffectiveCoefficients assemble_mixed(const CellSolutionSet& set, const MediumSpec& medium, const SourceSpec& source,
                                     const CoarsePartition& partition, IntegrationRegion region,
                                     IntegrationRegion source_region)
{
    if (set.formulation != Formulation::mixed || !set.mixed)
        config_error("assemble_mixed", "mixed cell solutions required");
    const int nc = medium.continua.num_continua;
    const MixedOperator& op = *set.mixed;
    const IndexRect blocks = blocks_for(set.regions, region);
    const IndexRect cells = partition.cells_of(blocks);
    const FineGrid& g = medium.grid;
    const double measure = cells.count() * g.cell_area();
    const std::vector<double> w = mixed_face_weights(set, partition, blocks);

    std::vector<ColumnParts> P(nc), L(2 * nc), W(2 * nc);
    for (int i = 0; i < nc; ++i) {
        P[i] = split(op, set.column({ColumnKind::constant, i, -1}));
        for (int m = 0; m < 2; ++m) {
            L[gi(i, m)] = split(op, set.column({ColumnKind::linear, i, m}));
            W[gi(i, m)] = split(op, set.column({ColumnKind::velocity, i, m}));
        }
    }
    auto A = [&](const ColumnParts& trial, const ColumnParts& test) { return form(op, trial, test, w) / measure; };
    auto fill = [&](const std::vector<ColumnParts>& tests, const std::vector<ColumnParts>& trials) {
        Mat out(tests.size(), trials.size());
        for (std::size_t r = 0; r < tests.size(); ++r)
            for (std::size_t c = 0; c < trials.size(); ++c)
                out(r, c) = A(trials[c], tests[r]);
        return out;
    };

    EffectiveCoefficients out;
    out.block = set.regions.block;
    out.formulation = Formulation::mixed;
    out.num_continua = nc;
    out.measure = measure;
    MixedCoefficients& x = out.mixed;
    x.alpha_u = fill(P, P);
    x.alpha_u_m = fill(P, L);
    x.alpha_u_bar = fill(L, P);
    x.alpha_u_nm = fill(L, L);
    x.beta_u = fill(P, W);
    x.beta_u_m = fill(L, W);
    x.alpha_v = fill(W, P);
    x.alpha_v_m = fill(W, L);
    x.beta_v = fill(W, W);

    const IndexRect source_blocks = blocks_for(set.regions, source_region);
    const double source_measure = partition.cells_of(source_blocks).count() * g.cell_area();
    auto source_term = [&](const ColumnParts& c) {
        double s = 0.0;
        for (int cj = 0; cj < op.ncy; ++cj)
            for (int ci = 0; ci < op.ncx; ++ci) {
                const int i = op.region.x0 + ci, j = op.region.y0 + cj;
                const BlockIndex b = partition.block_of_cell(i, j);
                if (source_blocks.contains(b.bx, b.by))
                    s += g.cell_area() * source.f[g.cell(i, j)] * c.u[op.local_cell(ci, cj)];
            }
        return s / source_measure;
    };
    x.f_u.resize(nc);
    x.f_u_l.resize(2 * nc);
    x.f_v.resize(2 * nc);
    for (int i = 0; i < nc; ++i)
        x.f_u[i] = source_term(P[i]);
    for (int q = 0; q < 2 * nc; ++q) {
        x.f_u_l[q] = source_term(L[q]);
        x.f_v[q] = source_term(W[q]);
    }
    for (const Mat* m : {&x.alpha_u, &x.alpha_u_m, &x.alpha_u_bar, &x.alpha_u_nm, &x.beta_u, &x.beta_u_m,
                         &x.alpha_v, &x.alpha_v_m, &x.beta_v})
        if (!m->allFinite())
            solver_error("assemble_mixed", "non-finite effective coefficient");
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json to_json(const Mat& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const Vec& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

Mat mat_from(const json& j)
{
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            io_error("coefficients_json", "ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Vec vec_from(const json& j)
{
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = j[i].get<double>();
    return v;
}

} // namespace

void write_coefficients_json(std::ostream& os, const std::vector<EffectiveCoefficients>& blocks, int M)
{
    json root;
    root["format"] = "mchom-coefficients v1";
    root["M"] = M;
    root["layout"] = "rows index the test column, columns the trial column; (i,m) -> 2i+m";
    json arr = json::array();
    for (const auto& b : blocks) {
        json e;
        e["block"] = {b.block.bx, b.block.by};
        e["formulation"] = b.formulation == Formulation::mixed ? "mixed" : "elliptic";
        e["num_continua"] = b.num_continua;
        e["measure"] = b.measure;
        if (b.formulation == Formulation::mixed) {
            const MixedCoefficients& x = b.mixed;
            e["alpha_u"] = to_json(x.alpha_u);
            e["alpha_u_m"] = to_json(x.alpha_u_m);
            e["alpha_u_bar"] = to_json(x.alpha_u_bar);
            e["alpha_u_nm"] = to_json(x.alpha_u_nm);
            e["beta_u"] = to_json(x.beta_u);
            e["beta_u_m"] = to_json(x.beta_u_m);
            e["alpha_v"] = to_json(x.alpha_v);
            e["alpha_v_m"] = to_json(x.alpha_v_m);
            e["beta_v"] = to_json(x.beta_v);
            e["f_u"] = to_json(x.f_u);
            e["f_u_l"] = to_json(x.f_u_l);
            e["f_v"] = to_json(x.f_v);
        } else {
            const EllipticCoefficients& x = b.elliptic;
            e["A"] = to_json(x.A);
            e["B"] = to_json(x.B);
            e["B_i"] = to_json(x.B_i);
            e["B_bar"] = to_json(x.B_bar);
            e["B_ik"] = to_json(x.B_ik);
            e["b"] = to_json(x.b);
            e["b_k"] = to_json(x.b_k);
        }
        arr.push_back(e);
    }
    root["blocks"] = arr;
    os << root.dump(1) << "\n";
}

std::vector<EffectiveCoefficients> read_coefficients_json(std::istream& is, int* M)
{
    json root;
    try {
        is >> root;
    } catch (const json::exception& e) {
        io_error("coefficients_json", e.what());
    }
    try {
        if (root.value("format", "") != "mchom-coefficients v1")
            io_error("coefficients_json", "unknown format tag");
        if (M)
            *M = root.at("M").get<int>();
        std::vector<EffectiveCoefficients> out;
        for (const auto& e : root.at("blocks")) {
            EffectiveCoefficients b;
            b.block = {e.at("block")[0].get<int>(), e.at("block")[1].get<int>()};
            b.num_continua = e.at("num_continua").get<int>();
            b.measure = e.at("measure").get<double>();
            if (e.at("formulation").get<std::string>() == "mixed") {
                b.formulation = Formulation::mixed;
                MixedCoefficients& x = b.mixed;
                x.alpha_u = mat_from(e.at("alpha_u"));
                x.alpha_u_m = mat_from(e.at("alpha_u_m"));
                x.alpha_u_bar = mat_from(e.at("alpha_u_bar"));
                x.alpha_u_nm = mat_from(e.at("alpha_u_nm"));
                x.beta_u = mat_from(e.at("beta_u"));
                x.beta_u_m = mat_from(e.at("beta_u_m"));
                x.alpha_v = mat_from(e.at("alpha_v"));
                x.alpha_v_m = mat_from(e.at("alpha_v_m"));
                x.beta_v = mat_from(e.at("beta_v"));
                x.f_u = vec_from(e.at("f_u"));
                x.f_u_l = vec_from(e.at("f_u_l"));
                x.f_v = vec_from(e.at("f_v"));
            } else {
                b.formulation = Formulation::elliptic;
                EllipticCoefficients& x = b.elliptic;
                x.A = mat_from(e.at("A"));
                x.B = mat_from(e.at("B"));
                x.B_i = mat_from(e.at("B_i"));
                x.B_bar = mat_from(e.at("B_bar"));
                x.B_ik = mat_from(e.at("B_ik"));
                x.b = vec_from(e.at("b"));
                x.b_k = vec_from(e.at("b_k"));
            }
            out.push_back(std::move(b));
        }
        return out;
    } catch (const json::exception& e) {
        io_error("coefficients_json", e.what());
    }
}

} // namespace mchom
