#include <mchom/coarse_solvers.hpp>

#include <mchom/error.hpp>

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>

namespace mchom {

MacroBlock reduce_mixed(const MixedCoefficients& c, const MacroOptions& o)
{
    Eigen::FullPivLU<Mat> lu(c.beta_v);
    if (!lu.isInvertible())
        solver_error("solve_mixed_macro", "beta_v is singular");
    const Mat av = o.neglect.alpha_v ? Mat(Mat::Zero(c.alpha_v.rows(), c.alpha_v.cols())) : c.alpha_v;
    const Mat Bav = lu.solve(av);
    const Mat Bavm = lu.solve(c.alpha_v_m);
    const Vec Bfv = lu.solve(c.f_v);

    MacroBlock b;
    b.R = c.alpha_u - c.beta_u * Bav;
    b.Cv = (o.neglect.convection ? Mat(Mat::Zero(c.alpha_u_m.rows(), c.alpha_u_m.cols())) : c.alpha_u_m)
           - c.beta_u * Bavm;
    b.T = (o.neglect.convection ? Mat(Mat::Zero(c.alpha_u_bar.rows(), c.alpha_u_bar.cols())) : c.alpha_u_bar)
          - c.beta_u_m * Bav;
    b.D = c.alpha_u_nm - c.beta_u_m * Bavm;
    b.s = c.f_u - c.beta_u * Bfv;
    b.sg = (o.gradient_source ? c.f_u_l : Vec(Vec::Zero(c.f_u_l.size()))) - c.beta_u_m * Bfv;
    return b;
}

MacroBlock elliptic_block(const EllipticCoefficients& c, const MacroOptions& o)
{
    MacroBlock b;
    b.R = c.B;
    b.Cv = o.neglect.convection ? Mat(Mat::Zero(c.B_i.rows(), c.B_i.cols())) : c.B_i;
    b.T = o.neglect.convection ? Mat(Mat::Zero(c.B_bar.rows(), c.B_bar.cols())) : c.B_bar;
    b.D = c.B_ik;
    b.s = c.b;
    b.sg = o.gradient_source ? c.b_k : Vec(Vec::Zero(c.b_k.size()));
    return b;
}

double CoarseSolution::block_mean(int i, int bx, int by) const
{
    const int nn = M + 1;
    const Vec& u = U[i];
    return 0.25 * (u[by * nn + bx] + u[by * nn + bx + 1] + u[(by + 1) * nn + bx] + u[(by + 1) * nn + bx + 1]);
}

std::array<double, 2> CoarseSolution::block_gradient(int i, int bx, int by) const
{
    const int nn = M + 1;
    const Vec& u = U[i];
    const double H = 1.0 / M;
    const double u00 = u[by * nn + bx], u10 = u[by * nn + bx + 1];
    const double u01 = u[(by + 1) * nn + bx], u11 = u[(by + 1) * nn + bx + 1];
    return {0.5 * (u10 - u00 + u11 - u01) / H, 0.5 * (u01 - u00 + u11 - u10) / H};
}

CoarseSolution solve_macro(const std::vector<MacroBlock>& blocks, int M, int nc)
{
    if (static_cast<int>(blocks.size()) != M * M)
        config_error("solve_macro", "expected one tensor set per coarse block");
    const int nn = M + 1;
    const double H = 1.0 / M;
    std::vector<int> map(static_cast<std::size_t>(nn) * nn, -1);
    int nfree = 0;
    for (int b = 1; b < M; ++b)
        for (int a = 1; a < M; ++a)
            map[b * nn + a] = nfree++;
    const int ndof = nc * nfree;

    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    std::vector<Eigen::Triplet<double>> t;
    Vec rhs = Vec::Zero(ndof);
    for (int by = 0; by < M; ++by)
        for (int bx = 0; bx < M; ++bx) {
            const MacroBlock& blk = blocks[by * M + bx];
            const int nodes[4] = {by * nn + bx, by * nn + bx + 1, (by + 1) * nn + bx, (by + 1) * nn + bx + 1};
            Mat Ke = Mat::Zero(4 * nc, 4 * nc);  // (j,a) x (i,b)
            Vec Fe = Vec::Zero(4 * nc);
            for (double gx : gp)
                for (double gy : gp) {
                    const double N[4] = {(1 - gx) * (1 - gy), gx * (1 - gy), (1 - gx) * gy, gx * gy};
                    const double dN[2][4] = {{-(1 - gy) / H, (1 - gy) / H, -gy / H, gy / H},
                                             {-(1 - gx) / H, -gx / H, (1 - gx) / H, gx / H}};
                    const double w = H * H / 4;
                    for (int j = 0; j < nc; ++j)
                        for (int a = 0; a < 4; ++a) {
                            double f = blk.s[j] * N[a];
                            for (int l = 0; l < 2; ++l)
                                f += blk.sg[gi(j, l)] * dN[l][a];
                            Fe[j * 4 + a] += w * f;
                            for (int i = 0; i < nc; ++i)
                                for (int b = 0; b < 4; ++b) {
                                    double k = blk.R(j, i) * N[a] * N[b];
                                    for (int m = 0; m < 2; ++m)
                                        k += blk.Cv(j, gi(i, m)) * N[a] * dN[m][b];
                                    for (int l = 0; l < 2; ++l) {
                                        k += blk.T(gi(j, l), i) * dN[l][a] * N[b];
                                        for (int m = 0; m < 2; ++m)
                                            k += blk.D(gi(j, l), gi(i, m)) * dN[l][a] * dN[m][b];
                                    }
                                    Ke(j * 4 + a, i * 4 + b) += w * k;
                                }
                        }
                }
            for (int j = 0; j < nc; ++j)
                for (int a = 0; a < 4; ++a) {
                    if (map[nodes[a]] < 0)
                        continue;
                    const int r = j * nfree + map[nodes[a]];
                    rhs[r] += Fe[j * 4 + a];
                    for (int i = 0; i < nc; ++i)
                        for (int b = 0; b < 4; ++b)
                            if (map[nodes[b]] >= 0)
                                t.emplace_back(r, i * nfree + map[nodes[b]], Ke(j * 4 + a, i * 4 + b));
                }
        }

    CoarseSolution sol;
    sol.M = M;
    sol.num_continua = nc;
    sol.U.assign(nc, Vec::Zero(nn * nn));
    if (ndof == 0)
        return sol;
    SpMat A(ndof, ndof);
    A.setFromTriplets(t.begin(), t.end());
    SparseLU lu;
    lu.factorize(A, "solve_macro");
    const Vec x = lu.solve(rhs);
    const double rn = rhs.norm();
    sol.residual = (A * x - rhs).norm() / (rn > 0 ? rn : 1.0);
    for (int i = 0; i < nc; ++i)
        for (int n = 0; n < nn * nn; ++n)
            if (map[n] >= 0)
                sol.U[i][n] = x[i * nfree + map[n]];
    return sol;
}

namespace {

std::vector<const EffectiveCoefficients*> by_block(const std::vector<EffectiveCoefficients>& coeffs, int M)
{
    std::vector<const EffectiveCoefficients*> out(static_cast<std::size_t>(M) * M, nullptr);
    for (const auto& c : coeffs) {
        if (c.block.bx < 0 || c.block.bx >= M || c.block.by < 0 || c.block.by >= M)
            config_error("coarse_solve", "tensor block outside the partition");
        out[c.block.by * M + c.block.bx] = &c;
    }
    for (const auto* p : out)
        if (!p)
            config_error("coarse_solve", "missing tensors for a coarse block");
    return out;
}

} // namespace

CoarseSolution solve_elliptic_macro(const std::vector<EffectiveCoefficients>& coeffs, int M,
                                    const MacroOptions& options)
{
    const auto blocks = by_block(coeffs, M);
    std::vector<MacroBlock> mb;
    for (const auto* c : blocks) {
        if (c->formulation != Formulation::elliptic)
            config_error("solve_elliptic_macro", "elliptic tensors required");
        mb.push_back(elliptic_block(c->elliptic, options));
    }
    CoarseSolution sol = solve_macro(mb, M, blocks.front()->num_continua);
    sol.options = options;
    sol.path = "elliptic";
    return sol;
}

CoarseSolution solve_mixed_macro(const std::vector<EffectiveCoefficients>& coeffs, int M, const MacroOptions& options)
{
    const auto blocks = by_block(coeffs, M);
    std::vector<MacroBlock> mb;
    for (const auto* c : blocks) {
        if (c->formulation != Formulation::mixed)
            config_error("solve_mixed_macro", "mixed tensors required");
        try {
            mb.push_back(reduce_mixed(c->mixed, options));
        } catch (const Error& e) {
            solver_error("solve_mixed_macro", std::string(e.what()) + " in block (" + std::to_string(c->block.bx)
                                                  + "," + std::to_string(c->block.by) + ")");
        }
    }
    const int nc = blocks.front()->num_continua;
    CoarseSolution sol = solve_macro(mb, M, nc);
    sol.options = options;
    sol.path = "mixed";

    // Velocity per block from block-averaged U and its gradient.
    sol.V.resize(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const MixedCoefficients& c = blocks[k]->mixed;
        const int bx = blocks[k]->block.bx, by = blocks[k]->block.by;
        Vec U(nc), G(2 * nc);
        for (int i = 0; i < nc; ++i) {
            U[i] = sol.block_mean(i, bx, by);
            const auto g = sol.block_gradient(i, bx, by);
            G[gi(i, 0)] = g[0];
            G[gi(i, 1)] = g[1];
        }
        const Mat av = options.neglect.alpha_v ? Mat(Mat::Zero(c.alpha_v.rows(), c.alpha_v.cols())) : c.alpha_v;
        const Vec rhs = c.f_v - av * U - c.alpha_v_m * G;
        const Vec V = c.beta_v.fullPivLu().solve(rhs);
        const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
        sol.elimination_residual =
            std::max(sol.elimination_residual, (c.beta_v * V - rhs).lpNorm<Eigen::Infinity>() / scale);
        sol.V[by * M + bx].resize(nc);
        for (int i = 0; i < nc; ++i)
            sol.V[by * M + bx][i] = {V[gi(i, 0)], V[gi(i, 1)]};
    }
    return sol;
}

std::vector<std::vector<double>> solve_zero_order_macro(const std::vector<ZeroOrderCoefficients>& coeffs)
{
    std::vector<std::vector<double>> out;
    for (const auto& z : coeffs) {
        std::vector<double> U(z.C.size());
        for (std::size_t i = 0; i < z.C.size(); ++i) {
            const double d = z.C[i] * z.measure[i];
            if (d == 0.0)
                solver_error("solve_zero_order_macro", "zero C_i in block (" + std::to_string(z.block.bx) + ","
                                                           + std::to_string(z.block.by) + ")");
            U[i] = z.b[i] / d;
        }
        out.push_back(std::move(U));
    }
    return out;
}

void write_coarse_table(std::ostream& os, const CoarseSolution& sol)
{
    os << std::setprecision(15);
    for (int by = 0; by < sol.M; ++by)
        for (int bx = 0; bx < sol.M; ++bx) {
            os << bx << ' ' << by;
            for (int i = 0; i < sol.num_continua; ++i)
                os << ' ' << sol.block_mean(i, bx, by);
            os << '\n';
        }
}

void write_coarse_metadata(std::ostream& os, const CoarseSolution& sol)
{
    nlohmann::json j;
    j["path"] = sol.path;
    j["M"] = sol.M;
    j["num_continua"] = sol.num_continua;
    j["neglect_alpha_v"] = sol.options.neglect.alpha_v;
    j["neglect_convection"] = sol.options.neglect.convection;
    j["gradient_source"] = sol.options.gradient_source;
    j["residual"] = sol.residual;
    j["elimination_residual"] = sol.elimination_residual;
    j["boundary"] = "U = 0 on the domain boundary for every continuum";
    os << j.dump(1) << '\n';
}

} // namespace mchom
