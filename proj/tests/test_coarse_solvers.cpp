#include <mchom/coarse_solvers.hpp>
#include <mchom/error.hpp>

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace mchom;

namespace {

MacroBlock diffusion_block(int nc, double reaction, double source)
{
    MacroBlock b;
    b.R = reaction * Mat::Identity(nc, nc);
    b.Cv = Mat::Zero(nc, 2 * nc);
    b.T = Mat::Zero(2 * nc, nc);
    b.D = Mat::Identity(2 * nc, 2 * nc);
    b.s = Vec::Constant(nc, source);
    b.sg = Vec::Zero(2 * nc);
    return b;
}

EffectiveCoefficients mixed_block(BlockIndex b, std::mt19937& rng)
{
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    auto rnd = [&](int r, int c) {
        Mat m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                m(i, j) = d(rng);
        return m;
    };
    EffectiveCoefficients e;
    e.block = b;
    e.formulation = Formulation::mixed;
    e.num_continua = 2;
    MixedCoefficients& c = e.mixed;
    c.alpha_u = Mat::Identity(2, 2) + rnd(2, 2) * 0.1;
    c.alpha_u_m = rnd(2, 4);
    c.alpha_u_bar = rnd(4, 2);
    c.alpha_u_nm = Mat::Identity(4, 4) * 2.0;
    c.beta_u = rnd(2, 4);
    c.beta_u_m = rnd(4, 4) * 0.1;
    c.alpha_v = rnd(4, 2);
    c.alpha_v_m = rnd(4, 4);
    c.beta_v = Mat::Identity(4, 4) * 3.0 + rnd(4, 4) * 0.1;
    c.f_u = Vec::Constant(2, 1.0);
    c.f_u_l = Vec::Zero(4);
    c.f_v = rnd(4, 1);
    return e;
}

} // namespace

// One interior node: K = 4 * 2/3, load = 4 * H^2/4 with H = 1/2.
TEST(Macro, SingleInteriorNodeMatchesHandComputation)
{
    const std::vector<MacroBlock> blocks(4, diffusion_block(1, 0.0, 1.0));
    const CoarseSolution s = solve_macro(blocks, 2, 1);
    EXPECT_NEAR(s.U[0][4], 3.0 / 32.0, 1e-15);
    EXPECT_EQ(s.U[0][0], 0.0);
    EXPECT_NEAR(s.block_mean(0, 1, 1), 3.0 / 128.0, 1e-15);

    // Reaction adds the consistent mass 4 * H^2 / 9.
    const std::vector<MacroBlock> rb(4, diffusion_block(1, 5.0, 1.0));
    const CoarseSolution r = solve_macro(rb, 2, 1);
    EXPECT_NEAR(r.U[0][4], 0.25 / (8.0 / 3.0 + 5.0 / 9.0), 1e-15);
}

TEST(Macro, UncoupledContinuaSolveIndependently)
{
    std::vector<MacroBlock> one, two;
    for (int k = 0; k < 25; ++k) {
        one.push_back(diffusion_block(1, 0.5 + 0.01 * k, 1.0));
        MacroBlock b = diffusion_block(2, 0.0, 1.0);
        b.R(0, 0) = b.R(1, 1) = 0.5 + 0.01 * k;
        two.push_back(b);
    }
    const CoarseSolution a = solve_macro(one, 5, 1);
    const CoarseSolution b = solve_macro(two, 5, 2);
    for (int n = 0; n < 36; ++n) {
        EXPECT_NEAR(b.U[0][n], a.U[0][n], 1e-14);
        EXPECT_NEAR(b.U[1][n], a.U[0][n], 1e-14);
    }
    EXPECT_LT(a.residual, 1e-12);
}

TEST(Macro, BlockMeanAndGradientOfBilinearField)
{
    CoarseSolution s;
    s.M = 4;
    s.num_continua = 1;
    s.U.assign(1, Vec(25));
    for (int b = 0; b <= 4; ++b)
        for (int a = 0; a <= 4; ++a)
            s.U[0][b * 5 + a] = 1.0 + 2.0 * a / 4.0 + 3.0 * b / 4.0;
    EXPECT_NEAR(s.block_mean(0, 2, 1), 1.0 + 2.0 * 0.625 + 3.0 * 0.375, 1e-15);
    const auto gr = s.block_gradient(0, 2, 1);
    EXPECT_NEAR(gr[0], 2.0, 1e-14);
    EXPECT_NEAR(gr[1], 3.0, 1e-14);
}

TEST(Reduce, EliminationMatchesExplicitSchurComplement)
{
    std::mt19937 rng(11);
    const MixedCoefficients c = mixed_block({0, 0}, rng).mixed;
    const Mat Binv = c.beta_v.inverse();
    const MacroBlock b = reduce_mixed(c, {});
    EXPECT_LT((b.R - (c.alpha_u - c.beta_u * Binv * c.alpha_v)).norm(), 1e-14);
    EXPECT_LT((b.Cv - (c.alpha_u_m - c.beta_u * Binv * c.alpha_v_m)).norm(), 1e-14);
    EXPECT_LT((b.T - (c.alpha_u_bar - c.beta_u_m * Binv * c.alpha_v)).norm(), 1e-14);
    EXPECT_LT((b.D - (c.alpha_u_nm - c.beta_u_m * Binv * c.alpha_v_m)).norm(), 1e-14);
    EXPECT_LT((b.s - (c.f_u - c.beta_u * Binv * c.f_v)).norm(), 1e-14);

    MacroOptions o;
    o.neglect.alpha_v = true;
    o.neglect.convection = true;
    const MacroBlock n = reduce_mixed(c, o);
    EXPECT_EQ(n.R, c.alpha_u);
    EXPECT_LT((n.Cv + c.beta_u * Binv * c.alpha_v_m).norm(), 1e-14);
    EXPECT_LT(n.T.norm(), 1e-300);
}

TEST(Reduce, SingularBetaVIsASolverError)
{
    std::mt19937 rng(3);
    MixedCoefficients c = mixed_block({0, 0}, rng).mixed;
    c.beta_v.setZero();
    try {
        reduce_mixed(c, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::solver);
    }
}

TEST(MixedMacro, VelocityEquationsHoldAfterReconstruction)
{
    std::mt19937 rng(5);
    std::vector<EffectiveCoefficients> coeffs;
    for (int by = 0; by < 4; ++by)
        for (int bx = 0; bx < 4; ++bx)
            coeffs.push_back(mixed_block({bx, by}, rng));
    const CoarseSolution s = solve_mixed_macro(coeffs, 4);
    EXPECT_LT(s.residual, 1e-12);
    EXPECT_LT(s.elimination_residual, 1e-12);
    ASSERT_EQ(s.V.size(), 16u);
    EXPECT_EQ(s.path, "mixed");
}

TEST(MixedMacro, MissingBlockIsAConfigError)
{
    std::mt19937 rng(5);
    std::vector<EffectiveCoefficients> coeffs;
    for (int k = 0; k < 3; ++k)
        coeffs.push_back(mixed_block({k % 2, k / 2}, rng));
    EXPECT_THROW(solve_mixed_macro(coeffs, 2), Error);
}

TEST(ZeroOrderMacro, AlgebraicSolve)
{
    ZeroOrderCoefficients z;
    z.C = {2.0, 4.0};
    z.measure = {0.25, 0.75};
    z.b = Vec(2);
    z.b << 1.0, 3.0;
    const auto U = solve_zero_order_macro({z});
    EXPECT_DOUBLE_EQ(U[0][0], 2.0);
    EXPECT_DOUBLE_EQ(U[0][1], 1.0);
}

TEST(CoarseExport, TableHasOneRowPerBlock)
{
    const std::vector<MacroBlock> blocks(9, diffusion_block(1, 0.0, 1.0));
    const CoarseSolution s = solve_macro(blocks, 3, 1);
    std::stringstream ss;
    write_coarse_table(ss, s);
    int rows = 0;
    for (std::string line; std::getline(ss, line);)
        ++rows;
    EXPECT_EQ(rows, 9);
    std::stringstream meta;
    write_coarse_metadata(meta, s);
    EXPECT_NE(meta.str().find("\"residual\""), std::string::npos);
}
