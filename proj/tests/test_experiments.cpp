#include <mchom/error.hpp>
#include <mchom/experiments.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace mchom;

namespace {

// Nodal values of a linear field; block means then equal cell averages
// of the same field exactly.
CoarseSolution linear_coarse(int M, int nc, double scale)
{
    CoarseSolution s;
    s.M = M;
    s.num_continua = nc;
    s.U.assign(nc, Vec(static_cast<Eigen::Index>((M + 1) * (M + 1))));
    for (int i = 0; i < nc; ++i)
        for (int b = 0; b <= M; ++b)
            for (int a = 0; a <= M; ++a)
                s.U[i][b * (M + 1) + a] = scale * (1.0 + i + 2.0 * a / M + 0.5 * b / M);
    return s;
}

ScalarField linear_fine(const FineGrid& g, const ContinuumMap& cm)
{
    ScalarField u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            u(i, j) = 1.0 + cm.label[g.cell(i, j)] + 2.0 * g.xc(i) + 0.5 * g.yc(j);
    return u;
}

} // namespace

TEST(ErrorMetric, ExactAveragesGiveZero)
{
    const FineGrid g = FineGrid::square(40);
    const MediumSpec m = make_homogeneous(g, 1.0);
    const CoarsePartition p(g, 5);
    const ErrorReport r = compute_error(linear_coarse(5, 1, 1.0), linear_fine(g, m.continua), p, m.continua);
    ASSERT_EQ(r.e2.size(), 1u);
    EXPECT_LT(r.e2[0], 1e-14);
    EXPECT_EQ(r.excluded, 0);
}

TEST(ErrorMetric, UniformScalingGivesRelativeFactor)
{
    const FineGrid g = FineGrid::square(40);
    const MediumSpec m = make_homogeneous(g, 1.0);
    const CoarsePartition p(g, 5);
    for (double delta : {0.01, 0.1, -0.3}) {
        const ErrorReport r =
            compute_error(linear_coarse(5, 1, 1.0 + delta), linear_fine(g, m.continua), p, m.continua);
        EXPECT_NEAR(r.e2[0], std::abs(delta), 1e-13);
        EXPECT_NEAR(r.e2_sq[0], delta * delta, 1e-13);
    }
}

TEST(ErrorMetric, EmptyIntersectionsAreExcludedWithWarning)
{
    const FineGrid g = FineGrid::square(16);
    MediumSpec m = make_homogeneous(g, 1.0);
    m.continua.num_continua = 2;
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i)
            m.continua.label[g.cell(i, j)] = 1;  // block (0,0) holds only continuum 2
    const CoarsePartition p(g, 2);
    ScalarField u(g, 1.0);
    CoarseSolution s;
    s.M = 2;
    s.num_continua = 2;
    s.U.assign(2, Vec::Constant(9, 1.0));
    const ErrorReport r = compute_error(s, u, p, m.continua);
    EXPECT_EQ(r.excluded, 4);
    EXPECT_EQ(r.warnings.size(), 4u);
    EXPECT_EQ(r.e2[1], 0.0);
}

TEST(Config, MapRoundTripAndUnknownKeys)
{
    ExperimentConfig c;
    c.case_id = 2;
    c.M = 20;
    c.eps = 0.05;
    c.layers = 3;
    c.neglect.alpha_v = true;
    c.formulation = Formulation::elliptic;
    c.out_dir = "elsewhere";
    ExperimentConfig d;
    d.apply(c.to_map(true));
    EXPECT_EQ(d.to_map(true), c.to_map(true));
    EXPECT_THROW(d.apply({{"nonsense", "1"}}), Error);
    EXPECT_THROW(d.apply({{"M", "ten"}}), Error);
    d.apply({{"eps", "1/20"}});
    EXPECT_DOUBLE_EQ(d.eps, 0.05);
}

TEST(Config, ValidationRejectsUnresolvedSetups)
{
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    c.layers = 0;
    EXPECT_THROW(c.validate(), Error);
    c.layers = 2;
    c.eps = 0.3;  // M / eps not an integer
    EXPECT_THROW(c.validate(), Error);
    c.eps = 0.1;
    c.layers_v = 3;
    EXPECT_THROW(c.validate(), Error);
}

// Frozen against Python's hashlib over the same canonical text.
TEST(Config, HashIsGitBlobSha1OfCanonicalText)
{
    ExperimentConfig c;
    EXPECT_EQ(config_hash(c), "e4bde4c151268e2035e2739591aafaf09a3d97f6");
    c.threads = 7;
    c.out_dir = "x";
    EXPECT_EQ(config_hash(c), "e4bde4c151268e2035e2739591aafaf09a3d97f6");
    c.layers = 3;
    EXPECT_NE(config_hash(c), "e4bde4c151268e2035e2739591aafaf09a3d97f6");
}

TEST(Manifest, ReparsesToTheSameConfig)
{
    ExperimentConfig c;
    c.case_id = 3;
    c.kappa_low = 2.5e-7;
    c.gradient_source = false;
    c.threads = 2;
    ErrorReport e;
    e.e2 = {0.1, 0.2};
    e.e2_sq = {0.01, 0.04};
    const std::string text = manifest_json(c, {"out/results.csv"}, &e, 1.5);
    const ExperimentConfig back = config_from_manifest(text);
    EXPECT_EQ(back.to_map(true), c.to_map(true));
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_THROW(config_from_manifest("{}"), Error);
    EXPECT_THROW(config_from_manifest("[1,"), Error);
}

TEST(Csv, HeaderRowAndShortestNumbers)
{
    EXPECT_EQ(csv_header(), "case,H,eps,l,e2_1,e2_2,e2_1_sq,e2_2_sq,runtime_s");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(std::stod(format_number(0.13772885792842404)), 0.13772885792842404);
    ExperimentConfig c;
    ErrorReport e;
    e.e2 = {0.5, 0.25};
    e.e2_sq = {0.25, 0.0625};
    EXPECT_EQ(csv_row(c, e, 1.23456), "1,0.1,0.1,2,0.5,0.25,0.25,0.0625,1.235");

    const auto dir = std::filesystem::temp_directory_path() / "mchom_csv_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "r.csv").string();
    append_csv(path, "a");
    append_csv(path, "b");
    std::ifstream is(path);
    std::string l1, l2, l3;
    std::getline(is, l1);
    std::getline(is, l2);
    std::getline(is, l3);
    EXPECT_EQ(l1, csv_header());
    EXPECT_EQ(l2, "a");
    EXPECT_EQ(l3, "b");
}

// Smallest admissible setup (eight cells per period) keeps this quick.
TEST(RunCase, DeterministicAndFinite)
{
    ExperimentConfig c;
    c.case_id = 1;
    c.M = 8;
    c.eps = 0.125;
    c.layers = 1;
    c.threads = 2;
    const CaseResult a = run_case(c);
    c.threads = 1;
    const CaseResult b = run_case(c);
    ASSERT_EQ(a.error.e2.size(), 2u);
    EXPECT_TRUE(std::isfinite(a.error.e2[0]) && std::isfinite(a.error.e2[1]));
    EXPECT_EQ(csv_row(c, a.error, 0.0), csv_row(c, b.error, 0.0));
    EXPECT_EQ(a.coarse.U[0], b.coarse.U[0]);
    EXPECT_LT(a.coarse.residual, 1e-10);
    EXPECT_LT(a.fine.residual, 1e-10);
}

TEST(RunCase, HomogeneousElliptic)
{
    ExperimentConfig c;
    c.case_id = 0;
    c.M = 8;
    c.eps = 0.125;
    c.layers = 2;
    c.formulation = Formulation::elliptic;
    const CaseResult r = run_case(c);
    EXPECT_LT(r.error.e2[0], 0.05);
}
