#include <mchom/error.hpp>
#include <mchom/grid.hpp>
#include <mchom/media.hpp>

#include <gtest/gtest.h>

using namespace mchom;

TEST(CoarsePartition, BlocksCoverTheGrid)
{
    const CoarsePartition p(FineGrid::square(40), 8);
    EXPECT_EQ(p.cells_per_block(), 5);
    EXPECT_EQ(p.num_blocks(), 64);
    std::vector<int> hits(40 * 40, 0);
    for (int id = 0; id < p.num_blocks(); ++id) {
        const BlockIndex b = p.block(id);
        EXPECT_EQ(p.block_id(b), id);
        const IndexRect r = p.block_cells(b);
        for (int j = r.y0; j < r.y1; ++j)
            for (int i = r.x0; i < r.x1; ++i) {
                ++hits[j * 40 + i];
                EXPECT_EQ(p.block_of_cell(i, j), b);
            }
    }
    for (int h : hits)
        EXPECT_EQ(h, 1);
}

TEST(CoarsePartition, RejectsNonDividingM)
{
    EXPECT_THROW(CoarsePartition(FineGrid::square(30), 7), Error);
}

TEST(Regions, InteriorBlockHasNineTilesForOneLayer)
{
    const CoarsePartition p(FineGrid::square(80), 10);
    const RegionSet r = build_regions(p, {5, 5}, 1, 1, 0);
    EXPECT_EQ(r.num_tiles(), 9);
    EXPECT_EQ(r.tiles.front(), (BlockIndex{5, 5}));
    EXPECT_EQ(r.oversampled, (IndexRect{4, 7, 4, 7}));
    EXPECT_EQ(r.velocity, (IndexRect{4, 7, 4, 7}));
    EXPECT_EQ(r.integration, (IndexRect{5, 6, 5, 6}));
    EXPECT_DOUBLE_EQ(r.centre[0], 0.55);
    EXPECT_DOUBLE_EQ(r.centre[1], 0.55);
    for (bool c : r.clipped)
        EXPECT_FALSE(c);
    EXPECT_EQ(r.outer_ring(), 1);
    EXPECT_EQ(r.ring(0), 0);
}

TEST(Regions, CornerBlockIsClipped)
{
    const CoarsePartition p(FineGrid::square(80), 10);
    const RegionSet r = build_regions(p, {0, 0}, 1, 1, 1);
    EXPECT_EQ(r.num_tiles(), 4);
    EXPECT_EQ(r.oversampled, (IndexRect{0, 2, 0, 2}));
    EXPECT_TRUE(r.clipped[0]);
    EXPECT_FALSE(r.clipped[1]);
    EXPECT_TRUE(r.clipped[2]);
    EXPECT_FALSE(r.clipped[3]);
}

TEST(Regions, TilesAreUniqueAndInsideOversampledRegion)
{
    const CoarsePartition p(FineGrid::square(80), 10);
    for (int l = 1; l <= 3; ++l)
        for (int by = 0; by < 10; by += 3)
            for (int bx = 0; bx < 10; bx += 2) {
                const RegionSet r = build_regions(p, {bx, by}, l, l, l - 1);
                EXPECT_EQ(r.num_tiles(), r.oversampled.count());
                for (int t = 0; t < r.num_tiles(); ++t) {
                    EXPECT_TRUE(r.oversampled.contains(r.tiles[t].bx, r.tiles[t].by));
                    EXPECT_EQ(r.tile_index(r.tiles[t]), t);
                    EXPECT_LE(r.ring(t), l);
                    EXPECT_EQ(r.in_integration(t), r.integration.contains(r.tiles[t].bx, r.tiles[t].by));
                }
            }
}

TEST(Regions, RejectsOutOfRangeBlockAndBadLayers)
{
    const CoarsePartition p(FineGrid::square(80), 10);
    EXPECT_THROW(build_regions(p, {10, 0}, 1, 1, 0), Error);
    EXPECT_THROW(build_regions(p, {0, 0}, -1, 0, 0), Error);
    EXPECT_THROW(build_regions(p, {0, 0}, 1, 2, 0), Error);
}

TEST(TileMoments, CentralFirstMomentVanishesAndNeighbourShifts)
{
    const FineGrid g = FineGrid::square(40);
    const CoarsePartition p(g, 8);
    const MediumSpec m = make_homogeneous(g, 1.0);
    const RegionSet r = build_regions(p, {3, 4}, 1, 1, 0);
    const auto moments = tile_moments(p, r, m.continua);
    ASSERT_EQ(static_cast<int>(moments.size()), r.num_tiles());
    const double H = 1.0 / 8;
    for (const auto& tm : moments) {
        const BlockIndex b = r.tiles[tm.tile];
        EXPECT_NEAR(tm.area, H * H, 1e-15);
        // Midpoint rule is exact for linear integrands.
        EXPECT_NEAR(tm.first[0], (b.bx - 3) * H * H * H, 1e-15);
        EXPECT_NEAR(tm.first[1], (b.by - 4) * H * H * H, 1e-15);
    }
}

TEST(TileMoments, MissingContinuumIsAConfigError)
{
    const FineGrid g = FineGrid::square(16);
    const CoarsePartition p(g, 2);
    MediumSpec m = make_homogeneous(g, 1.0);
    m.continua.num_continua = 2;
    // Continuum 2 lives only in block (0,0).
    m.continua.label[g.cell(1, 1)] = 1;
    const RegionSet r = build_regions(p, {0, 0}, 1, 1, 0);
    try {
        tile_moments(p, r, m.continua);
        FAIL() << "expected a config error";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::config);
        EXPECT_NE(std::string(e.what()).find("continuum 2"), std::string::npos) << e.what();
    }
    EXPECT_EQ(tile_moments(p, r, m.continua, true).size(), 4u + 1u);
}
