#include <mchom/grid.hpp>

#include <mchom/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace mchom {

FineGrid FineGrid::square(int n)
{
    if (n < 2)
        config_error("grid", "fine grid needs at least 2 cells per axis, got " + std::to_string(n));
    return FineGrid{n, n, 1.0 / n};
}

CoarsePartition::CoarsePartition(const FineGrid& fine, int M) : fine_(fine), M_(M), cpb_(0)
{
    if (M < 1)
        config_error("grid", "coarse partition needs M >= 1");
    if (fine.nx != fine.ny)
        config_error("grid", "coarse partition expects a square fine grid");
    if (fine.nx % M != 0)
        config_error("grid", "H/h must be an integer: " + std::to_string(fine.nx) + " fine cells do not split into "
                                 + std::to_string(M) + " blocks");
    cpb_ = fine.nx / M;
}

IndexRect CoarsePartition::block_cells(BlockIndex b) const
{
    return {b.bx * cpb_, (b.bx + 1) * cpb_, b.by * cpb_, (b.by + 1) * cpb_};
}

IndexRect CoarsePartition::cells_of(const IndexRect& blocks) const
{
    return {blocks.x0 * cpb_, blocks.x1 * cpb_, blocks.y0 * cpb_, blocks.y1 * cpb_};
}

int RegionSet::tile_index(BlockIndex b) const
{
    auto it = std::find(tiles.begin(), tiles.end(), b);
    return it == tiles.end() ? -1 : static_cast<int>(it - tiles.begin());
}

bool RegionSet::in_velocity(int tile) const
{
    return velocity.contains(tiles[tile].bx, tiles[tile].by);
}

bool RegionSet::in_integration(int tile) const
{
    return integration.contains(tiles[tile].bx, tiles[tile].by);
}

int RegionSet::ring(int tile) const
{
    return std::max(std::abs(tiles[tile].bx - block.bx), std::abs(tiles[tile].by - block.by));
}

int RegionSet::outer_ring() const
{
    int r = 0;
    for (int p = 0; p < num_tiles(); ++p)
        r = std::max(r, ring(p));
    return r;
}

namespace {

IndexRect extend(BlockIndex b, int layers, int M)
{
    return {std::max(b.bx - layers, 0), std::min(b.bx + layers + 1, M), std::max(b.by - layers, 0),
            std::min(b.by + layers + 1, M)};
}

} // namespace

RegionSet build_regions(const CoarsePartition& partition, BlockIndex block, int l, int l_v, int l_i)
{
    const int M = partition.M();
    if (block.bx < 0 || block.bx >= M || block.by < 0 || block.by >= M)
        config_error("regions", "block (" + std::to_string(block.bx) + "," + std::to_string(block.by)
                                    + ") outside the " + std::to_string(M) + "x" + std::to_string(M) + " partition");
    if (l < 0 || l_v < 0 || l_i < 0 || l_v > l || l_i > l)
        config_error("regions", "layer counts must satisfy 0 <= l_V, l_I <= l");

    RegionSet r;
    r.block = block;
    r.layers = l;
    r.layers_v = l_v;
    r.layers_i = l_i;
    r.central = extend(block, 0, M);
    r.oversampled = extend(block, l, M);
    r.velocity = extend(block, l_v, M);
    r.integration = extend(block, l_i, M);
    r.clipped = {block.bx - l < 0, block.bx + l + 1 > M, block.by - l < 0, block.by + l + 1 > M};

    r.tiles.push_back(block);
    for (int by = r.oversampled.y0; by < r.oversampled.y1; ++by)
        for (int bx = r.oversampled.x0; bx < r.oversampled.x1; ++bx)
            if (!(bx == block.bx && by == block.by))
                r.tiles.push_back({bx, by});

    const double H = partition.H();
    r.centre = {(block.bx + 0.5) * H, (block.by + 0.5) * H};
    return r;
}

std::vector<TileMoment> tile_moments(const CoarsePartition& partition, const RegionSet& regions,
                                     const ContinuumMap& continua, bool allow_empty)
{
    const FineGrid& g = partition.fine();
    const double a = g.cell_area();
    std::vector<TileMoment> out;
    for (int p = 0; p < regions.num_tiles(); ++p) {
        const IndexRect cells = partition.block_cells(regions.tiles[p]);
        for (int n = 0; n < continua.num_continua; ++n) {
            TileMoment t;
            t.tile = p;
            t.continuum = n;
            int hits = 0;
            for (int j = cells.y0; j < cells.y1; ++j)
                for (int i = cells.x0; i < cells.x1; ++i) {
                    if (continua.label[g.cell(i, j)] != n)
                        continue;
                    ++hits;
                    t.area += a;
                    t.first[0] += (g.xc(i) - regions.centre[0]) * a;
                    t.first[1] += (g.yc(j) - regions.centre[1]) * a;
                }
            if (hits == 0) {
                if (allow_empty)
                    continue;
                config_error("tile_moments", "tile (" + std::to_string(regions.tiles[p].bx) + ","
                                                 + std::to_string(regions.tiles[p].by) + ") has no cells of continuum "
                                                 + std::to_string(n + 1));
            }
            out.push_back(t);
        }
    }
    return out;
}

bool all_finite(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace mchom
