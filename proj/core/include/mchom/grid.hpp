#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mchom {

// Uniform cell-centered grid on the unit square. Cells are numbered
// row-major with x fastest: index = j * nx + i.
struct FineGrid
{
    int nx = 0;
    int ny = 0;
    double h = 0.0;

    static FineGrid square(int n);

    int num_cells() const { return nx * ny; }
    int cell(int i, int j) const { return j * nx + i; }
    double xc(int i) const { return (i + 0.5) * h; }
    double yc(int j) const { return (j + 0.5) * h; }
    double cell_area() const { return h * h; }
};

struct BlockIndex
{
    int bx = 0;
    int by = 0;

    friend bool operator==(const BlockIndex&, const BlockIndex&) = default;
};

// Half-open rectangle [x0,x1) x [y0,y1). Used both in block units and in
// fine-cell units.
struct IndexRect
{
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    int count() const { return width() * height(); }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    friend bool operator==(const IndexRect&, const IndexRect&) = default;
};

class CoarsePartition
{
public:
    CoarsePartition(const FineGrid& fine, int M);

    const FineGrid& fine() const { return fine_; }
    int M() const { return M_; }
    double H() const { return 1.0 / M_; }
    // Fine cells per block edge (H/h).
    int cells_per_block() const { return cpb_; }
    int num_blocks() const { return M_ * M_; }
    int block_id(BlockIndex b) const { return b.by * M_ + b.bx; }
    BlockIndex block(int id) const { return {id % M_, id / M_}; }

    BlockIndex block_of_cell(int i, int j) const { return {i / cpb_, j / cpb_}; }
    IndexRect block_cells(BlockIndex b) const;
    // Fine-cell rectangle covered by a rectangle given in block units.
    IndexRect cells_of(const IndexRect& blocks) const;

private:
    FineGrid fine_;
    int M_;
    int cpb_;
};

// Nested regions around one coarse block. All rectangles are in block
// units; tiles are coarse blocks, the central one first.
struct RegionSet
{
    BlockIndex block;
    int layers = 0;
    int layers_v = 0;
    int layers_i = 0;
    IndexRect central;
    IndexRect oversampled;
    IndexRect velocity;
    IndexRect integration;
    std::vector<BlockIndex> tiles;
    // Centroid of the central block.
    std::array<double, 2> centre{};
    // Sides of the oversampled region cut by the domain boundary:
    // left, right, bottom, top.
    std::array<bool, 4> clipped{};

    int num_tiles() const { return static_cast<int>(tiles.size()); }
    int tile_index(BlockIndex b) const;
    bool in_velocity(int tile) const;
    bool in_integration(int tile) const;
    // Chebyshev distance of a tile from the central block.
    int ring(int tile) const;
    // Largest ring actually present (outermost tiles after clipping).
    int outer_ring() const;
};

RegionSet build_regions(const CoarsePartition& partition, BlockIndex block, int l, int l_v, int l_i);

// Continuum labels are stored 0-based; user-facing formats use 1-based.
struct ContinuumMap
{
    int num_continua = 1;
    std::vector<int> label;

    double psi(int continuum, int cell) const { return label[cell] == continuum ? 1.0 : 0.0; }
};

struct TileMoment
{
    int tile = 0;
    int continuum = 0;
    double area = 0.0;              // integral of psi_n over the tile
    std::array<double, 2> first{};  // integral of (x_l - c_l) psi_n over the tile
};

// Midpoint-rule tile integrals for every tile of the oversampled region and
// every continuum. Throws a config error naming the tile when a continuum
// misses a tile, unless allow_empty is set (then the entry is skipped).
std::vector<TileMoment> tile_moments(const CoarsePartition& partition, const RegionSet& regions,
                                     const ContinuumMap& continua, bool allow_empty = false);

struct ScalarField
{
    FineGrid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const FineGrid& g, double v = 0.0) : grid(g), values(g.num_cells(), v) {}
    double& operator()(int i, int j) { return values[grid.cell(i, j)]; }
    double operator()(int i, int j) const { return values[grid.cell(i, j)]; }
};

// Normal velocities on all faces of the grid. x-faces are indexed
// j * (nx + 1) + i for the face at x = i h, y-faces i + j * nx for y = j h.
struct FaceField
{
    FineGrid grid;
    std::vector<double> x_faces;
    std::vector<double> y_faces;

    FaceField() = default;
    explicit FaceField(const FineGrid& g)
        : grid(g), x_faces(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0),
          y_faces(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0)
    {}
    double& xf(int i, int j) { return x_faces[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double& yf(int i, int j) { return y_faces[static_cast<std::size_t>(j) * grid.nx + i]; }
    double xf(int i, int j) const { return x_faces[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double yf(int i, int j) const { return y_faces[static_cast<std::size_t>(j) * grid.nx + i]; }
};

bool all_finite(const std::vector<double>& v);

} // namespace mchom
