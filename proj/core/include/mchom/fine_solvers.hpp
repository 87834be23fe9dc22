#pragma once

#include <mchom/grid.hpp>
#include <mchom/linear_solver.hpp>
#include <mchom/media.hpp>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace mchom {

// Which sides of the region carry the zero Dirichlet condition; the others
// are natural (zero flux).
enum class DirichletSides { all, x_only };

// Bilinear finite elements on a rectangle of fine cells. Nodes are numbered
// b * nnx + a with a along x.
struct EllipticOperator
{
    IndexRect region;  // fine-cell units
    double h = 0.0;
    int nnx = 0;
    int nny = 0;
    SpMat stiffness;               // all nodes, no boundary condition applied
    std::vector<char> dirichlet;   // per node

    int num_nodes() const { return nnx * nny; }
    int node(int a, int b) const { return b * nnx + a; }
    // Lower-left node of local cell (ci, cj).
    int cell_node(int ci, int cj) const { return node(ci, cj); }
};

EllipticOperator build_elliptic_operator(const MediumSpec& medium, const IndexRect& region,
                                         DirichletSides sides = DirichletSides::all);

// Element stiffness of a unit-coefficient bilinear square, nodes ordered
// (0,0), (1,0), (0,1), (1,1).
const double (&q1_stiffness())[4][4];

// Two-point flux face of a mixed operator. lo/hi are local cell indices or
// -1 outside the region.
struct MixedFace
{
    int lo = -1;
    int hi = -1;
    int dir = 0;         // 0: normal along x, 1: along y
    double weight = 1;   // 1 interior, 1/2 boundary (half dual volume)
    double kappa = 1;    // harmonic mean inside, adjacent cell value on the boundary
    double x = 0, y = 0; // face centre
    bool boundary() const { return lo < 0 || hi < 0; }
    int inner() const { return lo < 0 ? hi : lo; }
    // +1 when the outside lies on the high side of the face.
    double side() const { return hi < 0 ? 1.0 : -1.0; }
};

enum class MixedBoundary { dirichlet, zero_flux };

// Face fluxes and cell pressures on a rectangle of fine cells. Rows:
//   w h^2 kappa_f^-1 v_f + h (u_hi - u_lo) = boundary data   (momentum)
//   -G^T v = integral of the source                           (mass)
// Cells are numbered cj * ncx + ci.
struct MixedOperator
{
    IndexRect region;
    double h = 0.0;
    int ncx = 0;
    int ncy = 0;
    MixedBoundary boundary = MixedBoundary::dirichlet;
    std::vector<MixedFace> faces;  // interior faces first
    int num_interior = 0;
    Vec mass;  // diagonal of the momentum block
    SpMat G;   // faces x cells

    int num_faces() const { return static_cast<int>(faces.size()); }
    int num_cells() const { return ncx * ncy; }
    int local_cell(int ci, int cj) const { return cj * ncx + ci; }
    // Saddle matrix [M G; -G^T 0].
    SpMat system() const;
    // Momentum right-hand side for pressure data u_b on the boundary faces
    // (one value per boundary face, in face order).
    Vec boundary_rhs(const std::vector<double>& ub) const;
    // Face gradient of a cell field, with boundary data on Dirichlet faces.
    Vec face_gradient(const Vec& u, const std::vector<double>* ub) const;
};

MixedOperator build_mixed_operator(const MediumSpec& medium, const IndexRect& region, MixedBoundary boundary);

struct FineSolution
{
    IndexRect region;
    ScalarField u;                 // cell values (averages of nodal values for elliptic)
    std::vector<double> nodal;     // elliptic only
    FaceField v;                   // mixed only
    double residual = 0.0;         // relative residual of the discrete system
};

FineSolution solve_elliptic_fine(const MediumSpec& medium, const SourceSpec& source, const IndexRect& region,
                                 DirichletSides sides = DirichletSides::all);
FineSolution solve_elliptic_fine(const MediumSpec& medium, const SourceSpec& source);

FineSolution solve_mixed_fine(const MediumSpec& medium, const SourceSpec& source, const IndexRect& region);
FineSolution solve_mixed_fine(const MediumSpec& medium, const SourceSpec& source);

// Pointwise u = f / A.
ScalarField solve_zero_order_fine(const ScalarField& A, const std::vector<double>& f);

// Cell-centre velocity from face fluxes (mean of opposite faces).
std::vector<std::array<double, 2>> cell_velocity(const FaceField& v);

// Plain-text dumps: "x y value" and "x y vx vy" per cell.
void write_scalar_field(std::ostream& os, const ScalarField& u);
void write_vector_field(std::ostream& os, const FaceField& v);
void write_scalar_field_file(const std::string& path, const ScalarField& u);
void write_vector_field_file(const std::string& path, const FaceField& v);

} // namespace mchom
