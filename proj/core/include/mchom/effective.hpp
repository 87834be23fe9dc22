#pragma once

#include <mchom/cell_problems.hpp>
#include <mchom/grid.hpp>
#include <mchom/linear_solver.hpp>
#include <mchom/media.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace mchom {

// Index of the pair (continuum i, direction m) in gradient- and
// velocity-sized tensor dimensions.
inline int gi(int i, int m) { return 2 * i + m; }

// Zero-order coefficients of one block: phi_i = C_i psi_i / A.
struct ZeroOrderCoefficients
{
    BlockIndex block;
    std::vector<double> C;        // C_i
    std::vector<double> measure;  // integral of psi_i over the block
    Mat alpha;                    // alpha_ij = integral of A phi_i phi_j
    Vec b;                        // integral of f phi_j
};

// Elliptic tensors normalized by the measure of the integration region.
// Rows index the test function, columns the trial function:
//   B(n, m), B_i(n, gi(m,i)), B_bar(gi(n,k), m), B_ik(gi(n,k), gi(m,i)).
struct EllipticCoefficients
{
    Mat A, B, B_i, B_bar, B_ik;
    Vec b, b_k;
};

// Mixed tensors normalized by |R^I|. Rows index the test column, columns
// the trial column, with P_i -> i, L_im -> gi(i,m), W_ik -> gi(i,k):
//   alpha_u      (P_j, P_i)     alpha_u_m  (P_j, L_im)   alpha_u_bar (L_jl, P_i)
//   alpha_u_nm   (L_jl, L_im)   beta_u     (P_j, W_ik)   beta_u_m    (L_jl, W_ik)
//   alpha_v      (W_jk, P_i)    alpha_v_m  (W_jk, L_im)  beta_v      (W_jk, W_ik)
struct MixedCoefficients
{
    Mat alpha_u, alpha_u_m, alpha_u_bar, alpha_u_nm, beta_u, beta_u_m, alpha_v, alpha_v_m, beta_v;
    Vec f_u, f_u_l, f_v;
};

struct EffectiveCoefficients
{
    BlockIndex block;
    Formulation formulation = Formulation::mixed;
    int num_continua = 0;
    double measure = 0.0;  // |R| used for normalization
    EllipticCoefficients elliptic;
    MixedCoefficients mixed;
};

enum class IntegrationRegion { central, integration };

ZeroOrderCoefficients assemble_zero_order(const CoarsePartition& partition, const ContinuumMap& continua,
                                          const std::vector<double>& A, const std::vector<double>& f,
                                          BlockIndex block);
// Direct midpoint quadrature of the integral of A phi_i phi_j, for checks.
Mat zero_order_alpha_quadrature(const CoarsePartition& partition, const ContinuumMap& continua,
                                const std::vector<double>& A, const ZeroOrderCoefficients& z);

// Elliptic energy a_R(x, y) over the cells of `cells_region` (fine units)
// computed by polarization, so that a_R(x, y) == a_R(y, x) bitwise.
double elliptic_energy(const EllipticOperator& op, const MediumSpec& medium, const IndexRect& cells_region,
                       const Vec& x, const Vec& y);

EffectiveCoefficients assemble_elliptic(const CellSolutionSet& set, const MediumSpec& medium,
                                        const SourceSpec& source, const CoarsePartition& partition,
                                        IntegrationRegion region = IntegrationRegion::central);

// Mixed form a((v,u),(q,w)) = int q kappa^-1 v + int q . grad u - int v . grad w
// on the faces of R^I, each face weighted by half a cell per adjacent cell
// inside R^I. Boundary faces use the column's own pressure data.
double mixed_form(const CellSolutionSet& set, const CellColumn& trial, const CellColumn& test,
                  const std::vector<double>& face_weight);
std::vector<double> mixed_face_weights(const CellSolutionSet& set, const CoarsePartition& partition,
                                       const IndexRect& blocks);

// Tensors are averaged over `region`; the source terms f_u, f_u_l, f_v over
// `source_region`. The source is a macroscale field, so averaging it over
// R^I smooths it at the coarse scale; the central block keeps it local.
EffectiveCoefficients assemble_mixed(const CellSolutionSet& set, const MediumSpec& medium, const SourceSpec& source,
                                     const CoarsePartition& partition,
                                     IntegrationRegion region = IntegrationRegion::integration,
                                     IntegrationRegion source_region = IntegrationRegion::central);

// JSON export/import of per-block tensors.
void write_coefficients_json(std::ostream& os, const std::vector<EffectiveCoefficients>& blocks, int M);
std::vector<EffectiveCoefficients> read_coefficients_json(std::istream& is, int* M = nullptr);

} // namespace mchom
