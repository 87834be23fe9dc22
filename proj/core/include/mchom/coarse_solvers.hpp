#pragma once

#include <mchom/effective.hpp>
#include <mchom/linear_solver.hpp>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace mchom {

// Per-block tensors of the generic macroscale weak form
//   sum_i  R_ji U_i Q_j + Cv_j(i,m) d_m U_i Q_j + T_(j,l)i U_i d_l Q_j
//        + D_(j,l)(i,m) d_m U_i d_l Q_j  =  s_j Q_j + sg_(j,l) d_l Q_j
// with (i,m) -> gi(i,m).
struct MacroBlock
{
    Mat R, Cv, T, D;
    Vec s, sg;
};

struct NeglectFlags
{
    bool alpha_v = false;     // drop alpha^v
    bool convection = false;  // drop alpha^u_m and alpha_bar^u (resp. B^i, B_bar)
};

struct MacroOptions
{
    NeglectFlags neglect;
    bool gradient_source = true;  // keep the source paired with test gradients
};

// Eliminates V per block: V = beta_v^-1 (f_v - alpha_v U - alpha_v_m grad U).
MacroBlock reduce_mixed(const MixedCoefficients& c, const MacroOptions& options);
MacroBlock elliptic_block(const EllipticCoefficients& c, const MacroOptions& options);

struct CoarseSolution
{
    int M = 0;
    int num_continua = 0;
    // Nodal values per continuum on the (M+1)^2 coarse nodes, node = b (M+1) + a.
    std::vector<Vec> U;
    // Mixed path: per block, per continuum, velocity (x, y).
    std::vector<std::vector<std::array<double, 2>>> V;
    double residual = 0.0;           // relative residual of the coarse system
    double elimination_residual = 0.0;  // max residual of the velocity equations
    MacroOptions options;
    std::string path;

    double block_mean(int continuum, int bx, int by) const;
    std::array<double, 2> block_gradient(int continuum, int bx, int by) const;
};

// Bilinear elements with 2x2 Gauss quadrature; U = 0 on the boundary.
CoarseSolution solve_macro(const std::vector<MacroBlock>& blocks, int M, int num_continua);

CoarseSolution solve_elliptic_macro(const std::vector<EffectiveCoefficients>& coeffs, int M,
                                    const MacroOptions& options = {});
CoarseSolution solve_mixed_macro(const std::vector<EffectiveCoefficients>& coeffs, int M,
                                 const MacroOptions& options = {});

// Per-block algebraic solve U_i = b_i / (C_i |psi_i|).
std::vector<std::vector<double>> solve_zero_order_macro(const std::vector<ZeroOrderCoefficients>& coeffs);

// "i j U_1 ... U_N" per block (block means), plus JSON metadata.
void write_coarse_table(std::ostream& os, const CoarseSolution& sol);
void write_coarse_metadata(std::ostream& os, const CoarseSolution& sol);

} // namespace mchom
