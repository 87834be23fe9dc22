#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <string>

namespace mchom {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// General sparse LU (UMFPACK when available, Eigen::SparseLU otherwise).
// One factorization, any number of right-hand sides.
class SparseLU
{
public:
    SparseLU();
    ~SparseLU();
    SparseLU(SparseLU&&) noexcept;
    SparseLU& operator=(SparseLU&&) noexcept;

    // Throws a solver error tagged with `stage` when the matrix is singular.
    void factorize(const SpMat& A, const std::string& stage = "sparse_lu");
    Vec solve(const Vec& b) const;
    Mat solve(const Mat& B) const;
    static const char* backend();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string stage_;
};

// Sparse Cholesky for symmetric positive definite systems.
class SparseSPD
{
public:
    SparseSPD();
    ~SparseSPD();
    void factorize(const SpMat& A, const std::string& stage = "sparse_spd");
    Vec solve(const Vec& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string stage_;
};

} // namespace mchom
