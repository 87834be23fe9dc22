#include <mchom/linear_solver.hpp>

#include <mchom/error.hpp>

#include <Eigen/SparseCholesky>
#ifdef MCHOM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace mchom {

struct SparseLU::Impl
{
    // UmfPackLU keeps pointers into the factorized matrix; keep it alive.
    SpMat A;
#ifdef MCHOM_HAVE_UMFPACK
    Eigen::UmfPackLU<SpMat> lu;
#else
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
#endif
};

SparseLU::SparseLU() : impl_(std::make_unique<Impl>()) {}
SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

const char* SparseLU::backend()
{
#ifdef MCHOM_HAVE_UMFPACK
    return "umfpack";
#else
    return "eigen-sparselu";
#endif
}

void SparseLU::factorize(const SpMat& A, const std::string& stage)
{
    stage_ = stage;
    impl_->A = A;
    impl_->A.makeCompressed();
    impl_->lu.compute(impl_->A);
    if (impl_->lu.info() != Eigen::Success)
        solver_error(stage, "sparse LU factorization failed (singular or near-singular system of size "
                                + std::to_string(A.rows()) + ")");
}

Vec SparseLU::solve(const Vec& b) const
{
    Vec x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success || !x.allFinite())
        solver_error(stage_, "sparse LU solve failed");
    return x;
}

Mat SparseLU::solve(const Mat& B) const
{
    Mat X(B.rows(), B.cols());
    for (Eigen::Index c = 0; c < B.cols(); ++c)
        X.col(c) = solve(Vec(B.col(c)));
    return X;
}

struct SparseSPD::Impl
{
    Eigen::SimplicialLLT<SpMat> llt;
};

SparseSPD::SparseSPD() : impl_(std::make_unique<Impl>()) {}
SparseSPD::~SparseSPD() = default;

void SparseSPD::factorize(const SpMat& A, const std::string& stage)
{
    stage_ = stage;
    impl_->llt.compute(A);
    if (impl_->llt.info() != Eigen::Success)
        solver_error(stage, "Cholesky factorization failed (matrix not positive definite; check coefficient > 0)");
}

Vec SparseSPD::solve(const Vec& b) const
{
    Vec x = impl_->llt.solve(b);
    if (impl_->llt.info() != Eigen::Success || !x.allFinite())
        solver_error(stage_, "Cholesky solve failed");
    return x;
}

} // namespace mchom
