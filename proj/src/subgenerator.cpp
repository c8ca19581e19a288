#include "aoi/subgenerator.hpp"

#include <stdexcept>

namespace aoi {

struct Subgenerator::Impl {
  Eigen::Index size = 0;
  Eigen::MatrixXd dense;
  Eigen::SparseMatrix<double> sparse;
  bool is_dense = false;
  Eigen::VectorXd diag;

  std::once_flag factor_once;
  std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> sparse_lu;
};

Subgenerator::Subgenerator(Eigen::MatrixXd dense) : impl_(std::make_shared<Impl>()) {
  if (dense.rows() != dense.cols()) throw std::invalid_argument("Subgenerator: square matrix required");
  impl_->size = dense.rows();
  impl_->is_dense = true;
  impl_->diag = dense.diagonal();
  impl_->dense = std::move(dense);
}

Subgenerator::Subgenerator(Eigen::SparseMatrix<double> sparse) : impl_(std::make_shared<Impl>()) {
  if (sparse.rows() != sparse.cols()) throw std::invalid_argument("Subgenerator: square matrix required");
  sparse.makeCompressed();
  impl_->size = sparse.rows();
  impl_->is_dense = false;
  impl_->diag = sparse.diagonal();
  impl_->sparse = std::move(sparse);
}

Eigen::Index Subgenerator::size() const { return impl_ ? impl_->size : 0; }
bool Subgenerator::is_dense() const { return impl_ && impl_->is_dense; }
const Eigen::VectorXd& Subgenerator::diagonal() const { return impl_->diag; }

Eigen::RowVectorXd Subgenerator::left_apply(const Eigen::RowVectorXd& v) const {
  if (impl_->is_dense) return v * impl_->dense;
  return v * impl_->sparse;
}

Eigen::VectorXd Subgenerator::row_sums() const {
  if (impl_->is_dense) return impl_->dense.rowwise().sum();
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(impl_->size);
  return impl_->sparse * ones;
}

double Subgenerator::coeff(Eigen::Index i, Eigen::Index j) const {
  if (impl_->is_dense) return impl_->dense(i, j);
  return impl_->sparse.coeff(i, j);
}

void Subgenerator::factorize() const {
  std::call_once(impl_->factor_once, [this] {
    if (impl_->is_dense) {
      impl_->dense_lu = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(impl_->dense);
    } else {
      auto lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      lu->analyzePattern(impl_->sparse);
      lu->factorize(impl_->sparse);
      if (lu->info() != Eigen::Success) {
        throw std::runtime_error("Subgenerator: sparse LU factorization failed");
      }
      impl_->sparse_lu = std::move(lu);
    }
  });
}

Eigen::VectorXd Subgenerator::solve(const Eigen::VectorXd& b) const {
  factorize();
  Eigen::VectorXd x;
  if (impl_->is_dense) {
    x = impl_->dense_lu->solve(b);
    x += impl_->dense_lu->solve(b - impl_->dense * x);  // one refinement step
  } else {
    x = impl_->sparse_lu->solve(b);
    x += impl_->sparse_lu->solve(b - impl_->sparse * x);
  }
  if (!x.allFinite()) throw std::runtime_error("Subgenerator: solve produced non-finite values");
  return x;
}

const Eigen::MatrixXd& Subgenerator::dense() const {
  if (!impl_->is_dense) throw std::logic_error("Subgenerator: stored sparse");
  return impl_->dense;
}

const Eigen::SparseMatrix<double>& Subgenerator::sparse() const {
  if (impl_->is_dense) throw std::logic_error("Subgenerator: stored dense");
  return impl_->sparse;
}

}  // namespace aoi
