#pragma once
// Storage and linear algebra for the positive-drift block W of the fluid
// generator: dense for small models, sparse (with sparse LU) for the large
// ones. Only left actions v*W and solves W x = b are needed downstream.

#include <memory>
#include <mutex>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace aoi {

// Value-like handle; copies share the underlying matrix and factorization.
class Subgenerator {
 public:
  Subgenerator() = default;
  explicit Subgenerator(Eigen::MatrixXd dense);
  explicit Subgenerator(Eigen::SparseMatrix<double> sparse);

  Eigen::Index size() const;
  bool is_dense() const;

  Eigen::RowVectorXd left_apply(const Eigen::RowVectorXd& v) const;  // v * W
  Eigen::VectorXd row_sums() const;
  const Eigen::VectorXd& diagonal() const;
  double coeff(Eigen::Index i, Eigen::Index j) const;

  // Solve W x = b. The factorization is built once on first use and shared
  // by all copies; concurrent callers are safe afterwards.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  void factorize() const;

  const Eigen::MatrixXd& dense() const;                 // throws if sparse
  const Eigen::SparseMatrix<double>& sparse() const;    // throws if dense

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace aoi
