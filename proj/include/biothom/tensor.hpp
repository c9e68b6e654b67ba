#pragma once

#include <array>
#include <utility>

#include <Eigen/Dense>

namespace biothom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Point = std::array<double, 3>;

/// Number of independent components of a symmetric dim x dim matrix.
int mandel_size(int dim);

/// Index pair (i, j), i <= j, of the I-th Mandel basis element. Diagonal
/// entries come first, then (1,2),(0,2),(0,1) in 3D or (0,1) in 2D.
std::pair<int, int> mandel_pair(int dim, int index);

/// sym(e_j (x) e_k): the constant strain of the affine field y -> y_j e_k.
Matrix unit_strain(int dim, int j, int k);

double min_eigenvalue(const Matrix& symmetric);
bool is_spd(const Matrix& m, double tol = 0.0);

/// Dense fourth-rank tensor on R^dim, dim in {2, 3}.
class Tensor4 {
 public:
  Tensor4() : Tensor4(3) {}
  explicit Tensor4(int dim);

  static Tensor4 isotropic(int dim, double lambda, double mu);
  /// Inverse of to_mandel(); the result has both minor symmetries.
  static Tensor4 from_mandel(const Matrix& mandel);

  int dim() const { return dim_; }

  double& operator()(int i, int j, int k, int l) { return data_[offset(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[offset(i, j, k, l)]; }

  /// Orthonormal-basis matrix representation on symmetric matrices.
  Matrix to_mandel() const;

  /// (A : E)_ij = A_ijkl E_kl
  Matrix contract(const Matrix& strain) const;

  double minor_asymmetry() const;
  double major_asymmetry() const;
  double max_abs() const;
  double max_abs_diff(const Tensor4& other) const;

  /// Smallest eigenvalue of the quadratic form E -> (A E) : E on symmetric E.
  double coercivity() const;

 private:
  static constexpr int offset(int i, int j, int k, int l) { return ((i * 3 + j) * 3 + k) * 3 + l; }

  int dim_;
  std::array<double, 81> data_{};
};

}  // namespace biothom
