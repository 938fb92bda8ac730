#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace procbox {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

Mat kron(const Mat& a, const Mat& b);
Mat kron_all(const std::vector<Mat>& ms);

// Haar-ish random unitary via QR of a Ginibre matrix with phase fix.
Mat random_unitary(int d, Rng& rng);
Mat random_isometry(int rows, int cols, Rng& rng);
Mat ginibre(int rows, int cols, Rng& rng);
// Random Kraus set of a CPTP map dim_in -> dim_out with the given Kraus rank.
std::vector<Mat> random_kraus(int dim_out, int dim_in, int rank, Rng& rng);

// Orthonormal basis of the column span (SVD, relative tolerance).
Mat orth(const Mat& a, double tol = 1e-10);
// Columns of q (orthonormal) extended to a full orthonormal basis of C^n using
// Gram-Schmidt over the standard basis in index order.
Mat complete_basis(const Mat& q, int n);
Mat pinv(const Mat& a, double tol = 1e-10);

double trace_distance(const Mat& a, const Mat& b);
double frob(const Mat& a);

std::vector<int> digits(std::int64_t idx, const std::vector<int>& dims);
std::int64_t flat_index(const std::vector<int>& digs, const std::vector<int>& dims);
std::int64_t product(const std::vector<int>& dims);

}  // namespace procbox
