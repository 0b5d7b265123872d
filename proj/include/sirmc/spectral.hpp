#ifndef SIRMC_SPECTRAL_HPP_
#define SIRMC_SPECTRAL_HPP_

#include <algorithm>
#include <string>

#include <Eigen/Dense>

#include "sirmc/error.hpp"
#include "sirmc/prox.hpp"

namespace sirmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD D = U diag(S) V^T with k = min(m, n) columns and S nonincreasing.
struct SvdTriplet {
	Matrix U;
	Vector S;
	Matrix V;
};

inline bool all_finite(const Matrix& A) { return A.allFinite(); }

/// Divide-and-conquer SVD (Eigen BDCSVD). Single-threaded and deterministic.
inline SvdTriplet thin_svd(const Matrix& D) {
	if (D.size() == 0)
		return {Matrix(D.rows(), 0), Vector(0), Matrix(D.cols(), 0)};
	Eigen::BDCSVD<Matrix> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
	if (svd.info() != Eigen::Success)
		throw Error(Errc::SvdFailure, "BDCSVD did not converge");
	return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// U diag(f(S)) V^T for an arbitrary nonnegative scalar map f. Columns whose
/// mapped value is zero are skipped in the product.
template <class ScalarMap>
Matrix shrink_singular_values_with(const Matrix& D, ScalarMap&& f) {
	if (!all_finite(D))
		throw Error(Errc::NonFiniteInput, "matrix contains non-finite entries");
	const SvdTriplet svd = thin_svd(D);
	const Eigen::Index k = svd.S.size();
	Vector shrunk(k);
	Eigen::Index rank = 0;
	for (Eigen::Index i = 0; i < k; ++i) {
		shrunk(i) = f(svd.S(i));
		if (shrunk(i) != 0.0)
			rank = i + 1;
	}
	if (rank == 0)
		return Matrix::Zero(D.rows(), D.cols());
	return svd.U.leftCols(rank) * shrunk.head(rank).asDiagonal() * svd.V.leftCols(rank).transpose();
}

/// Generalized singular-value shrinkage: the penalty's proximity operator
/// applied to every singular value of D.
inline Matrix shrink_singular_values(const Matrix& D, const Penalty& penalty) {
	validate(penalty, false);
	return shrink_singular_values_with(D, [&penalty](double s) { return prox_eval(penalty, s); });
}

} // namespace sirmc

#endif // SIRMC_SPECTRAL_HPP_
