#ifndef SIRMC_CHECKS_HPP_
#define SIRMC_CHECKS_HPP_

// Property and oracle suites for the proximity operators and the spectral
// shrinkage. Each check takes the operator under test as a callable so a
// deliberately broken one can be fed in as a negative control.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sirmc/bench.hpp"
#include "sirmc/format.hpp"
#include "sirmc/prox.hpp"
#include "sirmc/spectral.hpp"

namespace sirmc {

using ProxFn = std::function<double(const Penalty&, double)>;

inline ProxFn library_prox() {
	return [](const Penalty& p, double x) { return prox_eval(p, x); };
}

struct CheckResult {
	std::string name;
	bool passed = true;
	double worst = 0.0; // largest observed error for the check's main metric
	std::string detail; // first failure, if any

	void fail(const std::string& what) {
		if (passed)
			detail = what;
		passed = false;
	}
};

/// The four built-in kinds at lambda with the bias-dominance boundary shapes.
inline std::vector<Penalty> boundary_penalties(double lambda = 1.0) {
	return {
		Penalty::soft_threshold(lambda),
		Penalty::how(lambda, std::sqrt(2.0) * lambda),
		Penalty::hoc(lambda, lambda),
		Penalty::hog(lambda, std::sqrt(3.0) / 2.0 * lambda),
	};
}

inline constexpr double kSlotOffset = 0.3819660112501051; // 2 - golden ratio

inline std::string label(const Penalty& p) { return std::string(kind_name(p.kind())); }

/// Brute-force Moreau minimization against the closed forms at `count`
/// points of [lo, hi]: argmin within one grid step of prox, minimum within
/// `value_tol` of the loss. The points sit at an irrational offset inside
/// each of `count` equal slots so they do not coincide with grid nodes.
inline CheckResult check_oracle_equivalence(const Penalty& p, int count, double lo, double hi,
                                            const ProxFn& prox = library_prox(), const OracleGrid& grid = {},
                                            double value_tol = 1e-4) {
	CheckResult res;
	res.name = "oracle-equivalence/" + label(p);
	const double reach = std::max(std::abs(lo), std::abs(hi));
	const ImplicitRegularizerTable table(p, reach + grid.margin * p.lambda(), grid);
	double worst_arg = 0.0, worst_val = 0.0;
	for (int i = 0; i < count; ++i) {
		const double x = lo + (i + kSlotOffset) * (hi - lo) / count;
		const MoreauResult mr = moreau_argmin_oracle(table, x);
		const double darg = std::abs(mr.argmin - prox(p, x));
		const double dval = std::abs(mr.minval - loss_eval(p, x));
		worst_arg = std::max(worst_arg, darg / table.step());
		worst_val = std::max(worst_val, dval);
		if (darg > table.step() * (1.0 + 1e-9))
			res.fail("x = " + format_double(x) + ": argmin " + format_double(mr.argmin) + " vs prox " +
			         format_double(prox(p, x)));
		if (dval > value_tol)
			res.fail("x = " + format_double(x) + ": min value off by " + format_double(dval));
	}
	res.worst = std::max(worst_arg * table.step(), worst_val);
	if (res.passed)
		res.detail = "max |argmin-prox|/step = " + format_double(worst_arg) + ", max |min-loss| = " +
		             format_double(worst_val);
	return res;
}

/// Central differences of the loss against x - prox(x) on `count` points of
/// [-5 lambda, 5 lambda] kept `exclusion` away from +-lambda.
inline CheckResult check_gradient_identity(const Penalty& p, int count, const ProxFn& prox = library_prox(),
                                           double fd_step = 1e-4, double tol = 1e-5, double exclusion = 1e-3) {
	CheckResult res;
	res.name = "moreau-gradient/" + label(p);
	const double l = p.lambda();
	for (int i = 0; i < count; ++i) {
		double x = -5.0 * l + (i + 0.5) * 10.0 * l / count;
		if (std::abs(std::abs(x) - l) < exclusion)
			x += std::copysign(2.0 * exclusion, x);
		const double fd = (loss_eval(p, x + fd_step) - loss_eval(p, x - fd_step)) / (2.0 * fd_step);
		const double err = std::abs(fd - (x - prox(p, x)));
		res.worst = std::max(res.worst, err);
		if (err > tol)
			res.fail("x = " + format_double(x) + ": |phi' - (x - P)| = " + format_double(err));
	}
	if (res.passed)
		res.detail = "max error " + format_double(res.worst);
	return res;
}

/// Oddness, monotonicity, exact thresholding and bias dominance on `count`
/// grid points of [-10 lambda, 10 lambda].
inline CheckResult check_sir_properties(const Penalty& p, int count, const ProxFn& prox = library_prox()) {
	CheckResult res;
	res.name = "sir-properties/" + label(p);
	const double l = p.lambda();
	const Penalty soft = Penalty::soft_threshold(l);
	double prev_x = 0.0, prev_p = -std::numeric_limits<double>::infinity();
	double prev_bias = std::numeric_limits<double>::infinity();
	for (int i = 0; i <= count; ++i) {
		const double x = -10.0 * l + 20.0 * l * i / count;
		const double px = prox(p, x);
		if (prox(p, -x) != -px)
			res.fail("oddness fails at x = " + format_double(x));
		if (px < prev_p)
			res.fail("decreasing between " + format_double(prev_x) + " and " + format_double(x));
		if ((px == 0.0) != (std::abs(x) <= l))
			res.fail("threshold set wrong at x = " + format_double(x));
		if (x >= l) {
			const double b = bias(p, x);
			if (b > l)
				res.fail("bias " + format_double(b) + " exceeds lambda at x = " + format_double(x));
			if (b > prev_bias)
				res.fail("bias increases at x = " + format_double(x));
			prev_bias = b;
			if (px < prox_eval(soft, x))
				res.fail("shrinks more than soft threshold at x = " + format_double(x));
		}
		prev_x = x;
		prev_p = px;
	}
	if (bias(p, l) != l)
		res.fail("bias(lambda) != lambda");
	if (res.passed)
		res.detail = std::to_string(count + 1) + " points";
	return res;
}

namespace detail {

inline Matrix gaussian_matrix(Eigen::Index m, Eigen::Index n, CounterRng& rng) {
	std::normal_distribution<double> normal(0.0, 1.0);
	Matrix A(m, n);
	for (Eigen::Index i = 0; i < A.size(); ++i)
		A.data()[i] = normal(rng);
	return A;
}

/// Haar-distributed orthogonal matrix from the QR of a Gaussian matrix.
inline Matrix random_orthogonal(Eigen::Index n, CounterRng& rng) {
	const Matrix A = gaussian_matrix(n, n, rng);
	Eigen::HouseholderQR<Matrix> qr(A);
	Matrix Q = qr.householderQ();
	const Matrix R = qr.matrixQR();
	for (Eigen::Index j = 0; j < n; ++j)
		if (R(j, j) < 0.0)
			Q.col(j) *= -1.0;
	return Q;
}

} // namespace detail

/// Unitary invariance and spectrum contract of the shrinkage on `trials`
/// random m x n matrices. Singular values are referenced through Eigen's
/// Jacobi SVD, independent of the shrinkage's own SVD.
inline CheckResult check_spectral(const Penalty& p, int trials, int m, int n, std::uint64_t seed,
                                  const ProxFn& prox = library_prox(), double tol = 1e-8) {
	CheckResult res;
	res.name = "spectral/" + label(p);
	auto shrink = [&](const Matrix& D) {
		return shrink_singular_values_with(D, [&](double s) { return prox(p, s); });
	};
	for (int t = 0; t < trials; ++t) {
		CounterRng rng(CounterRng::stream_key(seed, static_cast<std::uint64_t>(p.kind()), t));
		// entries of size ~1/sqrt(n) put the spectrum around the threshold
		const Matrix D = detail::gaussian_matrix(m, n, rng) * (3.0 * p.lambda() / std::sqrt(static_cast<double>(n)));
		const Matrix Q1 = detail::random_orthogonal(m, rng);
		const Matrix Q2 = detail::random_orthogonal(n, rng);
		const Matrix out = shrink(D);
		const double inv = (shrink(Q1 * D * Q2.transpose()) - Q1 * out * Q2.transpose()).cwiseAbs().maxCoeff();

		const Vector s_in = Eigen::JacobiSVD<Matrix>(D).singularValues();
		const Vector s_out = Eigen::JacobiSVD<Matrix>(out).singularValues();
		std::vector<double> expected(static_cast<std::size_t>(s_in.size()));
		for (Eigen::Index i = 0; i < s_in.size(); ++i)
			expected[static_cast<std::size_t>(i)] = prox_eval(p, s_in(i));
		std::sort(expected.begin(), expected.end(), std::greater<>());
		double spec = 0.0;
		for (Eigen::Index i = 0; i < s_out.size(); ++i)
			spec = std::max(spec, std::abs(s_out(i) - expected[static_cast<std::size_t>(i)]));

		res.worst = std::max({res.worst, inv, spec});
		if (inv > tol)
			res.fail("trial " + std::to_string(t) + ": unitary invariance error " + format_double(inv));
		if (spec > tol)
			res.fail("trial " + std::to_string(t) + ": spectrum error " + format_double(spec));
	}
	if (res.passed)
		res.detail = "max error " + format_double(res.worst);
	return res;
}

} // namespace sirmc

#endif // SIRMC_CHECKS_HPP_
