#ifndef SIRMC_PROX_HPP_
#define SIRMC_PROX_HPP_

// Sparsity-inducing regularizers generated from the hybrid loss family
//
//   phi(x) = x^2/2              for |x| <= lambda
//          = a*h(|x|) + b       for |x| >  lambda
//
// with a, b fixed by C1 matching at |x| = lambda. The regularizer itself has
// no closed form; what is closed-form is its proximity operator
//
//   P(x) = max{0, |x| - a*h'(|x|)} * sign(x)
//
// and its Moreau envelope, which equals phi. The oracle functions at the end
// of this header rebuild the regularizer numerically from phi so the closed
// forms can be checked independently.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sirmc/error.hpp"

namespace sirmc {

enum class PenaltyKind { SoftThreshold, HOW, HOC, HOG, Generic };

inline constexpr std::string_view kind_name(PenaltyKind k) noexcept {
	switch (k) {
	case PenaltyKind::SoftThreshold: return "soft";
	case PenaltyKind::HOW: return "how";
	case PenaltyKind::HOC: return "hoc";
	case PenaltyKind::HOG: return "hog";
	case PenaltyKind::Generic: return "generic";
	}
	return "unknown";
}

/// Largest shape/lambda ratio for which the penalty's bias never exceeds the
/// soft-threshold bias: sqrt(2) for HOW, 1 for HOC, sqrt(3)/2 for HOG.
/// Returns infinity for kinds without a shape parameter.
inline double max_shape_ratio(PenaltyKind k) noexcept {
	switch (k) {
	case PenaltyKind::HOW: return std::sqrt(2.0);
	case PenaltyKind::HOC: return 1.0;
	case PenaltyKind::HOG: return std::sqrt(3.0) / 2.0;
	default: return std::numeric_limits<double>::infinity();
	}
}

/// The tail generator h of the loss family. `h_second` may be left empty;
/// concavity is then certified from divided differences of `h_prime`.
struct GeneratorFunction {
	std::function<double(double)> h;
	std::function<double(double)> h_prime;
	std::function<double(double)> h_second;
};

struct ContinuityConstants {
	double a;
	double b;
};

/// a = lambda / h'(lambda), b = lambda^2/2 - a*h(lambda).
inline ContinuityConstants continuity_constants(const GeneratorFunction& g, double lambda) {
	if (!(lambda > 0.0) || !std::isfinite(lambda))
		throw Error(Errc::NonPositiveParameter, "lambda must be positive and finite");
	if (!g.h || !g.h_prime)
		throw Error(Errc::InvalidConfig, "generator requires h and h'");
	const double dh = g.h_prime(lambda);
	if (dh == 0.0 || !std::isfinite(dh))
		throw Error(Errc::ZeroDerivativeAtThreshold, "h'(lambda) is zero or non-finite");
	const double a = lambda / dh;
	return {a, 0.5 * lambda * lambda - a * g.h(lambda)};
}

// Generators reproducing the built-in kinds, plus the linear one that turns
// the family into the Huber function.

inline GeneratorFunction welsch_generator(double sigma) {
	const double s2 = sigma * sigma;
	return {
		[s2](double x) { return 1.0 - std::exp(-x * x / s2); },
		[s2](double x) { return 2.0 * x / s2 * std::exp(-x * x / s2); },
		[s2](double x) { return 2.0 / s2 * (1.0 - 2.0 * x * x / s2) * std::exp(-x * x / s2); },
	};
}

inline GeneratorFunction cauchy_generator(double gamma) {
	const double g2 = gamma * gamma;
	return {
		[g2](double x) { return std::log1p(x * x / g2); },
		[g2](double x) { return 2.0 * x / (g2 + x * x); },
		[g2](double x) { return 2.0 * (g2 - x * x) / ((g2 + x * x) * (g2 + x * x)); },
	};
}

inline GeneratorFunction gmc_generator(double tau) {
	const double c = 4.0 * tau * tau;
	return {
		[c](double x) { return x * x / (x * x + c); },
		[c](double x) { return 2.0 * c * x / ((x * x + c) * (x * x + c)); },
		[c](double x) {
			const double d = x * x + c;
			return 2.0 * c * (c - 3.0 * x * x) / (d * d * d);
		},
	};
}

inline GeneratorFunction linear_generator() {
	return {
		[](double x) { return x; },
		[](double) { return 1.0; },
		[](double) { return 0.0; },
	};
}

/// One member of the regularizer family. Immutable once built; copies share
/// the generator of a Generic penalty.
class Penalty {
public:
	static Penalty soft_threshold(double lambda) {
		return Penalty(PenaltyKind::SoftThreshold, lambda, 0.0, nullptr);
	}
	static Penalty how(double lambda, double sigma) {
		return Penalty(PenaltyKind::HOW, lambda, sigma, nullptr);
	}
	static Penalty hoc(double lambda, double gamma) {
		return Penalty(PenaltyKind::HOC, lambda, gamma, nullptr);
	}
	static Penalty hog(double lambda, double tau) {
		return Penalty(PenaltyKind::HOG, lambda, tau, nullptr);
	}
	static Penalty generic(double lambda, GeneratorFunction g) {
		return Penalty(PenaltyKind::Generic, lambda, 0.0,
		               std::make_shared<const GeneratorFunction>(std::move(g)));
	}
	/// Built-in kind with shape = ratio * lambda.
	static Penalty with_ratio(PenaltyKind kind, double lambda, double ratio) {
		if (kind == PenaltyKind::Generic)
			throw Error(Errc::InvalidConfig, "generic penalties need a generator");
		return Penalty(kind, lambda, kind == PenaltyKind::SoftThreshold ? 0.0 : ratio * lambda, nullptr);
	}

	PenaltyKind kind() const noexcept { return kind_; }
	double lambda() const noexcept { return lambda_; }
	double shape() const noexcept { return shape_; }
	const GeneratorFunction* generator() const noexcept { return gen_.get(); }
	/// Continuity constants of the tail branch. Not meaningful for SoftThreshold.
	const ContinuityConstants& constants() const noexcept { return constants_; }

	/// Shrinkage s(t) = a*h'(t) applied to a magnitude t > lambda.
	double shrinkage(double t) const {
		switch (kind_) {
		case PenaltyKind::SoftThreshold: return lambda_;
		case PenaltyKind::HOW: {
			const double s2 = shape_ * shape_;
			return t * std::exp((lambda_ * lambda_ - t * t) / s2);
		}
		case PenaltyKind::HOC: {
			const double g2 = shape_ * shape_;
			return (g2 + lambda_ * lambda_) * t / (g2 + t * t);
		}
		case PenaltyKind::HOG: {
			const double c = 4.0 * shape_ * shape_;
			const double num = lambda_ * lambda_ + c;
			const double den = t * t + c;
			return num * num * t / (den * den);
		}
		case PenaltyKind::Generic: return constants_.a * gen_->h_prime(t);
		}
		return 0.0;
	}

	/// Tail branch a*h(t) + b for t > lambda.
	double tail(double t) const {
		const double l2 = lambda_ * lambda_;
		switch (kind_) {
		case PenaltyKind::SoftThreshold: return lambda_ * t - 0.5 * l2;
		case PenaltyKind::HOW: {
			const double s2 = shape_ * shape_;
			return 0.5 * s2 * -std::expm1((l2 - t * t) / s2) + 0.5 * l2;
		}
		case PenaltyKind::HOC: {
			const double g2 = shape_ * shape_;
			return 0.5 * (g2 + l2) * (std::log1p(t * t / g2) - std::log1p(l2 / g2)) + 0.5 * l2;
		}
		case PenaltyKind::HOG: {
			const double c = 4.0 * shape_ * shape_;
			const double num = l2 + c;
			return num * num * t * t / (2.0 * c * (t * t + c)) - l2 * l2 / (2.0 * c);
		}
		case PenaltyKind::Generic: return constants_.a * gen_->h(t) + constants_.b;
		}
		return 0.0;
	}

private:
	Penalty(PenaltyKind kind, double lambda, double shape, std::shared_ptr<const GeneratorFunction> gen)
		: kind_(kind), lambda_(lambda), shape_(shape), gen_(std::move(gen)), constants_{1.0, 0.0} {
		const double l2 = lambda * lambda;
		switch (kind_) {
		case PenaltyKind::SoftThreshold: constants_ = {lambda, -0.5 * l2}; break;
		case PenaltyKind::HOW:
			constants_ = {0.5 * shape * shape * std::exp(l2 / (shape * shape)),
			              0.5 * l2 - 0.5 * shape * shape * std::expm1(l2 / (shape * shape))};
			break;
		case PenaltyKind::HOC: {
			const double a = 0.5 * (shape * shape + l2);
			constants_ = {a, 0.5 * l2 - a * std::log1p(l2 / (shape * shape))};
			break;
		}
		case PenaltyKind::HOG: {
			const double c = 4.0 * shape * shape;
			constants_ = {(l2 + c) * (l2 + c) / (2.0 * c), -l2 * l2 / (2.0 * c)};
			break;
		}
		case PenaltyKind::Generic:
			if (!gen_ || !gen_->h || !gen_->h_prime)
				throw Error(Errc::InvalidConfig, "generator requires h and h'");
			if (lambda > 0.0 && std::isfinite(lambda))
				constants_ = continuity_constants(*gen_, lambda);
			break;
		}
	}

	PenaltyKind kind_;
	double lambda_;
	double shape_;
	std::shared_ptr<const GeneratorFunction> gen_;
	ContinuityConstants constants_;
};

namespace detail {

// Sample grid on (lambda, 20*lambda] used to certify generic generators.
inline std::vector<double> certification_grid(double lambda, std::size_t n = 4000) {
	std::vector<double> xs(n);
	for (std::size_t i = 0; i < n; ++i)
		xs[i] = lambda * (1.0 + 19.0 * static_cast<double>(i + 1) / static_cast<double>(n));
	return xs;
}

} // namespace detail

/// Checks parameters. In strict mode the shape must also satisfy the
/// bias-dominance bound of its kind (for Generic: a*h'' <= 0 past lambda).
/// The convexity of g = x^2/2 - phi is always certified for Generic penalties.
inline void validate(const Penalty& p, bool strict = true) {
	if (!(p.lambda() > 0.0) || !std::isfinite(p.lambda()))
		throw Error(Errc::NonPositiveParameter, "lambda must be positive and finite");
	const PenaltyKind k = p.kind();
	if (k == PenaltyKind::HOW || k == PenaltyKind::HOC || k == PenaltyKind::HOG) {
		if (!(p.shape() > 0.0) || !std::isfinite(p.shape()))
			throw Error(Errc::NonPositiveParameter, "shape must be positive and finite");
		const double bound = max_shape_ratio(k) * p.lambda();
		if (strict && p.shape() > bound * (1.0 + 1e-12))
			throw Error(Errc::BiasConstraintViolated,
			            std::string(kind_name(k)) + " shape " + std::to_string(p.shape()) +
			                " exceeds " + std::to_string(bound));
	}
	if (k != PenaltyKind::Generic)
		return;

	const GeneratorFunction& g = *p.generator();
	const double a = p.constants().a;
	const auto xs = detail::certification_grid(p.lambda());
	double prev = 0.0;
	for (double x : xs) {
		const double dg = std::max(0.0, x - a * g.h_prime(x));
		if (!std::isfinite(dg))
			throw Error(Errc::NonConvexGenerator, "g' is not finite at " + std::to_string(x));
		if (dg < prev - 1e-12 * std::max(1.0, std::abs(prev)))
			throw Error(Errc::NonConvexGenerator, "g' decreases near x = " + std::to_string(x));
		prev = dg;
	}
	if (!strict)
		return;
	if (g.h_second) {
		for (double x : xs)
			if (a * g.h_second(x) > 0.0)
				throw Error(Errc::BiasConstraintViolated, "a*h'' > 0 at x = " + std::to_string(x));
	} else {
		double prev_s = a * g.h_prime(p.lambda());
		for (double x : xs) {
			const double s = a * g.h_prime(x);
			if (s > prev_s + 1e-12 * std::max(1.0, std::abs(prev_s)))
				throw Error(Errc::BiasConstraintViolated, "shrinkage increases near x = " + std::to_string(x));
			prev_s = s;
		}
	}
}

/// Loss phi(x). Quadratic on |x| <= lambda (the boundary included).
inline double loss_eval(const Penalty& p, double x) {
	const double t = std::abs(x);
	if (t <= p.lambda())
		return 0.5 * x * x;
	return p.tail(t);
}

/// Proximity operator max{0, |x| - s(|x|)} * sign(x); exactly 0 on |x| <= lambda.
inline double prox_eval(const Penalty& p, double x) {
	const double t = std::abs(x);
	if (t <= p.lambda())
		return 0.0;
	const double y = std::max(0.0, t - p.shrinkage(t));
	return std::copysign(y, x);
}

/// x - prox(x) for x >= lambda. Returned as min{x, s(x)}, which is the same
/// quantity without the cancellation in x - (x - s(x)).
inline double bias(const Penalty& p, double x) {
	if (!(x >= p.lambda()))
		throw Error(Errc::DomainError, "bias is defined for x >= lambda");
	if (x == p.lambda())
		return x;
	return std::min(x, p.shrinkage(x));
}

/// Uniform oracle grid {k * step} clipped to |v| <= |centre| + margin * lambda.
/// step == 0 selects the default lambda/200.
struct OracleGrid {
	double step = 0.0;
	double margin = 10.0;
};

namespace detail {

inline double resolve_step(const Penalty& p, const OracleGrid& grid) {
	const double step = grid.step == 0.0 ? p.lambda() / 200.0 : grid.step;
	if (!(step > 0.0) || !std::isfinite(step))
		throw Error(Errc::GridTooCoarse, "grid step must be positive");
	if (step > p.lambda() / 100.0 * (1.0 + 1e-12))
		throw Error(Errc::GridTooCoarse, "grid step exceeds lambda/100");
	if (!(grid.margin >= 10.0))
		throw Error(Errc::GridTooCoarse, "grid margin must cover at least 10 lambda");
	return step;
}

inline long half_count(double extent, double step) {
	return static_cast<long>(std::floor(extent / step + 1e-9));
}

} // namespace detail

/// Brute-force reconstruction of the regularizer from the loss:
///   R(y) = max_x phi(x)/lambda - (x - y)^2 / (2 lambda)
/// tabulated on grid points y_j = j*step for |y_j| <= y_extent. The loss is
/// evaluated once on the widest grid needed and shared by every row.
class ImplicitRegularizerTable {
public:
	ImplicitRegularizerTable(const Penalty& p, double y_extent, const OracleGrid& grid = {})
		: lambda_(p.lambda()), margin_(grid.margin) {
		validate(p, false);
		step_ = detail::resolve_step(p, grid);
		y_half_ = detail::half_count(std::abs(y_extent), step_);
		const long x_half = detail::half_count(y_half_ * step_ + margin_ * lambda_, step_) + 1;
		x_half_ = x_half;
		loss_.resize(static_cast<std::size_t>(2 * x_half + 1));
		for (long k = -x_half; k <= x_half; ++k)
			loss_[static_cast<std::size_t>(k + x_half)] = loss_eval(p, static_cast<double>(k) * step_);
		values_.resize(static_cast<std::size_t>(2 * y_half_ + 1));
		for (long j = -y_half_; j <= y_half_; ++j)
			values_[static_cast<std::size_t>(j + y_half_)] = evaluate(static_cast<double>(j) * step_);
	}

	double step() const noexcept { return step_; }
	double lambda() const noexcept { return lambda_; }
	double margin() const noexcept { return margin_; }
	long half_count() const noexcept { return y_half_; }
	double y_at(long j) const noexcept { return static_cast<double>(j) * step_; }
	/// R at grid index j, |j| <= half_count().
	double at(long j) const { return values_.at(static_cast<std::size_t>(j + y_half_)); }

	/// Grid maximum of the maximand for an arbitrary y within the tabulated
	/// loss range.
	double evaluate(double y) const {
		const long lim = detail::half_count(std::abs(y) + margin_ * lambda_, step_);
		if (lim > x_half_)
			throw Error(Errc::DomainError, "y outside the tabulated range");
		double best = -std::numeric_limits<double>::infinity();
		for (long k = -lim; k <= lim; ++k) {
			const double x = static_cast<double>(k) * step_;
			const double d = x - y;
			const double v = loss_[static_cast<std::size_t>(k + x_half_)] - 0.5 * d * d;
			best = std::max(best, v);
		}
		return best / lambda_;
	}

private:
	double lambda_;
	double margin_;
	double step_ = 0.0;
	long y_half_ = 0;
	long x_half_ = 0;
	std::vector<double> loss_;
	std::vector<double> values_;
};

/// Single-point regularizer value by brute force over the x grid.
inline double implicit_regularizer(const Penalty& p, double y, const OracleGrid& grid = {}) {
	validate(p, false);
	const double step = detail::resolve_step(p, grid);
	const long lim = detail::half_count(std::abs(y) + grid.margin * p.lambda(), step);
	double best = -std::numeric_limits<double>::infinity();
	for (long k = -lim; k <= lim; ++k) {
		const double x = static_cast<double>(k) * step;
		const double d = x - y;
		best = std::max(best, loss_eval(p, x) - 0.5 * d * d);
	}
	return best / p.lambda();
}

struct MoreauResult {
	double argmin;
	double minval;
};

/// Brute-force minimization of (x - y)^2/2 + lambda*R(y) over the y grid,
/// using a prebuilt table. First minimizer wins ties.
inline MoreauResult moreau_argmin_oracle(const ImplicitRegularizerTable& table, double x) {
	const double lambda = table.lambda();
	const long lim = detail::half_count(std::abs(x) + table.margin() * lambda, table.step());
	if (lim > table.half_count())
		throw Error(Errc::DomainError, "x outside the tabulated range");
	MoreauResult best{0.0, std::numeric_limits<double>::infinity()};
	for (long j = -lim; j <= lim; ++j) {
		const double y = table.y_at(j);
		const double v = 0.5 * (x - y) * (x - y) + lambda * table.at(j);
		if (v < best.minval)
			best = {y, v};
	}
	return best;
}

inline MoreauResult moreau_argmin_oracle(const Penalty& p, double x, const OracleGrid& grid = {}) {
	ImplicitRegularizerTable table(p, std::abs(x) + grid.margin * p.lambda(), grid);
	return moreau_argmin_oracle(table, x);
}

} // namespace sirmc

#endif // SIRMC_PROX_HPP_
