#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sirmc/checks.hpp"
#include "sirmc/prox.hpp"

using namespace sirmc;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kTauMax = std::sqrt(3.0) / 2.0;

Errc code_of(auto&& fn) {
	try {
		fn();
	} catch (const Error& e) {
		return e.code();
	}
	ADD_FAILURE() << "expected sirmc::Error";
	return Errc::IoError;
}

} // namespace

TEST(Validate, BoundaryShapesAccepted) {
	EXPECT_NO_THROW(validate(Penalty::how(1.0, kSqrt2)));
	EXPECT_NO_THROW(validate(Penalty::hoc(1.0, 1.0)));
	EXPECT_NO_THROW(validate(Penalty::hog(1.0, kTauMax)));
	EXPECT_NO_THROW(validate(Penalty::soft_threshold(1.0)));
}

TEST(Validate, ShapeAboveBoundRejectedOnlyWhenStrict) {
	EXPECT_EQ(code_of([] { validate(Penalty::hoc(1.0, 1.5)); }), Errc::BiasConstraintViolated);
	EXPECT_EQ(code_of([] { validate(Penalty::how(1.0, 2.0)); }), Errc::BiasConstraintViolated);
	EXPECT_EQ(code_of([] { validate(Penalty::hog(1.0, 1.0)); }), Errc::BiasConstraintViolated);
	EXPECT_NO_THROW(validate(Penalty::hoc(1.0, 1.5), false));
}

TEST(Validate, NonPositiveParameters) {
	EXPECT_EQ(code_of([] { validate(Penalty::how(0.0, 1.0)); }), Errc::NonPositiveParameter);
	EXPECT_EQ(code_of([] { validate(Penalty::how(0.0, 1.0), false); }), Errc::NonPositiveParameter);
	EXPECT_EQ(code_of([] { validate(Penalty::hoc(1.0, -1.0), false); }), Errc::NonPositiveParameter);
	EXPECT_EQ(code_of([] { validate(Penalty::soft_threshold(-2.0)); }), Errc::NonPositiveParameter);
}

TEST(Validate, GenericNonConvexRejected) {
	// oscillating h' makes x - a h'(x) non-monotone past lambda
	GeneratorFunction wavy{[](double x) { return x - 0.1 * std::cos(5.0 * x); },
	                       [](double x) { return 1.0 + 0.5 * std::sin(5.0 * x); }, {}};
	EXPECT_EQ(code_of([&] { validate(Penalty::generic(1.0, wavy), false); }), Errc::NonConvexGenerator);
}

TEST(Validate, GenericConvexButBiasGrowingIsNonStrictOnly) {
	// h = x^1.5 keeps g convex but the shrinkage a h'(x) grows past lambda
	GeneratorFunction g{[](double x) { return std::pow(x, 1.5); }, [](double x) { return 1.5 * std::sqrt(x); },
	                    {}};
	const Penalty p = Penalty::generic(1.0, g);
	EXPECT_NO_THROW(validate(p, false));
	EXPECT_EQ(code_of([&] { validate(p); }), Errc::BiasConstraintViolated);
}

TEST(ContinuityConstants, Cauchy) {
	const ContinuityConstants c = continuity_constants(cauchy_generator(1.0), 1.0);
	EXPECT_NEAR(c.a, 1.0, 1e-15);
	EXPECT_NEAR(c.b, 0.5 - std::log(2.0), 1e-15);
	EXPECT_NEAR(c.b, -0.193147180559945309, 1e-15);
	// matches the closed-form built-in
	EXPECT_NEAR(Penalty::hoc(1.0, 1.0).constants().a, (1.0 + 1.0) / 2.0, 1e-15);
}

TEST(ContinuityConstants, LinearGivesHuber) {
	const ContinuityConstants c = continuity_constants(linear_generator(), 1.0);
	EXPECT_DOUBLE_EQ(c.a, 1.0);
	EXPECT_DOUBLE_EQ(c.b, -0.5);
	const Penalty huber = Penalty::generic(1.0, linear_generator());
	for (double x : {-4.0, -1.0, 0.3, 2.5, 7.0}) {
		const double t = std::abs(x);
		EXPECT_NEAR(loss_eval(huber, x), t <= 1.0 ? 0.5 * x * x : t - 0.5, 1e-15);
		EXPECT_NEAR(prox_eval(huber, x), prox_eval(Penalty::soft_threshold(1.0), x), 1e-15);
	}
}

TEST(ContinuityConstants, WelschReproducesHowTail) {
	const double sigma = kSqrt2;
	const Penalty g = Penalty::generic(1.0, welsch_generator(sigma));
	for (double x : {1.2, 2.0, 3.7, 9.0}) {
		const double expected = 0.5 * sigma * sigma * (1.0 - std::exp((1.0 - x * x) / (sigma * sigma))) + 0.5;
		EXPECT_NEAR(loss_eval(g, x), expected, 1e-13);
		EXPECT_NEAR(loss_eval(Penalty::how(1.0, sigma), x), expected, 1e-13);
	}
}

TEST(ContinuityConstants, ZeroDerivativeAtThreshold) {
	GeneratorFunction flat{[](double) { return 1.0; }, [](double) { return 0.0; }, {}};
	EXPECT_EQ(code_of([&] { continuity_constants(flat, 1.0); }), Errc::ZeroDerivativeAtThreshold);
	EXPECT_EQ(code_of([&] { continuity_constants(linear_generator(), 0.0); }), Errc::NonPositiveParameter);
}

TEST(ContinuityConstants, GenericMatchesBuiltins) {
	const std::vector<std::pair<Penalty, Penalty>> pairs = {
		{Penalty::generic(0.7, welsch_generator(0.9)), Penalty::how(0.7, 0.9)},
		{Penalty::generic(0.7, cauchy_generator(0.6)), Penalty::hoc(0.7, 0.6)},
		{Penalty::generic(0.7, gmc_generator(0.5)), Penalty::hog(0.7, 0.5)},
	};
	for (const auto& [gen, builtin] : pairs) {
		EXPECT_NO_THROW(validate(gen));
		for (double x = -6.0; x <= 6.0; x += 0.137) {
			EXPECT_NEAR(loss_eval(gen, x), loss_eval(builtin, x), 1e-12) << kind_name(builtin.kind()) << " " << x;
			EXPECT_NEAR(prox_eval(gen, x), prox_eval(builtin, x), 1e-12) << kind_name(builtin.kind()) << " " << x;
		}
	}
}

TEST(LossEval, Examples) {
	EXPECT_DOUBLE_EQ(loss_eval(Penalty::how(1.0, kSqrt2), 1.0), 0.5);
	// ln 5 + (1/2 - ln 2)
	EXPECT_NEAR(loss_eval(Penalty::hoc(1.0, 1.0), 2.0), std::log(5.0) + 0.5 - std::log(2.0), 1e-14);
	EXPECT_NEAR(loss_eval(Penalty::hoc(1.0, 1.0), 2.0), 1.41629073187415506518, 1e-14);
	EXPECT_DOUBLE_EQ(loss_eval(Penalty::hog(1.0, kTauMax), 1.0), 0.5);
	EXPECT_DOUBLE_EQ(loss_eval(Penalty::soft_threshold(1.0), 3.0), 2.5);
}

TEST(LossEval, EvenAndC1AtThreshold) {
	for (const Penalty& p : boundary_penalties(1.3)) {
		const double l = p.lambda();
		for (double x : {0.2, 1.0, 1.3, 2.9, 11.0})
			EXPECT_EQ(loss_eval(p, -x), loss_eval(p, x));
		const double h = 1e-7;
		const double left = (loss_eval(p, l) - loss_eval(p, l - h)) / h;
		const double right = (loss_eval(p, l + h) - loss_eval(p, l)) / h;
		EXPECT_NEAR(left, right, 1e-6) << kind_name(p.kind());
		EXPECT_NEAR(loss_eval(p, l + 1e-12), 0.5 * l * l, 1e-10);
	}
}

TEST(ProxEval, Examples) {
	EXPECT_DOUBLE_EQ(prox_eval(Penalty::soft_threshold(1.0), 2.5), 1.5);
	EXPECT_NEAR(prox_eval(Penalty::how(1.0, kSqrt2), 2.0), 2.0 - 2.0 * std::exp(-1.5), 1e-15);
	EXPECT_NEAR(prox_eval(Penalty::how(1.0, kSqrt2), 2.0), 1.55373967970314034213, 1e-15);
	EXPECT_NEAR(prox_eval(Penalty::hoc(1.0, 1.0), 2.0), 1.2, 1e-15);
	EXPECT_NEAR(prox_eval(Penalty::hog(1.0, kTauMax), 2.0), 2.0 - 32.0 / 49.0, 1e-15);
	EXPECT_EQ(prox_eval(Penalty::how(1.0, kSqrt2), 0.9), 0.0);
	EXPECT_EQ(prox_eval(Penalty::hoc(1.0, 1.0), -1.0), 0.0);
}

TEST(ProxEval, ExamplesAgreeWithOracle) {
	const std::vector<std::pair<Penalty, double>> cases = {
		{Penalty::how(1.0, kSqrt2), 1.55373967970314034213},
		{Penalty::hoc(1.0, 1.0), 1.2},
		{Penalty::hog(1.0, kTauMax), 2.0 - 32.0 / 49.0},
	};
	for (const auto& [p, expected] : cases) {
		const MoreauResult mr = moreau_argmin_oracle(p, 2.0);
		EXPECT_LE(std::abs(mr.argmin - expected), p.lambda() / 200.0 * (1.0 + 1e-9)) << kind_name(p.kind());
	}
}

TEST(Bias, Examples) {
	EXPECT_EQ(bias(Penalty::how(1.0, kSqrt2), 1.0), 1.0);
	EXPECT_NEAR(bias(Penalty::how(1.0, kSqrt2), 10.0), 3.17997090019774949818e-21, 1e-34);
	EXPECT_DOUBLE_EQ(bias(Penalty::soft_threshold(1.0), 5.0), 1.0);
	EXPECT_EQ(code_of([] { bias(Penalty::how(1.0, kSqrt2), 0.5); }), Errc::DomainError);
}

TEST(ImplicitRegularizer, ZeroAtOrigin) {
	EXPECT_EQ(implicit_regularizer(Penalty::how(1.0, kSqrt2), 0.0), 0.0);
	EXPECT_EQ(implicit_regularizer(Penalty::hoc(1.0, 1.0), 0.0), 0.0);
}

TEST(ImplicitRegularizer, MatchesEnvelopeReference) {
	// R(y) at the point x* with prox(x*) = y: phi(x*) - (x* - y)^2/2, computed
	// independently at high precision.
	EXPECT_NEAR(implicit_regularizer(Penalty::how(1.0, kSqrt2), 2.0), 1.33824567689267808279, 1e-4);
	EXPECT_NEAR(implicit_regularizer(Penalty::hoc(1.0, 1.0), 2.0), 1.67790062208067592303, 1e-4);
	// grid maximum never exceeds the true supremum
	EXPECT_LE(implicit_regularizer(Penalty::how(1.0, kSqrt2), 2.0), 1.33824567689267808279 + 1e-15);
}

TEST(ImplicitRegularizer, EnvelopeConsistency) {
	// (x* - y)^2/2 + lambda * R(y) = loss(x*) at y = prox(x*)
	const Penalty p = Penalty::how(1.0, kSqrt2);
	const double xs = 2.27961978413922199679;
	const double y = prox_eval(p, xs);
	EXPECT_NEAR(y, 2.0, 1e-12);
	EXPECT_NEAR(0.5 * (xs - y) * (xs - y) + implicit_regularizer(p, y), loss_eval(p, xs), 1e-4);
}

TEST(ImplicitRegularizer, NonnegativeEvenNondecreasing) {
	for (const Penalty& p : boundary_penalties(1.0)) {
		const ImplicitRegularizerTable table(p, 4.0);
		double prev = -1.0;
		for (long j = 0; j <= table.half_count(); ++j) {
			const double r = table.at(j);
			EXPECT_GE(r, 0.0);
			EXPECT_EQ(r, table.at(-j));
			EXPECT_GE(r, prev - 1e-12) << kind_name(p.kind()) << " y = " << table.y_at(j);
			prev = r;
		}
	}
}

TEST(ImplicitRegularizer, GridTooCoarse) {
	const Penalty p = Penalty::how(1.0, kSqrt2);
	EXPECT_EQ(code_of([&] { implicit_regularizer(p, 1.0, OracleGrid{0.02}); }), Errc::GridTooCoarse);
	EXPECT_EQ(code_of([&] { moreau_argmin_oracle(p, 1.0, OracleGrid{0.02}); }), Errc::GridTooCoarse);
	EXPECT_EQ(code_of([&] { implicit_regularizer(p, 1.0, OracleGrid{0.005, 5.0}); }), Errc::GridTooCoarse);
	EXPECT_NO_THROW(implicit_regularizer(p, 1.0, OracleGrid{0.01}));
}

TEST(MoreauOracle, Examples) {
	const MoreauResult how = moreau_argmin_oracle(Penalty::how(1.0, kSqrt2), 2.0);
	EXPECT_NEAR(how.argmin, 1.55373967970314034213, 1.0 / 200.0);
	for (const Penalty& p : boundary_penalties(1.0)) {
		const MoreauResult z = moreau_argmin_oracle(p, 0.0);
		EXPECT_EQ(z.argmin, 0.0);
		EXPECT_EQ(z.minval, 0.0);
	}
	const MoreauResult soft = moreau_argmin_oracle(Penalty::soft_threshold(1.0), 3.0);
	EXPECT_NEAR(soft.argmin, 2.0, 1e-12);
	EXPECT_NEAR(soft.minval, 2.5, 1e-9);
}

TEST(Invariants, SuitesPassAtBoundaryShapes) {
	for (const Penalty& p : boundary_penalties(1.0)) {
		const CheckResult oracle = check_oracle_equivalence(p, 50, -5.0, 5.0);
		EXPECT_TRUE(oracle.passed) << oracle.name << ": " << oracle.detail;
		const CheckResult grad = check_gradient_identity(p, 200);
		EXPECT_TRUE(grad.passed) << grad.name << ": " << grad.detail;
		const CheckResult props = check_sir_properties(p, 10000);
		EXPECT_TRUE(props.passed) << props.name << ": " << props.detail;
	}
}

TEST(Invariants, SuitesPassInsideBounds) {
	for (const Penalty& p : {Penalty::how(2.5, 0.8 * 2.5), Penalty::hoc(2.5, 0.3 * 2.5), Penalty::hog(0.4, 0.2)}) {
		EXPECT_TRUE(check_gradient_identity(p, 200).passed) << kind_name(p.kind());
		EXPECT_TRUE(check_sir_properties(p, 10000).passed) << kind_name(p.kind());
	}
}

TEST(Invariants, CorruptedProxIsCaught) {
	const ProxFn broken = [](const Penalty& p, double x) { return 1.01 * prox_eval(p, x); };
	const Penalty p = Penalty::how(1.0, kSqrt2);
	EXPECT_FALSE(check_oracle_equivalence(p, 50, -5.0, 5.0, broken).passed);
	EXPECT_FALSE(check_gradient_identity(p, 200, broken).passed);
	const ProxFn leaky = [](const Penalty& p, double x) {
		return std::abs(x) <= p.lambda() ? 1e-3 * x : prox_eval(p, x);
	};
	EXPECT_FALSE(check_sir_properties(p, 10000, leaky).passed);
}

TEST(Invariants, ShapeBeyondBoundLosesBiasDominance) {
	// HOC with gamma > lambda shrinks more than soft thresholding just past lambda
	const Penalty p = Penalty::hoc(1.0, 1.5);
	const CheckResult r = check_sir_properties(p, 10000);
	EXPECT_FALSE(r.passed);
}
