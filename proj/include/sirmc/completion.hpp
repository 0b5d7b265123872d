#ifndef SIRMC_COMPLETION_HPP_
#define SIRMC_COMPLETION_HPP_

// Low-rank matrix completion by ADMM on
//
//   min ||M||_phi   s.t.   X = M + E,  X on the unobserved set is 0,  E on the observed set is 0
//
// Each iteration shrinks the singular values of D = X - E + Lambda/rho with
// threshold lambda = 1/rho, fills E on the unobserved set, takes a multiplier
// step and grows rho geometrically.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sirmc/error.hpp"
#include "sirmc/format.hpp"
#include "sirmc/prox.hpp"
#include "sirmc/spectral.hpp"

namespace sirmc {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Observed entries of a matrix. Values are forced to 0 off the mask.
class ObservedMatrix {
public:
	ObservedMatrix(Matrix values, Mask mask) : values_(std::move(values)), mask_(std::move(mask)) {
		if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols())
			throw Error(Errc::ShapeMismatch, "values and mask shapes differ");
		Eigen::Index count = 0;
		for (Eigen::Index j = 0; j < values_.cols(); ++j)
			for (Eigen::Index i = 0; i < values_.rows(); ++i) {
				if (!mask_(i, j)) {
					values_(i, j) = 0.0;
				} else {
					++count;
					if (!std::isfinite(values_(i, j)))
						throw Error(Errc::NonFiniteInput, "observed entry is not finite");
				}
			}
		if (count == 0)
			throw Error(Errc::EmptyObservation, "no observed entries");
		observed_ = count;
	}

	/// Fully observed matrix.
	static ObservedMatrix full(const Matrix& X) {
		return ObservedMatrix(X, Mask::Constant(X.rows(), X.cols(), true));
	}

	const Matrix& values() const noexcept { return values_; }
	const Mask& mask() const noexcept { return mask_; }
	Eigen::Index rows() const noexcept { return values_.rows(); }
	Eigen::Index cols() const noexcept { return values_.cols(); }
	Eigen::Index observed_count() const noexcept { return observed_; }

private:
	Matrix values_;
	Mask mask_;
	Eigen::Index observed_ = 0;
};

struct SolverConfig {
	PenaltyKind penalty_kind = PenaltyKind::HOW;
	/// shape / lambda; empty selects the bias-dominance boundary of the kind.
	std::optional<double> shape_ratio;
	double rho0 = 1e-2;
	double mu = 1.05;
	double xi = 1e-7;
	int max_iters = 1000;

	double effective_shape_ratio() const {
		if (penalty_kind == PenaltyKind::SoftThreshold)
			return 0.0;
		return shape_ratio.value_or(max_shape_ratio(penalty_kind));
	}

	/// Penalty used at iteration threshold lambda = 1/rho.
	Penalty penalty_at(double rho) const {
		return Penalty::with_ratio(penalty_kind, 1.0 / rho, effective_shape_ratio());
	}

	void validate() const {
		if (penalty_kind == PenaltyKind::Generic)
			throw Error(Errc::InvalidConfig, "solver supports how, hoc, hog and soft-threshold penalties");
		if (!(rho0 > 0.0) || !std::isfinite(rho0))
			throw Error(Errc::InvalidConfig, "rho0 must be positive");
		if (!(mu > 1.0) || !std::isfinite(mu))
			throw Error(Errc::InvalidConfig, "mu must exceed 1");
		if (!(xi > 0.0))
			throw Error(Errc::InvalidConfig, "xi must be positive");
		if (max_iters <= 0)
			throw Error(Errc::InvalidConfig, "max_iters must be positive");
		if (penalty_kind != PenaltyKind::SoftThreshold) {
			const double r = effective_shape_ratio();
			if (!(r > 0.0) || !std::isfinite(r))
				throw Error(Errc::NonPositiveParameter, "shape ratio must be positive");
			if (r > max_shape_ratio(penalty_kind) * (1.0 + 1e-12))
				throw Error(Errc::BiasConstraintViolated, "shape ratio exceeds the bound for " +
				                                              std::string(kind_name(penalty_kind)));
		}
	}
};

/// Method names used by reports and the command line.
inline std::string_view method_name(PenaltyKind k) noexcept {
	switch (k) {
	case PenaltyKind::HOW: return "mc-how";
	case PenaltyKind::HOC: return "mc-hoc";
	case PenaltyKind::HOG: return "mc-hog";
	case PenaltyKind::SoftThreshold: return "nnm";
	default: return "unknown";
	}
}

/// Accepts how/hoc/hog/nnm, with or without the "mc-" prefix.
inline PenaltyKind parse_method(std::string_view s) {
	if (s.substr(0, 3) == "mc-")
		s.remove_prefix(3);
	if (s == "how") return PenaltyKind::HOW;
	if (s == "hoc") return PenaltyKind::HOC;
	if (s == "hog") return PenaltyKind::HOG;
	if (s == "nnm" || s == "soft") return PenaltyKind::SoftThreshold;
	throw Error(Errc::InvalidConfig, "unknown method '" + std::string(s) + "'");
}

struct SolverState {
	Matrix M;
	Matrix E;
	Matrix Lambda;
	double rho;
	int k;
};

inline SolverState initial_state(const ObservedMatrix& X, const SolverConfig& config) {
	const auto m = X.rows(), n = X.cols();
	return {Matrix::Zero(m, n), Matrix::Zero(m, n), Matrix::Zero(m, n), config.rho0, 0};
}

struct IterRecord {
	int k;            // iteration index, 0-based
	double rel_E;     // ||X - M - E||_F / ||X||_F after the M and E updates
	double delta_M;   // ||M^{k+1} - M^k||_F
	double feas;      // ||X - M - E||_F
	double rho;       // rho^k used by this iteration
	double wall_time; // seconds spent in this iteration
	double norm_M;
	double norm_E;
	double norm_Lambda; // multiplier after this iteration's step
};

struct IterTrace {
	std::vector<IterRecord> records;
	double x_norm = 0.0;
	double xi = 0.0;
	bool max_iters_reached = false;

	double total_seconds() const {
		double t = 0.0;
		for (const auto& r : records)
			t += r.wall_time;
		return t;
	}
};

/// D = X - E + Lambda/rho, then singular-value shrinkage at lambda = 1/rho.
inline Matrix update_M(const SolverState& state, const ObservedMatrix& X, const SolverConfig& config) {
	const Matrix D = X.values() - state.E + state.Lambda / state.rho;
	return shrink_singular_values(D, config.penalty_at(state.rho));
}

/// E = Lambda/rho - M on the unobserved set, 0 on the observed set.
inline Matrix update_E(const SolverState& state, const Matrix& M_new, const ObservedMatrix& X) {
	return X.mask().select(Matrix::Zero(M_new.rows(), M_new.cols()), state.Lambda / state.rho - M_new);
}

/// Multiplier ascent step and rho <- mu * rho; expects M and E of this
/// iteration already stored in `state`.
inline SolverState update_multiplier_and_rho(SolverState state, const ObservedMatrix& X, double mu) {
	state.Lambda += state.rho * (X.values() - state.M - state.E);
	state.rho *= mu;
	++state.k;
	return state;
}

struct SolveResult {
	Matrix M;
	IterTrace trace;
	SolverState state;
};

inline SolveResult solve(const ObservedMatrix& X, const SolverConfig& config) {
	config.validate();
	const double x_norm = X.values().norm();
	if (!(x_norm > 0.0))
		throw Error(Errc::InvalidSpec, "observed entries are all zero; the relative error is undefined");

	using clock = std::chrono::steady_clock;
	SolverState state = initial_state(X, config);
	IterTrace trace;
	trace.x_norm = x_norm;
	trace.xi = config.xi;
	trace.records.reserve(static_cast<std::size_t>(config.max_iters));

	double rel = 1.0; // M = E = 0 at start
	while (rel > config.xi && state.k < config.max_iters) {
		const auto t0 = clock::now();
		Matrix M_new = update_M(state, X, config);
		Matrix E_new = update_E(state, M_new, X);
		const double delta = (M_new - state.M).norm();
		state.M = std::move(M_new);
		state.E = std::move(E_new);
		const double feas = (X.values() - state.M - state.E).norm();
		rel = feas / x_norm;
		const double rho_k = state.rho;
		const int k = state.k;
		state = update_multiplier_and_rho(std::move(state), X, config.mu);
		const auto t1 = clock::now();

		if (!std::isfinite(rel) || !all_finite(state.M) || !all_finite(state.Lambda) || !std::isfinite(state.rho))
			throw Error(Errc::NonFiniteIterate, "non-finite iterate at k = " + std::to_string(k) +
			                                        " (rho = " + format_double(rho_k) + ")");
		trace.records.push_back({k, rel, delta, feas, rho_k, std::chrono::duration<double>(t1 - t0).count(),
		                         state.M.norm(), state.E.norm(), state.Lambda.norm()});
	}
	trace.max_iters_reached = rel > config.xi;
	Matrix M = state.M;
	return {std::move(M), std::move(trace), std::move(state)};
}

/// Sum of the numerically reconstructed regularizer over the singular values of M.
inline double regularizer_norm(const Matrix& M, const Penalty& p, const OracleGrid& grid = {}) {
	const SvdTriplet svd = thin_svd(M);
	double total = 0.0;
	for (Eigen::Index i = 0; i < svd.S.size(); ++i)
		total += implicit_regularizer(p, svd.S(i), grid);
	return total;
}

/// Scaled augmented Lagrangian
///   (1/rho)||M||_phi + ||X - M - E||_F^2 / 2 + (1/rho)<Lambda, X - M - E>
/// with the regularizer taken from the brute-force oracle. Diagnostic only;
/// cost grows with the spectrum, so keep instances small.
inline double augmented_lagrangian(const SolverState& state, const ObservedMatrix& X, const SolverConfig& config,
                                   const OracleGrid& grid = {}) {
	const Penalty p = config.penalty_at(state.rho);
	const Matrix R = X.values() - state.M - state.E;
	return regularizer_norm(state.M, p, grid) / state.rho + 0.5 * R.squaredNorm() +
	       (state.Lambda.array() * R.array()).sum() / state.rho;
}

struct DiagnosticsOptions {
	int window = 10;
	double delta_tol = 1e-6; // relative to ||X||_F
	double feas_tol = 0.0;   // relative to ||X||_F; 0 selects the trace's xi
	double bound_factor = 1e3;
};

struct ConvergenceReport {
	double max_norm_M = 0.0;
	double max_norm_E = 0.0;
	double max_norm_Lambda = 0.0;
	double final_delta_rel = 0.0;
	double final_feas_rel = 0.0;
	bool bounded = false;
	bool delta_decreasing = false;
	bool feas_decreasing = false;
	bool delta_below = false;
	bool feas_below = false;
	bool converged = false;
	std::vector<std::string> violations;
};

/// Runtime check of the convergence behaviour: iterates stay bounded, and
/// both ||M^{k+1} - M^k|| and the feasibility residual trend down over the
/// last window and end below their thresholds.
inline ConvergenceReport convergence_diagnostics(const IterTrace& trace, const DiagnosticsOptions& opt = {}) {
	ConvergenceReport rep;
	if (trace.records.empty()) {
		rep.violations.emplace_back("empty trace");
		return rep;
	}
	const double scale = trace.x_norm > 0.0 ? trace.x_norm : 1.0;
	bool finite = true;
	for (const auto& r : trace.records) {
		rep.max_norm_M = std::max(rep.max_norm_M, r.norm_M);
		rep.max_norm_E = std::max(rep.max_norm_E, r.norm_E);
		rep.max_norm_Lambda = std::max(rep.max_norm_Lambda, r.norm_Lambda);
		finite = finite && std::isfinite(r.norm_M) && std::isfinite(r.norm_E) && std::isfinite(r.norm_Lambda);
	}
	const double bound = opt.bound_factor * std::max(1.0, scale);
	rep.bounded = finite && rep.max_norm_M <= bound && rep.max_norm_E <= bound && rep.max_norm_Lambda <= bound;
	if (!rep.bounded)
		rep.violations.emplace_back("iterate norms exceed " + format_double(bound));

	const auto n = static_cast<int>(trace.records.size());
	const int w = std::clamp(opt.window, 1, n);
	const auto& first = trace.records[static_cast<std::size_t>(n - w)];
	const auto& last = trace.records.back();
	rep.final_delta_rel = last.delta_M / scale;
	rep.final_feas_rel = last.feas / scale;
	rep.delta_decreasing = w == 1 || last.delta_M < first.delta_M;
	rep.feas_decreasing = w == 1 || last.feas < first.feas || last.feas == 0.0;
	const double feas_tol = opt.feas_tol > 0.0 ? opt.feas_tol : trace.xi;
	rep.delta_below = rep.final_delta_rel < opt.delta_tol;
	rep.feas_below = rep.final_feas_rel <= feas_tol;
	if (!rep.delta_decreasing)
		rep.violations.emplace_back("delta_M not decreasing over the final window");
	if (!rep.feas_decreasing)
		rep.violations.emplace_back("feasibility residual stalled over the final window");
	if (!rep.delta_below)
		rep.violations.emplace_back("final delta_M/||X|| = " + format_double(rep.final_delta_rel) + " >= " +
		                            format_double(opt.delta_tol));
	if (!rep.feas_below)
		rep.violations.emplace_back("final feas/||X|| = " + format_double(rep.final_feas_rel) + " > " +
		                            format_double(feas_tol));
	rep.converged = rep.bounded && rep.delta_decreasing && rep.feas_decreasing && rep.delta_below && rep.feas_below;
	return rep;
}

/// Header: k,rel_E,delta_M,feas,rho,wall_time_s
inline void write_trace_csv(const IterTrace& trace, std::ostream& os) {
	os << "k,rel_E,delta_M,feas,rho,wall_time_s\n";
	for (const auto& r : trace.records)
		os << r.k << ',' << format_double(r.rel_E) << ',' << format_double(r.delta_M) << ','
		   << format_double(r.feas) << ',' << format_double(r.rho) << ',' << format_double(r.wall_time) << '\n';
}

} // namespace sirmc

#endif // SIRMC_COMPLETION_HPP_
