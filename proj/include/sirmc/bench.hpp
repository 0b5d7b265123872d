#ifndef SIRMC_BENCH_HPP_
#define SIRMC_BENCH_HPP_

// Synthetic recovery experiments: Gaussian low-rank data, uniform masking,
// RMSE scoring, phase-transition sweeps and runtime-versus-rank tables.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sirmc/completion.hpp"
#include "sirmc/error.hpp"
#include "sirmc/format.hpp"

namespace sirmc {

/// SplitMix64 run in counter mode: output i of stream `key` is
/// mix64(key + (i + 1) * 0x9E3779B97F4A7C15). Any (key, i) can be computed
/// independently, so streams never depend on execution order.
class CounterRng {
public:
	using result_type = std::uint64_t;

	explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

	static constexpr result_type min() noexcept { return 0; }
	static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

	result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }

	std::uint64_t key() const noexcept { return key_; }
	std::uint64_t counter() const noexcept { return counter_; }

	static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
		z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
		z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
		return z ^ (z >> 31);
	}

	/// Stream key for (seed, a, b): mix64(mix64(mix64(seed) ^ a) ^ b), with
	/// a and b offset by the golden constant so that zeros do not collide.
	static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
		return mix64(mix64(mix64(seed) ^ (a + kGolden)) ^ (b + 2 * kGolden));
	}

private:
	static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
	std::uint64_t key_;
	std::uint64_t counter_ = 0;
};

struct SyntheticSpec {
	int m = 300;
	int n = 200;
	double f_r = 0.05;
	double f_m = 0.3;
	std::uint64_t seed = 0;

	/// r = round(f_r * n), at least 1.
	int rank() const { return std::max(1, static_cast<int>(std::lround(f_r * n))); }
	long missing_count() const {
		return std::lround(f_m * static_cast<double>(m) * static_cast<double>(n));
	}

	void validate() const {
		if (m <= 0 || n <= 0)
			throw Error(Errc::InvalidSpec, "m and n must be positive");
		if (!(f_r > 0.0 && f_r <= 1.0))
			throw Error(Errc::InvalidSpec, "f_r must lie in (0, 1]");
		if (!(f_m >= 0.0 && f_m < 1.0))
			throw Error(Errc::InvalidSpec, "f_m must lie in [0, 1)");
		if (rank() > std::min(m, n))
			throw Error(Errc::InvalidSpec, "rank exceeds min(m, n)");
		if (missing_count() >= static_cast<long>(m) * n)
			throw Error(Errc::InvalidSpec, "no observed entries would remain");
	}
};

struct SyntheticData {
	Matrix full;
	ObservedMatrix observed;
	int rank;
};

/// X = U V with standard Gaussian U (m x r) and V (r x n), drawn column-major
/// from one stream, followed by exactly round(f_m m n) missing positions
/// chosen by a partial Fisher-Yates shuffle of the column-major indices.
inline SyntheticData gen_synthetic(const SyntheticSpec& spec) {
	spec.validate();
	const int r = spec.rank();
	CounterRng rng(spec.seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	Matrix U(spec.m, r), V(r, spec.n);
	for (Eigen::Index i = 0; i < U.size(); ++i)
		U.data()[i] = normal(rng);
	for (Eigen::Index i = 0; i < V.size(); ++i)
		V.data()[i] = normal(rng);
	Matrix X = U * V;

	const long total = static_cast<long>(spec.m) * spec.n;
	const long missing = spec.missing_count();
	std::vector<long> idx(static_cast<std::size_t>(total));
	for (long i = 0; i < total; ++i)
		idx[static_cast<std::size_t>(i)] = i;
	Mask mask = Mask::Constant(spec.m, spec.n, true);
	for (long i = 0; i < missing; ++i) {
		std::uniform_int_distribution<long> pick(i, total - 1);
		std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
		mask.data()[idx[static_cast<std::size_t>(i)]] = false;
	}
	ObservedMatrix obs(X, std::move(mask));
	return {std::move(X), std::move(obs), r};
}

inline double rmse(const Matrix& X, const Matrix& M) {
	if (X.rows() != M.rows() || X.cols() != M.cols())
		throw Error(Errc::ShapeMismatch, "rmse operands differ in shape");
	if (X.size() == 0)
		throw Error(Errc::ShapeMismatch, "rmse of empty matrices");
	return (X - M).norm() / std::sqrt(static_cast<double>(X.rows()) * static_cast<double>(X.cols()));
}

inline constexpr double kSuccessRmse = 1e-3;

struct TrialReport {
	PenaltyKind method = PenaltyKind::HOW;
	double rmse = std::numeric_limits<double>::quiet_NaN();
	bool success = false;
	int iters = 0;
	double wall_time = 0.0;
	bool max_iters_reached = false;
	std::string error; // non-empty if the solver threw
};

/// One solve on prepared data, timed over the solve only.
inline TrialReport run_trial(const SyntheticData& data, PenaltyKind method, const SolverConfig& base) {
	TrialReport rep;
	rep.method = method;
	SolverConfig cfg = base;
	cfg.penalty_kind = method;
	try {
		const SolveResult res = solve(data.observed, cfg);
		rep.rmse = rmse(data.full, res.M);
		rep.success = rep.rmse < kSuccessRmse;
		rep.iters = static_cast<int>(res.trace.records.size());
		rep.wall_time = res.trace.total_seconds();
		rep.max_iters_reached = res.trace.max_iters_reached;
	} catch (const Error& e) {
		rep.error = e.what();
	}
	return rep;
}

struct SweepRequest {
	std::vector<double> f_r;
	std::vector<double> f_m;
	std::vector<PenaltyKind> methods;
	int trials = 1;
	int m = 300;
	int n = 200;
	std::uint64_t seed = 0;
	SolverConfig config; // penalty_kind is replaced per method
	int threads = 1;
};

struct SweepCell {
	double f_r;
	double f_m;
	PenaltyKind method;
	double success_rate;
	double mean_log10_rmse; // over trials that did not error; NaN if none
	int trials;
	std::vector<TrialReport> reports;
};

struct SweepGrid {
	std::vector<double> f_r;
	std::vector<double> f_m;
	std::vector<PenaltyKind> methods;
	std::vector<SweepCell> cells; // f_r major, then f_m, then method

	/// Cells of `method` whose success rate reaches `rate`.
	int cells_with_rate(PenaltyKind method, double rate) const {
		int count = 0;
		for (const auto& c : cells)
			if (c.method == method && c.success_rate >= rate)
				++count;
		return count;
	}
};

/// Data seed of trial `t` in cell `c`. Every method of a trial sees the same
/// (X, mask) pair.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t cell, int trial) {
	return CounterRng::stream_key(seed, cell, static_cast<std::uint64_t>(trial));
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
	const auto workers = static_cast<std::size_t>(std::max(1, threads));
	if (workers == 1 || count <= 1) {
		for (std::size_t i = 0; i < count; ++i)
			fn(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::vector<std::thread> pool;
	for (std::size_t w = 0; w < std::min(workers, count); ++w)
		pool.emplace_back([&] {
			for (std::size_t i = next++; i < count; i = next++)
				fn(i);
		});
	for (auto& t : pool)
		t.join();
}

inline SweepCell summarize(double f_r, double f_m, PenaltyKind method, std::vector<TrialReport> reports) {
	int success = 0, scored = 0;
	double log_sum = 0.0;
	for (const auto& r : reports) {
		success += r.success ? 1 : 0;
		if (r.error.empty() && std::isfinite(r.rmse)) {
			log_sum += std::log10(std::max(r.rmse, std::numeric_limits<double>::min()));
			++scored;
		}
	}
	const int t = static_cast<int>(reports.size());
	return {f_r,
	        f_m,
	        method,
	        t > 0 ? static_cast<double>(success) / t : 0.0,
	        scored > 0 ? log_sum / scored : std::numeric_limits<double>::quiet_NaN(),
	        t,
	        std::move(reports)};
}

} // namespace detail

/// Runs every (cell, trial) work item, possibly in parallel, and merges the
/// reports in (cell, method, trial) order.
inline SweepGrid phase_sweep(const SweepRequest& req) {
	if (req.trials < 1)
		throw Error(Errc::InvalidConfig, "trials must be at least 1");
	SweepGrid grid{req.f_r, req.f_m, req.methods, {}};
	if (req.methods.empty() || req.f_r.empty() || req.f_m.empty())
		return grid;
	req.config.validate();

	const std::size_t n_cells = req.f_r.size() * req.f_m.size();
	const std::size_t n_methods = req.methods.size();
	const auto trials = static_cast<std::size_t>(req.trials);
	// slot (cell, method, trial)
	std::vector<TrialReport> slots(n_cells * n_methods * trials);

	detail::parallel_for(n_cells * trials, req.threads, [&](std::size_t item) {
		const std::size_t cell = item / trials;
		const auto trial = static_cast<int>(item % trials);
		SyntheticSpec spec{req.m, req.n, req.f_r[cell / req.f_m.size()], req.f_m[cell % req.f_m.size()],
		                   trial_seed(req.seed, cell, trial)};
		try {
			const SyntheticData data = gen_synthetic(spec);
			for (std::size_t mi = 0; mi < n_methods; ++mi)
				slots[(cell * n_methods + mi) * trials + static_cast<std::size_t>(trial)] =
					run_trial(data, req.methods[mi], req.config);
		} catch (const Error& e) {
			for (std::size_t mi = 0; mi < n_methods; ++mi) {
				auto& slot = slots[(cell * n_methods + mi) * trials + static_cast<std::size_t>(trial)];
				slot.method = req.methods[mi];
				slot.error = e.what();
			}
		}
	});

	for (std::size_t cell = 0; cell < n_cells; ++cell)
		for (std::size_t mi = 0; mi < n_methods; ++mi) {
			const auto first = slots.begin() + static_cast<std::ptrdiff_t>((cell * n_methods + mi) * trials);
			grid.cells.push_back(detail::summarize(req.f_r[cell / req.f_m.size()], req.f_m[cell % req.f_m.size()],
			                                       req.methods[mi], {first, first + static_cast<std::ptrdiff_t>(trials)}));
		}
	return grid;
}

/// Named grids. "paper-grid": f_r, f_m in {0.01, 0.03, 0.05}; "desk": f_r in
/// {0.05, 0.10, 0.15, 0.20} x f_m in {0.2, 0.4, 0.6, 0.8}; "broad": both in
/// {0.05, 0.10, ..., 0.50}.
struct GridPreset {
	std::vector<double> f_r;
	std::vector<double> f_m;
};

inline GridPreset sweep_preset(std::string_view name) {
	auto steps = [](int first, int step, int last, double scale) {
		std::vector<double> v;
		for (int k = first; k <= last; k += step)
			v.push_back(k / scale);
		return v;
	};
	if (name == "paper-grid")
		return {steps(1, 2, 5, 100.0), steps(1, 2, 5, 100.0)};
	if (name == "desk")
		return {steps(5, 5, 20, 100.0), steps(2, 2, 8, 10.0)};
	if (name == "broad")
		return {steps(5, 5, 50, 100.0), steps(5, 5, 50, 100.0)};
	throw Error(Errc::InvalidConfig, "unknown preset '" + std::string(name) + "'");
}

/// Header: f_r,f_m,method,success_rate,mean_log10_rmse,trials
inline void write_sweep_csv(const SweepGrid& grid, std::ostream& os) {
	os << "f_r,f_m,method,success_rate,mean_log10_rmse,trials\n";
	for (const auto& c : grid.cells)
		os << format_double(c.f_r) << ',' << format_double(c.f_m) << ',' << method_name(c.method) << ','
		   << format_double(c.success_rate) << ',' << format_double(c.mean_log10_rmse) << ',' << c.trials << '\n';
}

struct RuntimeRequest {
	std::vector<int> ranks;
	double f_m = 0.1;
	std::vector<PenaltyKind> methods;
	int trials = 1;
	int m = 300;
	int n = 200;
	std::uint64_t seed = 0;
	SolverConfig config;
};

struct RuntimeRow {
	int rank;
	PenaltyKind method;
	double mean_seconds;
	double mean_iters;
	double mean_seconds_per_iter;
	int trials;
	std::vector<TrialReport> reports;
};

/// Mean solve time per (rank, method), trials run sequentially so timings do
/// not contend. Trial t at rank index i uses the same data for all methods.
inline std::vector<RuntimeRow> runtime_bench(const RuntimeRequest& req) {
	if (req.trials < 1)
		throw Error(Errc::InvalidConfig, "trials must be at least 1");
	std::vector<RuntimeRow> rows;
	if (req.ranks.empty() || req.methods.empty())
		return rows;
	req.config.validate();
	for (std::size_t ri = 0; ri < req.ranks.size(); ++ri) {
		std::vector<std::vector<TrialReport>> per_method(req.methods.size());
		for (int t = 0; t < req.trials; ++t) {
			const int r = req.ranks[ri];
			SyntheticSpec spec{req.m, req.n, static_cast<double>(r) / req.n, req.f_m, trial_seed(req.seed, ri, t)};
			const SyntheticData data = gen_synthetic(spec);
			for (std::size_t mi = 0; mi < req.methods.size(); ++mi)
				per_method[mi].push_back(run_trial(data, req.methods[mi], req.config));
		}
		for (std::size_t mi = 0; mi < req.methods.size(); ++mi) {
			double secs = 0.0, iters = 0.0;
			for (const auto& rep : per_method[mi]) {
				secs += rep.wall_time;
				iters += rep.iters;
			}
			const double t = req.trials;
			rows.push_back({req.ranks[ri], req.methods[mi], secs / t, iters / t, iters > 0 ? secs / iters : 0.0,
			                req.trials, std::move(per_method[mi])});
		}
	}
	return rows;
}

/// Header: rank,method,mean_seconds,trials
inline void write_runtime_csv(const std::vector<RuntimeRow>& rows, std::ostream& os) {
	os << "rank,method,mean_seconds,trials\n";
	for (const auto& r : rows)
		os << r.rank << ',' << method_name(r.method) << ',' << format_double(r.mean_seconds) << ',' << r.trials
		   << '\n';
}

} // namespace sirmc

#endif // SIRMC_BENCH_HPP_
