// sirmc: matrix completion with generated sparsity-inducing regularizers.
//
//   sirmc complete   --input X.csv [--mask mask.csv] --out M.csv
//   sirmc sweep      --preset desk --trials 10 --out grid.csv
//   sirmc bench      --ranks 10,30,50 --out runtime.csv
//   sirmc prox-curve --method how --out curve.csv
//   sirmc selftest   [--json]
//
// Exit codes: 0 success/converged, 1 error, 2 iteration cap reached,
// 3 selftest failure. Human-readable output goes to stderr.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sirmc/sirmc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIters = 2;
constexpr int kExitSelftest = 3;

struct SolverFlags {
	std::string method = "how";
	std::optional<double> shape_ratio;
	double rho0 = 1e-2;
	double mu = 1.05;
	double xi = 1e-7;
	int max_iters = 1000;
	std::uint64_t seed = 0;
	std::optional<int> threads;
	bool deterministic = false;
	std::string out;

	sirmc::SolverConfig config() const {
		sirmc::SolverConfig c;
		c.penalty_kind = sirmc::parse_method(method);
		c.shape_ratio = shape_ratio;
		c.rho0 = rho0;
		c.mu = mu;
		c.xi = xi;
		c.max_iters = max_iters;
		return c;
	}

	int thread_count() const {
		if (deterministic)
			return 1;
		if (threads)
			return std::max(1, *threads);
		if (const char* env = std::getenv("SIRMC_THREADS")) {
			const int n = std::atoi(env);
			if (n > 0)
				return n;
		}
		return 1;
	}
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool method_list) {
	if (!method_list)
		cmd->add_option("--method", f.method, "how, hoc, hog or nnm")->capture_default_str();
	cmd->add_option("--shape-ratio", f.shape_ratio, "shape/lambda (default: bias-dominance bound)");
	cmd->add_option("--rho0", f.rho0, "initial penalty parameter")->capture_default_str();
	cmd->add_option("--mu", f.mu, "penalty growth factor")->capture_default_str();
	cmd->add_option("--xi", f.xi, "relative-error tolerance")->capture_default_str();
	cmd->add_option("--max-iters", f.max_iters, "iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
	cmd->add_option("--seed", f.seed, "base seed")->capture_default_str();
	cmd->add_option("--threads", f.threads, "worker threads (env SIRMC_THREADS if absent)");
	cmd->add_flag("--deterministic", f.deterministic, "sequential execution");
}

std::vector<sirmc::PenaltyKind> parse_methods(const std::vector<std::string>& names) {
	std::vector<sirmc::PenaltyKind> out;
	for (const auto& n : names)
		out.push_back(sirmc::parse_method(n));
	return out;
}

std::ofstream open_out(const std::string& path) {
	std::ofstream os(path, std::ios::binary | std::ios::trunc);
	if (!os)
		throw sirmc::Error(sirmc::Errc::IoError, path + ": cannot open for writing");
	return os;
}

// complete ------------------------------------------------------------------

struct CompleteFlags {
	std::string input;
	std::optional<std::string> mask;
	std::optional<std::string> truth;
};

int run_complete(const SolverFlags& f, const CompleteFlags& c) {
	const sirmc::ObservedMatrix X = sirmc::load_observed(c.input, c.mask);
	const sirmc::SolverConfig cfg = f.config();
	const sirmc::SolveResult res = sirmc::solve(X, cfg);
	sirmc::save_matrix(res.M, f.out);
	{
		auto os = open_out(f.out + ".trace.csv");
		sirmc::write_trace_csv(res.trace, os);
	}
	const auto& last = res.trace.records.back();
	std::cerr << sirmc::method_name(cfg.penalty_kind) << ": " << X.rows() << "x" << X.cols() << ", "
	          << X.observed_count() << " observed\n"
	          << "iterations " << res.trace.records.size() << ", rel_E " << sirmc::format_double(last.rel_E)
	          << ", wall time " << sirmc::format_double(res.trace.total_seconds()) << " s\n";
	if (c.truth) {
		const sirmc::Matrix T = sirmc::load_matrix(*c.truth);
		std::cerr << "rmse vs truth " << sirmc::format_double(sirmc::rmse(T, res.M)) << "\n";
	}
	if (res.trace.max_iters_reached) {
		std::cerr << "stopped at the iteration cap without reaching xi\n";
		return kExitMaxIters;
	}
	return kExitOk;
}

// sweep / bench -------------------------------------------------------------

struct SweepFlags {
	std::string preset;
	std::vector<double> f_r;
	std::vector<double> f_m;
	std::vector<std::string> methods{"how", "hoc", "hog", "nnm"};
	int trials = 10;
	int m = 300;
	int n = 200;
};

int run_sweep(const SolverFlags& f, const SweepFlags& s) {
	sirmc::SweepRequest req;
	if (!s.preset.empty()) {
		auto p = sirmc::sweep_preset(s.preset);
		req.f_r = std::move(p.f_r);
		req.f_m = std::move(p.f_m);
	}
	if (!s.f_r.empty())
		req.f_r = s.f_r;
	if (!s.f_m.empty())
		req.f_m = s.f_m;
	if (req.f_r.empty() || req.f_m.empty())
		throw sirmc::Error(sirmc::Errc::InvalidConfig, "give --preset or both --fr and --fm");
	req.methods = parse_methods(s.methods);
	req.trials = s.trials;
	req.m = s.m;
	req.n = s.n;
	req.seed = f.seed;
	req.config = f.config();
	req.threads = f.thread_count();

	const sirmc::SweepGrid grid = sirmc::phase_sweep(req);
	auto os = open_out(f.out);
	sirmc::write_sweep_csv(grid, os);
	int errors = 0;
	for (const auto& cell : grid.cells)
		for (const auto& r : cell.reports)
			errors += r.error.empty() ? 0 : 1;
	std::cerr << "sweep: " << req.f_r.size() << "x" << req.f_m.size() << " cells, " << req.methods.size()
	          << " methods, " << req.trials << " trials";
	if (errors > 0)
		std::cerr << ", " << errors << " failed trials";
	std::cerr << " -> " << f.out << "\n";
	for (auto method : req.methods)
		std::cerr << "  " << sirmc::method_name(method) << ": " << grid.cells_with_rate(method, 0.5)
		          << " cells with success rate >= 0.5\n";
	return kExitOk;
}

struct BenchFlags {
	std::vector<int> ranks{10, 20, 30, 40, 50};
	double f_m = 0.1;
	std::vector<std::string> methods{"how", "hoc", "hog", "nnm"};
	int trials = 3;
	int m = 300;
	int n = 200;
};

int run_bench(const SolverFlags& f, const BenchFlags& b) {
	sirmc::RuntimeRequest req;
	req.ranks = b.ranks;
	req.f_m = b.f_m;
	req.methods = parse_methods(b.methods);
	req.trials = b.trials;
	req.m = b.m;
	req.n = b.n;
	req.seed = f.seed;
	req.config = f.config();
	const auto rows = sirmc::runtime_bench(req);
	auto os = open_out(f.out);
	sirmc::write_runtime_csv(rows, os);
	for (const auto& r : rows)
		std::cerr << "rank " << r.rank << " " << sirmc::method_name(r.method) << ": "
		          << sirmc::format_double(r.mean_seconds) << " s, " << r.mean_iters << " iterations\n";
	return kExitOk;
}

// prox-curve ----------------------------------------------------------------

struct CurveFlags {
	std::string method = "how";
	double lambda = 1.0;
	std::optional<double> shape;
	double from = -3.0;
	double to = 3.0;
	double step = 0.01;
	bool strict = true;
	std::string out;
};

int run_prox_curve(const CurveFlags& c) {
	if (!(c.step > 0.0))
		throw sirmc::Error(sirmc::Errc::InvalidConfig, "--step must be positive");
	if (!(c.to >= c.from))
		throw sirmc::Error(sirmc::Errc::InvalidConfig, "--to must not be below --from");
	const sirmc::PenaltyKind kind = sirmc::parse_method(c.method);
	const double shape = c.shape.value_or(sirmc::max_shape_ratio(kind) * c.lambda);
	const sirmc::Penalty p = kind == sirmc::PenaltyKind::SoftThreshold
	                             ? sirmc::Penalty::soft_threshold(c.lambda)
	                             : sirmc::Penalty::with_ratio(kind, c.lambda, shape / c.lambda);
	sirmc::validate(p, c.strict);
	const long count = std::lround((c.to - c.from) / c.step);
	auto os = open_out(c.out);
	os << "x,loss,prox,implicit_regularizer\n";
	for (long i = 0; i <= count; ++i) {
		// snap to 1e-12 so accumulated rounding does not leak into the x column
		const double x = std::round((c.from + static_cast<double>(i) * c.step) * 1e12) / 1e12;
		os << sirmc::format_double(x) << ',' << sirmc::format_double(sirmc::loss_eval(p, x)) << ','
		   << sirmc::format_double(sirmc::prox_eval(p, x)) << ','
		   << sirmc::format_double(sirmc::implicit_regularizer(p, x)) << '\n';
	}
	std::cerr << "prox-curve: " << count + 1 << " rows -> " << c.out << "\n";
	return kExitOk;
}

// selftest ------------------------------------------------------------------

struct SelftestFlags {
	bool json = false;
	bool inject_fault = false;
	std::string out;
};

int run_selftest(const SelftestFlags& s) {
	sirmc::ProxFn prox = sirmc::library_prox();
	if (s.inject_fault)
		prox = [](const sirmc::Penalty& p, double x) { return 1.01 * sirmc::prox_eval(p, x); };

	std::vector<sirmc::CheckResult> results;
	for (const auto& p : sirmc::boundary_penalties()) {
		results.push_back(sirmc::check_oracle_equivalence(p, 20, -5.0, 5.0, prox));
		results.push_back(sirmc::check_gradient_identity(p, 200, prox));
		results.push_back(sirmc::check_sir_properties(p, 10000, prox));
		results.push_back(sirmc::check_spectral(p, 5, 30, 20, 7, prox));
	}
	bool ok = true;
	for (const auto& r : results) {
		ok = ok && r.passed;
		std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
	}
	std::cerr << (ok ? "selftest passed" : "selftest FAILED") << "\n";
	if (s.json) {
		nlohmann::json j;
		j["passed"] = ok;
		for (const auto& r : results)
			j["suites"].push_back({{"name", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"detail", r.detail}});
		if (s.out.empty()) {
			std::cout << j.dump(2) << "\n";
		} else {
			auto os = open_out(s.out);
			os << j.dump(2) << "\n";
		}
	}
	return ok ? kExitOk : kExitSelftest;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Low-rank matrix completion with generated sparsity-inducing regularizers"};
	app.require_subcommand(1);

	SolverFlags solver;
	CompleteFlags complete;
	auto* cmd_complete = app.add_subcommand("complete", "complete a matrix from CSV files");
	cmd_complete->add_option("--input", complete.input, "matrix CSV (nan = missing)")->required();
	cmd_complete->add_option("--mask", complete.mask, "observed coordinates, one 'i,j' per line (0-based)");
	cmd_complete->add_option("--truth", complete.truth, "ground-truth CSV for an RMSE report");
	cmd_complete->add_option("--out", solver.out, "completed matrix CSV")->required();
	add_solver_flags(cmd_complete, solver, false);

	SweepFlags sweep;
	auto* cmd_sweep = app.add_subcommand("sweep", "phase-transition sweep over (f_r, f_m)");
	cmd_sweep->add_option("--preset", sweep.preset, "paper-grid, desk or broad");
	cmd_sweep->add_option("--fr", sweep.f_r, "rank fractions")->delimiter(',');
	cmd_sweep->add_option("--fm", sweep.f_m, "missing fractions")->delimiter(',');
	cmd_sweep->add_option("--methods,--method", sweep.methods, "methods")->delimiter(',')->capture_default_str();
	cmd_sweep->add_option("--trials", sweep.trials, "trials per cell")->capture_default_str()->check(CLI::PositiveNumber);
	cmd_sweep->add_option("--m", sweep.m, "rows")->capture_default_str()->check(CLI::PositiveNumber);
	cmd_sweep->add_option("--n", sweep.n, "columns")->capture_default_str()->check(CLI::PositiveNumber);
	cmd_sweep->add_option("--out", solver.out, "sweep CSV")->required();
	add_solver_flags(cmd_sweep, solver, true);

	BenchFlags bench;
	auto* cmd_bench = app.add_subcommand("bench", "runtime versus matrix rank");
	cmd_bench->add_option("--ranks", bench.ranks, "ranks")->delimiter(',')->capture_default_str();
	cmd_bench->add_option("--fm", bench.f_m, "missing fraction")->capture_default_str();
	cmd_bench->add_option("--methods,--method", bench.methods, "methods")->delimiter(',')->capture_default_str();
	cmd_bench->add_option("--trials", bench.trials, "trials per rank")->capture_default_str()->check(CLI::PositiveNumber);
	cmd_bench->add_option("--m", bench.m, "rows")->capture_default_str()->check(CLI::PositiveNumber);
	cmd_bench->add_option("--n", bench.n, "columns")->capture_default_str()->check(CLI::PositiveNumber);
	cmd_bench->add_option("--out", solver.out, "runtime CSV")->required();
	add_solver_flags(cmd_bench, solver, true);

	CurveFlags curve;
	auto* cmd_curve = app.add_subcommand("prox-curve", "tabulate loss, prox and regularizer");
	cmd_curve->add_option("--method", curve.method, "how, hoc, hog or nnm")->capture_default_str();
	cmd_curve->add_option("--lambda", curve.lambda, "threshold")->capture_default_str();
	cmd_curve->add_option("--shape", curve.shape, "sigma/gamma/tau (default: bound for lambda)");
	cmd_curve->add_option("--from", curve.from, "range start")->capture_default_str();
	cmd_curve->add_option("--to", curve.to, "range end")->capture_default_str();
	cmd_curve->add_option("--step", curve.step, "abscissa step")->capture_default_str();
	cmd_curve->add_flag("!--no-strict", curve.strict, "allow shapes beyond the bias bound");
	cmd_curve->add_option("--out", curve.out, "curve CSV")->required();

	SelftestFlags selftest;
	auto* cmd_selftest = app.add_subcommand("selftest", "run the oracle and invariant suites");
	cmd_selftest->add_flag("--json", selftest.json, "machine-readable report on stdout (or --out)");
	cmd_selftest->add_option("--out", selftest.out, "JSON report path");
	cmd_selftest->add_flag("--inject-fault", selftest.inject_fault)->group("");

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::CallForAllHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return kExitError;
	}

	try {
		if (cmd_complete->parsed())
			return run_complete(solver, complete);
		if (cmd_sweep->parsed())
			return run_sweep(solver, sweep);
		if (cmd_bench->parsed())
			return run_bench(solver, bench);
		if (cmd_curve->parsed())
			return run_prox_curve(curve);
		if (cmd_selftest->parsed())
			return run_selftest(selftest);
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitError;
	}
	return kExitError;
}
