// Generates a 300x200 rank-10 matrix, hides 30% of it and recovers it with
// each of the four regularizers.

#include <iostream>

#include "sirmc/sirmc.hpp"

int main() {
	const sirmc::SyntheticData data = sirmc::gen_synthetic({300, 200, 0.05, 0.3, 1});
	for (auto kind : {sirmc::PenaltyKind::HOW, sirmc::PenaltyKind::HOC, sirmc::PenaltyKind::HOG,
	                  sirmc::PenaltyKind::SoftThreshold}) {
		sirmc::SolverConfig cfg;
		cfg.penalty_kind = kind;
		const sirmc::SolveResult res = sirmc::solve(data.observed, cfg);
		std::cout << sirmc::method_name(kind) << ": " << res.trace.records.size() << " iterations, rmse "
		          << sirmc::rmse(data.full, res.M) << ", " << res.trace.total_seconds() << " s\n";
	}
	return 0;
}
