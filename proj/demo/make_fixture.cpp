// Writes the rank-1 demo fixture: rank1_observed.csv (nan marks missing
// entries) and rank1_truth.csv, a 40x30 rank-1 matrix with 30% removed.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include "sirmc/sirmc.hpp"

int main(int argc, char** argv) {
	const std::string dir = argc > 1 ? argv[1] : ".";
	sirmc::SyntheticSpec spec{40, 30, 1.0 / 30.0, 0.3, 20240611};
	const sirmc::SyntheticData data = sirmc::gen_synthetic(spec);

	sirmc::Matrix observed = data.full;
	for (Eigen::Index j = 0; j < observed.cols(); ++j)
		for (Eigen::Index i = 0; i < observed.rows(); ++i)
			if (!data.observed.mask()(i, j))
				observed(i, j) = std::numeric_limits<double>::quiet_NaN();

	std::ofstream os(dir + "/rank1_observed.csv", std::ios::binary);
	for (Eigen::Index i = 0; i < observed.rows(); ++i) {
		for (Eigen::Index j = 0; j < observed.cols(); ++j) {
			if (j > 0)
				os << ',';
			os << (std::isnan(observed(i, j)) ? std::string("nan") : sirmc::format_double(observed(i, j)));
		}
		os << '\n';
	}
	sirmc::save_matrix(data.full, dir + "/rank1_truth.csv");
	std::cerr << "rank " << data.rank << ", " << data.observed.observed_count() << " observed\n";
	return 0;
}
