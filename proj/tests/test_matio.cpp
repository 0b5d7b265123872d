#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "sirmc/matio.hpp"

using namespace sirmc;
namespace fs = std::filesystem;

namespace {

class MatioTest : public testing::Test {
protected:
	void SetUp() override {
		dir_ = fs::temp_directory_path() /
		       ("sirmc_matio_" + std::string(testing::UnitTest::GetInstance()->current_test_info()->name()));
		fs::create_directories(dir_);
	}
	void TearDown() override { fs::remove_all(dir_); }

	std::string write(const std::string& name, const std::string& body) {
		const std::string path = (dir_ / name).string();
		std::ofstream(path, std::ios::binary) << body;
		return path;
	}
	std::string path(const std::string& name) const { return (dir_ / name).string(); }

	static std::string slurp(const std::string& p) {
		std::ifstream in(p, std::ios::binary);
		return {std::istreambuf_iterator<char>(in), {}};
	}

	fs::path dir_;
};

Errc code_of(auto&& fn) {
	try {
		fn();
	} catch (const Error& e) {
		return e.code();
	}
	ADD_FAILURE() << "expected sirmc::Error";
	return Errc::NonFiniteInput;
}

} // namespace

TEST_F(MatioTest, NanMarksMissing) {
	const ObservedMatrix X = load_observed(write("a.csv", "1,nan\n3,4"));
	ASSERT_EQ(X.rows(), 2);
	ASSERT_EQ(X.cols(), 2);
	EXPECT_TRUE(X.mask()(0, 0));
	EXPECT_FALSE(X.mask()(0, 1));
	EXPECT_TRUE(X.mask()(1, 0));
	EXPECT_TRUE(X.mask()(1, 1));
	Matrix expected(2, 2);
	expected << 1, 0, 3, 4;
	EXPECT_EQ(X.values(), expected);
}

TEST_F(MatioTest, NanIsCaseInsensitive) {
	const ObservedMatrix X = load_observed(write("a.csv", "NaN,2\n3,NAN\n"));
	EXPECT_EQ(X.observed_count(), 2);
}

TEST_F(MatioTest, MaskFileSelectsObserved) {
	const ObservedMatrix X = load_observed(write("a.csv", "1,2\n3,4\n"), write("m.txt", "0,1\n1,0\n"));
	EXPECT_EQ(X.observed_count(), 2);
	EXPECT_EQ(X.values()(0, 0), 0.0);
	EXPECT_EQ(X.values()(0, 1), 2.0);
	EXPECT_EQ(X.values()(1, 0), 3.0);
}

TEST_F(MatioTest, MaskErrors) {
	const std::string m = write("a.csv", "1,2\n3,4\n");
	EXPECT_EQ(code_of([&] { load_observed(m, write("m1.txt", "5,0\n")); }), Errc::IndexOutOfRange);
	EXPECT_EQ(code_of([&] { load_observed(m, write("m2.txt", "0,0\n1,1\n0,0\n")); }), Errc::DuplicateCoordinate);
	EXPECT_EQ(code_of([&] { load_observed(m, write("m3.txt", "0;0\n")); }), Errc::ParseError);
	EXPECT_EQ(code_of([&] { load_observed(m, write("m4.txt", "")); }), Errc::EmptyObservation);
	EXPECT_EQ(code_of([&] { load_observed(write("b.csv", "nan,2\n3,4\n"), write("m5.txt", "0,0\n")); }),
	          Errc::ParseError);
}

TEST_F(MatioTest, AllNanIsEmptyObservation) {
	EXPECT_EQ(code_of([&] { load_observed(write("a.csv", "nan,nan\nnan,nan\n")); }), Errc::EmptyObservation);
}

TEST_F(MatioTest, RaggedInputIsLocatedError) {
	try {
		load_observed(write("r.csv", "1,2,3\n4,5\n"));
		FAIL() << "expected ParseError";
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), Errc::ParseError);
		EXPECT_NE(std::string(e.what()).find("r.csv:2:"), std::string::npos) << e.what();
	}
}

TEST_F(MatioTest, BadTokenIsLocatedError) {
	try {
		load_matrix(write("t.csv", "1,2\n3,x4\n"));
		FAIL() << "expected ParseError";
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), Errc::ParseError);
		EXPECT_NE(std::string(e.what()).find("t.csv:2:2"), std::string::npos) << e.what();
	}
	EXPECT_EQ(code_of([&] { load_matrix(write("i.csv", "1,inf\n")); }), Errc::ParseError);
	EXPECT_EQ(code_of([&] { load_matrix(write("e.csv", "")); }), Errc::ParseError);
}

TEST_F(MatioTest, MissingFileIsParseErrorWithPath) {
	try {
		load_observed(path("missing.csv"));
		FAIL() << "expected ParseError";
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), Errc::ParseError);
		EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
	}
}

TEST_F(MatioTest, CrlfAccepted) {
	const Matrix M = load_matrix(write("c.csv", "1,2\r\n3,4\r\n"));
	Matrix expected(2, 2);
	expected << 1, 2, 3, 4;
	EXPECT_EQ(M, expected);
}

TEST_F(MatioTest, RoundTrip) {
	std::mt19937_64 gen(5);
	std::normal_distribution<double> normal(0.0, 1e3);
	Matrix M(5, 7);
	for (Eigen::Index i = 0; i < M.size(); ++i)
		M.data()[i] = normal(gen) * std::pow(10.0, static_cast<double>(i % 9) - 4.0);
	M(0, 0) = 1e-300;
	M(1, 1) = -0.0;
	save_matrix(M, path("m.csv"));
	const Matrix back = load_matrix(path("m.csv"));
	for (Eigen::Index i = 0; i < M.size(); ++i)
		EXPECT_LE(std::abs(back.data()[i] - M.data()[i]), 1e-15 * std::abs(M.data()[i]));
	// byte-stable
	save_matrix(back, path("m2.csv"));
	EXPECT_EQ(slurp(path("m.csv")), slurp(path("m2.csv")));
}

TEST_F(MatioTest, SaveScalarAndRejections) {
	save_matrix(Matrix::Constant(1, 1, 3.5), path("s.csv"));
	EXPECT_EQ(slurp(path("s.csv")), "3.5\n");
	EXPECT_EQ(code_of([&] { save_matrix(Matrix(0, 0), path("z.csv")); }), Errc::InvalidSpec);
	EXPECT_EQ(code_of([&] { save_matrix(Matrix::Ones(1, 1), path("no/such/dir/x.csv")); }), Errc::IoError);
}

TEST_F(MatioTest, MaskRoundTrip) {
	Mask mask = Mask::Constant(3, 4, false);
	mask(0, 1) = mask(2, 3) = mask(1, 0) = true;
	save_mask(mask, path("mask.txt"));
	EXPECT_EQ(slurp(path("mask.txt")), "1,0\n0,1\n2,3\n");
	const ObservedMatrix X = load_observed(write("v.csv", "1,2,3,4\n5,6,7,8\n9,10,11,12\n"), path("mask.txt"));
	EXPECT_TRUE((X.mask() == mask).all());
}
