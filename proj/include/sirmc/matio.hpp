#ifndef SIRMC_MATIO_HPP_
#define SIRMC_MATIO_HPP_

// Text formats:
//   matrix  dense CSV, one row per line, comma-separated reals; `nan`
//           (any case) marks a missing entry
//   mask    one `i,j` pair per line, 0-based, listing OBSERVED positions
// LF and CRLF are accepted on input; output is LF with shortest round-trip
// number formatting.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sirmc/completion.hpp"
#include "sirmc/error.hpp"
#include "sirmc/format.hpp"

namespace sirmc {

struct MatrixText {
	Matrix values;  // nan cells stored as 0
	Mask present;   // false where the token was nan
};

namespace detail {

inline std::string read_file(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error(Errc::ParseError, path + ": cannot open file");
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

inline std::string_view trim(std::string_view s) {
	while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
		s.remove_prefix(1);
	while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
		s.remove_suffix(1);
	return s;
}

/// Splits text into lines, dropping CR and any trailing blank lines.
inline std::vector<std::string_view> split_lines(std::string_view text) {
	std::vector<std::string_view> lines;
	std::size_t start = 0;
	while (start <= text.size()) {
		const std::size_t end = text.find('\n', start);
		std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
		if (!line.empty() && line.back() == '\r')
			line.remove_suffix(1);
		lines.push_back(line);
		if (end == std::string_view::npos)
			break;
		start = end + 1;
	}
	while (!lines.empty() && trim(lines.back()).empty())
		lines.pop_back();
	return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
	std::vector<std::string_view> out;
	std::size_t start = 0;
	while (true) {
		const std::size_t end = line.find(',', start);
		out.push_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
		if (end == std::string_view::npos)
			break;
		start = end + 1;
	}
	return out;
}

inline bool is_nan_token(std::string_view tok) {
	if (tok.size() != 3)
		return false;
	return std::tolower(static_cast<unsigned char>(tok[0])) == 'n' &&
	       std::tolower(static_cast<unsigned char>(tok[1])) == 'a' &&
	       std::tolower(static_cast<unsigned char>(tok[2])) == 'n';
}

inline std::string where(const std::string& path, std::size_t line, std::size_t col) {
	return path + ":" + std::to_string(line) + ":" + std::to_string(col);
}

template <class T>
std::optional<T> parse_number(std::string_view tok) {
	if (!tok.empty() && tok.front() == '+')
		tok.remove_prefix(1);
	T v{};
	const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
	if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
		return std::nullopt;
	return v;
}

} // namespace detail

/// Parses a dense CSV. Location in errors is line:column (1-based, column
/// counts fields).
inline MatrixText parse_matrix_csv(std::string_view text, const std::string& origin = "<input>") {
	const auto lines = detail::split_lines(text);
	if (lines.empty())
		throw Error(Errc::ParseError, origin + ": empty matrix file");
	std::vector<std::vector<std::string_view>> rows;
	rows.reserve(lines.size());
	for (std::size_t i = 0; i < lines.size(); ++i) {
		rows.push_back(detail::split_fields(lines[i]));
		if (rows.back().size() != rows.front().size())
			throw Error(Errc::ParseError, detail::where(origin, i + 1, 1) + ": row has " +
			                                  std::to_string(rows.back().size()) + " fields, expected " +
			                                  std::to_string(rows.front().size()));
	}
	const auto m = static_cast<Eigen::Index>(rows.size());
	const auto n = static_cast<Eigen::Index>(rows.front().size());
	MatrixText out{Matrix::Zero(m, n), Mask::Constant(m, n, true)};
	for (Eigen::Index i = 0; i < m; ++i)
		for (Eigen::Index j = 0; j < n; ++j) {
			const std::string_view tok = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
			if (detail::is_nan_token(tok)) {
				out.present(i, j) = false;
				continue;
			}
			const auto v = detail::parse_number<double>(tok);
			if (!v || !std::isfinite(*v))
				throw Error(Errc::ParseError, detail::where(origin, static_cast<std::size_t>(i) + 1,
				                                            static_cast<std::size_t>(j) + 1) +
				                                  ": invalid number '" + std::string(tok) + "'");
			out.values(i, j) = *v;
		}
	return out;
}

inline MatrixText load_matrix_text(const std::string& path) { return parse_matrix_csv(detail::read_file(path), path); }

/// Dense matrix with no missing cells.
inline Matrix load_matrix(const std::string& path) {
	MatrixText t = load_matrix_text(path);
	if (!t.present.all())
		throw Error(Errc::ParseError, path + ": unexpected nan in a dense matrix");
	return std::move(t.values);
}

/// Observed-coordinate list for an m x n matrix.
inline Mask parse_mask(std::string_view text, Eigen::Index m, Eigen::Index n, const std::string& origin = "<mask>") {
	Mask mask = Mask::Constant(m, n, false);
	const auto lines = detail::split_lines(text);
	for (std::size_t k = 0; k < lines.size(); ++k) {
		const auto fields = detail::split_fields(lines[k]);
		if (fields.size() != 2)
			throw Error(Errc::ParseError, detail::where(origin, k + 1, 1) + ": expected 'i,j'");
		const auto i = detail::parse_number<long>(fields[0]);
		const auto j = detail::parse_number<long>(fields[1]);
		if (!i || !j)
			throw Error(Errc::ParseError, detail::where(origin, k + 1, i ? 2 : 1) + ": invalid index");
		if (*i < 0 || *i >= m || *j < 0 || *j >= n)
			throw Error(Errc::IndexOutOfRange, detail::where(origin, k + 1, 1) + ": (" + std::to_string(*i) + "," +
			                                       std::to_string(*j) + ") outside " + std::to_string(m) + "x" +
			                                       std::to_string(n));
		if (mask(*i, *j))
			throw Error(Errc::DuplicateCoordinate, detail::where(origin, k + 1, 1) + ": (" + std::to_string(*i) +
			                                           "," + std::to_string(*j) + ") listed twice");
		mask(*i, *j) = true;
	}
	return mask;
}

/// With a mask file, values come from the matrix and everything off the mask
/// is zeroed; a nan on an observed coordinate is an error. Without one, the
/// non-nan cells are the observed set.
inline ObservedMatrix load_observed(const std::string& matrix_path, const std::optional<std::string>& mask_path = {}) {
	MatrixText t = load_matrix_text(matrix_path);
	Mask mask;
	if (mask_path) {
		mask = parse_mask(detail::read_file(*mask_path), t.values.rows(), t.values.cols(), *mask_path);
		for (Eigen::Index j = 0; j < mask.cols(); ++j)
			for (Eigen::Index i = 0; i < mask.rows(); ++i)
				if (mask(i, j) && !t.present(i, j))
					throw Error(Errc::ParseError, detail::where(matrix_path, static_cast<std::size_t>(i) + 1,
					                                            static_cast<std::size_t>(j) + 1) +
					                                  ": nan at an observed coordinate");
	} else {
		mask = t.present;
	}
	if (!mask.any())
		throw Error(Errc::EmptyObservation, matrix_path + ": no observed entries");
	return ObservedMatrix(std::move(t.values), std::move(mask));
}

inline void write_matrix_csv(const Matrix& M, std::ostream& os) {
	if (M.size() == 0)
		throw Error(Errc::InvalidSpec, "cannot write an empty matrix");
	for (Eigen::Index i = 0; i < M.rows(); ++i) {
		for (Eigen::Index j = 0; j < M.cols(); ++j) {
			if (j > 0)
				os << ',';
			os << format_double(M(i, j));
		}
		os << '\n';
	}
}

inline void save_matrix(const Matrix& M, const std::string& path) {
	if (M.size() == 0)
		throw Error(Errc::InvalidSpec, "cannot write an empty matrix");
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out)
		throw Error(Errc::IoError, path + ": cannot open for writing");
	write_matrix_csv(M, out);
	out.flush();
	if (!out)
		throw Error(Errc::IoError, path + ": write failed");
}

/// Observed coordinates in column-major order, one `i,j` per line.
inline void save_mask(const Mask& mask, const std::string& path) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out)
		throw Error(Errc::IoError, path + ": cannot open for writing");
	for (Eigen::Index j = 0; j < mask.cols(); ++j)
		for (Eigen::Index i = 0; i < mask.rows(); ++i)
			if (mask(i, j))
				out << i << ',' << j << '\n';
	if (!out)
		throw Error(Errc::IoError, path + ": write failed");
}

} // namespace sirmc

#endif // SIRMC_MATIO_HPP_
