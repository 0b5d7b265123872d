#ifndef SIRMC_FORMAT_HPP_
#define SIRMC_FORMAT_HPP_

#include <charconv>
#include <string>
#include <system_error>

namespace sirmc {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
	char buf[32];
	const auto res = std::to_chars(buf, buf + sizeof(buf), v);
	if (res.ec != std::errc())
		return "nan";
	return std::string(buf, res.ptr);
}

} // namespace sirmc

#endif // SIRMC_FORMAT_HPP_
