#ifndef SIRMC_ERROR_HPP_
#define SIRMC_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace sirmc {

enum class Errc {
	NonPositiveParameter,
	BiasConstraintViolated,
	NonConvexGenerator,
	ZeroDerivativeAtThreshold,
	DomainError,
	GridTooCoarse,
	NonFiniteInput,
	SvdFailure,
	NonFiniteIterate,
	InvalidConfig,
	InvalidSpec,
	ShapeMismatch,
	ParseError,
	IndexOutOfRange,
	DuplicateCoordinate,
	EmptyObservation,
	IoError,
};

inline constexpr std::string_view errc_name(Errc c) noexcept {
	switch (c) {
	case Errc::NonPositiveParameter: return "NonPositiveParameter";
	case Errc::BiasConstraintViolated: return "BiasConstraintViolated";
	case Errc::NonConvexGenerator: return "NonConvexGenerator";
	case Errc::ZeroDerivativeAtThreshold: return "ZeroDerivativeAtThreshold";
	case Errc::DomainError: return "DomainError";
	case Errc::GridTooCoarse: return "GridTooCoarse";
	case Errc::NonFiniteInput: return "NonFiniteInput";
	case Errc::SvdFailure: return "SvdFailure";
	case Errc::NonFiniteIterate: return "NonFiniteIterate";
	case Errc::InvalidConfig: return "InvalidConfig";
	case Errc::InvalidSpec: return "InvalidSpec";
	case Errc::ShapeMismatch: return "ShapeMismatch";
	case Errc::ParseError: return "ParseError";
	case Errc::IndexOutOfRange: return "IndexOutOfRange";
	case Errc::DuplicateCoordinate: return "DuplicateCoordinate";
	case Errc::EmptyObservation: return "EmptyObservation";
	case Errc::IoError: return "IoError";
	}
	return "Unknown";
}

/// Every failure raised by the library. `code()` identifies the failure class;
/// `what()` is prefixed with its name.
class Error : public std::runtime_error {
public:
	Error(Errc code, const std::string& message)
		: std::runtime_error(std::string(errc_name(code)) + ": " + message),
		  code_(code) {}

	Errc code() const noexcept { return code_; }

private:
	Errc code_;
};

} // namespace sirmc

#endif // SIRMC_ERROR_HPP_
