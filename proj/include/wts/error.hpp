#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wts {

/// Coarse failure classes. The CLI maps each to its own exit code and prints
/// the name so scripts can dispatch on it.
enum class ErrorCategory {
	Config = 2,   // invalid parameters or flags
	Data = 3,     // malformed input, empty or degenerate series
	Io = 4,       // file system failures
	Numeric = 5,  // divergence or non-finite values
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
	Error(ErrorCategory category, const std::string &what)
	    : std::runtime_error(what), category_(category) {}

	ErrorCategory category() const noexcept { return category_; }

private:
	ErrorCategory category_;
};

} // namespace wts
