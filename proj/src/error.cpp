#include "wts/error.hpp"

namespace wts {

std::string_view category_name(ErrorCategory c) noexcept {
	switch (c) {
	case ErrorCategory::Config:
		return "config";
	case ErrorCategory::Data:
		return "data";
	case ErrorCategory::Io:
		return "io";
	case ErrorCategory::Numeric:
		return "numeric";
	}
	return "unknown";
}

} // namespace wts
