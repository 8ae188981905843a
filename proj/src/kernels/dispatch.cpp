#include "kernels_impl.hpp"

#include "wts/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace wts::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(WTS_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
	__builtin_cpu_init();
	return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
	return false;
#endif
}

const KernelTable *table_for(Backend b) noexcept {
	if (b == Backend::Scalar)
		return &detail::kScalarTable;
	return avx2_table();
}

Backend initial_backend() noexcept {
	if (const char *env = std::getenv("WTS_KERNELS")) {
		if (std::string(env) == "scalar")
			return Backend::Scalar;
	}
	return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

struct State {
	std::atomic<Backend> backend{initial_backend()};
	std::atomic<const KernelTable *> table{table_for(backend.load())};
};

State &state() noexcept {
	static State s;
	return s;
}

} // namespace

const KernelTable &scalar_table() noexcept { return detail::kScalarTable; }

const KernelTable *avx2_table() noexcept {
#if defined(WTS_HAVE_AVX2_KERNELS)
	return avx2_available() ? &detail::kAvx2Table : nullptr;
#else
	return nullptr;
#endif
}

bool avx2_available() noexcept {
	static const bool ok = cpu_has_avx2();
	return ok;
}

Backend active_backend() noexcept { return state().backend.load(); }

void set_backend(Backend b) {
	const KernelTable *t = table_for(b);
	if (t == nullptr)
		throw Error(ErrorCategory::Config, "kernel backend '" + std::string(backend_name(b)) + "' unavailable on this machine");
	state().backend.store(b);
	state().table.store(t);
}

std::string_view backend_name(Backend b) noexcept {
	switch (b) {
	case Backend::Scalar:
		return "scalar";
	case Backend::Avx2:
		return "avx2";
	}
	return "unknown";
}

const KernelTable &active() noexcept { return *state().table.load(std::memory_order_relaxed); }

} // namespace wts::kernels
