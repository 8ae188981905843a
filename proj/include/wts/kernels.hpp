#pragma once

// Inner-loop arithmetic shared by the loss and the sequence model.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is chosen once at startup from CPUID and
// can be pinned with the WTS_KERNELS environment variable ("scalar" or
// "avx2") or set_backend(). Vector variants reassociate sums, so they agree
// with the reference to rounding, not bit-for-bit; a given backend on a given
// machine is fully deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace wts::kernels {

enum class Backend { Scalar, Avx2 };

/// Table of kernel entry points for one backend.
struct KernelTable {
	double (*dot)(const double *a, const double *b, std::size_t n);
	void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
	double (*max)(const double *x, std::size_t n);
	double (*sum)(const double *x, std::size_t n);
	void (*scale)(double alpha, double *x, std::size_t n);
	// sum_i p[i] * |i - target|^power for power 1 or 2
	double (*distance_moment)(const double *p, std::size_t n, std::size_t target, int power);
};

const KernelTable &scalar_table() noexcept;
/// nullptr when the binary or the CPU lacks AVX2/FMA.
const KernelTable *avx2_table() noexcept;

bool avx2_available() noexcept;

Backend active_backend() noexcept;
/// Throws wts::Error if the backend is unavailable on this machine.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;

const KernelTable &active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
	return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
	active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double max(std::span<const double> x) noexcept { return active().max(x.data(), x.size()); }

inline double sum(std::span<const double> x) noexcept { return active().sum(x.data(), x.size()); }

inline void scale(double alpha, std::span<double> x) noexcept { active().scale(alpha, x.data(), x.size()); }

inline double distance_moment(std::span<const double> p, std::size_t target, int power) noexcept {
	return active().distance_moment(p.data(), p.size(), target, power);
}

} // namespace wts::kernels
