// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace wts::kernels::detail {

namespace {

inline double hsum(__m256d v) {
	const __m128d lo = _mm256_castpd256_pd128(v);
	const __m128d hi = _mm256_extractf128_pd(v, 1);
	const __m128d s = _mm_add_pd(lo, hi);
	return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double *a, const double *b, std::size_t n) {
	__m256d acc0 = _mm256_setzero_pd();
	__m256d acc1 = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 8 <= n; i += 8) {
		acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
		acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
	}
	for (; i + 4 <= n; i += 4)
		acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
	double acc = hsum(_mm256_add_pd(acc0, acc1));
	for (; i < n; ++i)
		acc += a[i] * b[i];
	return acc;
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
	const __m256d va = _mm256_set1_pd(alpha);
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4)
		_mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
	for (; i < n; ++i)
		y[i] += alpha * x[i];
}

double max(const double *x, std::size_t n) {
	if (n < 4)
		return *std::max_element(x, x + n);
	__m256d m = _mm256_loadu_pd(x);
	std::size_t i = 4;
	for (; i + 4 <= n; i += 4)
		m = _mm256_max_pd(m, _mm256_loadu_pd(x + i));
	alignas(32) double lanes[4];
	_mm256_store_pd(lanes, m);
	double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
	for (; i < n; ++i)
		r = std::max(r, x[i]);
	return r;
}

double sum(const double *x, std::size_t n) {
	__m256d acc = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4)
		acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
	double r = hsum(acc);
	for (; i < n; ++i)
		r += x[i];
	return r;
}

void scale(double alpha, double *x, std::size_t n) {
	const __m256d va = _mm256_set1_pd(alpha);
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4)
		_mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
	for (; i < n; ++i)
		x[i] *= alpha;
}

double distance_moment(const double *p, std::size_t n, std::size_t target, int power) {
	const __m256d a = _mm256_set1_pd(static_cast<double>(target));
	const __m256d sign_mask = _mm256_set1_pd(-0.0);
	const __m256d step = _mm256_set1_pd(4.0);
	__m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
	__m256d acc = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4) {
		__m256d w = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(idx, a));
		if (power != 1)
			w = _mm256_mul_pd(w, w);
		acc = _mm256_fmadd_pd(_mm256_loadu_pd(p + i), w, acc);
		idx = _mm256_add_pd(idx, step);
	}
	double r = hsum(acc);
	const double at = static_cast<double>(target);
	for (; i < n; ++i) {
		const double w = std::abs(static_cast<double>(i) - at);
		r += p[i] * (power == 1 ? w : w * w);
	}
	return r;
}

} // namespace

const KernelTable kAvx2Table{dot, axpy, max, sum, scale, distance_moment};

} // namespace wts::kernels::detail
