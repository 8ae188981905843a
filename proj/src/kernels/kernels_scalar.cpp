#include "kernels_impl.hpp"

#include <algorithm>
#include <cmath>

namespace wts::kernels::detail {

namespace {

double dot(const double *a, const double *b, std::size_t n) {
	double acc = 0.0;
	for (std::size_t i = 0; i < n; ++i)
		acc += a[i] * b[i];
	return acc;
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
	for (std::size_t i = 0; i < n; ++i)
		y[i] += alpha * x[i];
}

double max(const double *x, std::size_t n) {
	double m = x[0];
	for (std::size_t i = 1; i < n; ++i)
		m = std::max(m, x[i]);
	return m;
}

double sum(const double *x, std::size_t n) {
	double acc = 0.0;
	for (std::size_t i = 0; i < n; ++i)
		acc += x[i];
	return acc;
}

void scale(double alpha, double *x, std::size_t n) {
	for (std::size_t i = 0; i < n; ++i)
		x[i] *= alpha;
}

double distance_moment(const double *p, std::size_t n, std::size_t target, int power) {
	double acc = 0.0;
	const double a = static_cast<double>(target);
	for (std::size_t i = 0; i < n; ++i) {
		const double w = std::abs(static_cast<double>(i) - a);
		acc += p[i] * (power == 1 ? w : w * w);
	}
	return acc;
}

} // namespace

const KernelTable kScalarTable{dot, axpy, max, sum, scale, distance_moment};

} // namespace wts::kernels::detail
