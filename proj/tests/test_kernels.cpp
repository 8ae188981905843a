#include "oracles.hpp"

#include "wts/error.hpp"
#include "wts/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wts;

namespace {

// Lengths around the vector width and its remainders.
const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 64, 255, 1026};

double close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace

TEST_CASE("scalar reference kernels") {
	const auto &k = kernels::scalar_table();
	const double a[] = {1, 2, 3, 4, 5};
	const double b[] = {5, 4, 3, 2, 1};
	CHECK(k.dot(a, b, 5) == 35.0);
	CHECK(k.sum(a, 5) == 15.0);
	CHECK(k.max(b, 5) == 5.0);
	double y[] = {1, 1, 1, 1, 1};
	k.axpy(2.0, a, y, 5);
	CHECK(y[4] == 11.0);
	k.scale(0.5, y, 5);
	CHECK(y[0] == 1.5);
	const double p[] = {0.25, 0.25, 0.25, 0.25};
	CHECK(k.distance_moment(p, 4, 1, 1) == 1.0);
	CHECK(k.distance_moment(p, 4, 1, 2) == 1.5);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
	const kernels::KernelTable *v = kernels::avx2_table();
	if (!v) {
		MESSAGE("AVX2 kernels unavailable on this machine; skipped");
		return;
	}
	const auto &s = kernels::scalar_table();
	std::mt19937_64 rng(1);
	for (std::size_t n : kLengths) {
		CAPTURE(n);
		for (int trial = 0; trial < 20; ++trial) {
			auto x = oracle::random_vector(rng, n, -3.0, 3.0);
			auto y = oracle::random_vector(rng, n, -3.0, 3.0);
			CHECK(close(v->dot(x.data(), y.data(), n), s.dot(x.data(), y.data(), n), 1e-13 * (n + 1)));
			CHECK(close(v->sum(x.data(), n), s.sum(x.data(), n), 1e-13 * (n + 1)));
			if (n > 0)
				CHECK(v->max(x.data(), n) == s.max(x.data(), n));

			auto y1 = y, y2 = y;
			s.axpy(0.7, x.data(), y1.data(), n);
			v->axpy(0.7, x.data(), y2.data(), n);
			for (std::size_t i = 0; i < n; ++i)
				CHECK(close(y2[i], y1[i], 1e-15));
			s.scale(-1.3, y1.data(), n);
			v->scale(-1.3, y2.data(), n);
			for (std::size_t i = 0; i < n; ++i)
				CHECK(close(y2[i], y1[i], 1e-15));

			if (n == 0)
				continue;
			auto p = oracle::random_vector(rng, n, 0.0, 1.0);
			const std::size_t target = rng() % n;
			for (int power : {1, 2})
				CHECK(close(v->distance_moment(p.data(), n, target, power), s.distance_moment(p.data(), n, target, power),
				            1e-13 * (n + 1)));
		}
	}
}

TEST_CASE("backend selection") {
	const kernels::Backend before = kernels::active_backend();
	kernels::set_backend(kernels::Backend::Scalar);
	CHECK(kernels::active_backend() == kernels::Backend::Scalar);
	CHECK(&kernels::active() == &kernels::scalar_table());
	if (kernels::avx2_available()) {
		kernels::set_backend(kernels::Backend::Avx2);
		CHECK(kernels::active_backend() == kernels::Backend::Avx2);
		CHECK(&kernels::active() == kernels::avx2_table());
	} else {
		CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::Avx2), Error);
	}
	kernels::set_backend(before);
	CHECK(kernels::backend_name(kernels::Backend::Scalar) == "scalar");
}
