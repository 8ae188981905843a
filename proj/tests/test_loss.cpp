#include "oracles.hpp"

#include "wts/error.hpp"
#include "wts/loss.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wts;

namespace {

std::vector<double> one_hot_logits(std::size_t n, std::size_t at) {
	std::vector<double> z(n, -1e4);
	z[at] = 0.0;
	return z;
}

} // namespace

TEST_CASE("softmax") {
	SUBCASE("uniform") {
		for (double p : softmax(std::vector<double>{0, 0, 0, 0}))
			CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
	}
	SUBCASE("large logits do not overflow") {
		const auto p = softmax(std::vector<double>{1000.0, 0.0});
		CHECK(p[0] == 1.0);
		CHECK(p[1] >= 0.0);
		CHECK(p[1] < 1e-300);
	}
	SUBCASE("log-probabilities") {
		const auto p = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0)});
		const double expect[] = {0.1, 0.2, 0.3, 0.4};
		for (int i = 0; i < 4; ++i)
			CHECK(std::abs(p[i] - expect[i]) < 1e-15);
	}
	SUBCASE("sums to one") {
		std::mt19937_64 rng(5);
		for (int trial = 0; trial < 50; ++trial) {
			const auto p = softmax(oracle::random_vector(rng, 300, -30, 30));
			double s = 0.0;
			for (double v : p) {
				CHECK(v >= 0.0);
				s += v;
			}
			CHECK(std::abs(s - 1.0) < 1e-12);
		}
	}
	CHECK_THROWS_AS(softmax(std::vector<double>{0.0, NAN}), Error);
	CHECK_THROWS_AS(softmax(std::vector<double>{0.0, INFINITY}), Error);
}

TEST_CASE("cross_entropy") {
	SUBCASE("uniform over four tokens") {
		for (Token a = 0; a < 4; ++a)
			CHECK(cross_entropy(std::vector<double>(4, 0.0), a).value == doctest::Approx(std::log(4.0)).epsilon(1e-14));
	}
	SUBCASE("concentrated prediction") {
		std::vector<double> z(8, 0.0);
		z[3] = 60.0;
		CHECK(cross_entropy(z, 3).value < 1e-20);
	}
	SUBCASE("gradient is p - onehot") {
		const std::vector<double> z{0.3, -1.2, 2.0, 0.1};
		const auto out = cross_entropy(z, 2);
		const auto p = oracle::naive_softmax(z);
		for (int j = 0; j < 4; ++j)
			CHECK(out.grad[j] == doctest::Approx(p[j] - (j == 2)).epsilon(1e-14));
	}
	CHECK_THROWS_AS(cross_entropy(std::vector<double>(4, 0.0), 4), Error);
	CHECK_THROWS_AS(cross_entropy(std::vector<double>(4, 0.0), -1), Error);
}

TEST_CASE("wasserstein_loss values") {
	SUBCASE("uniform d=4, target 1") {
		const auto out = wasserstein_loss(std::vector<double>(4, 0.0), 1, 1.0, 1.0);
		CHECK(out.value == doctest::Approx(1.0).epsilon(1e-15));
		// the transport-plan oracle agrees
		CHECK(oracle::w1_transport_plan({0.25, 0.25, 0.25, 0.25}, {0, 1, 0, 0}, 1.0) == doctest::Approx(1.0));
	}
	SUBCASE("zero at the target") {
		for (PowerMode mode : {PowerMode::Raw, PowerMode::PthPower})
			for (double p : {1.0, 2.0, 3.5}) {
				const auto out = wasserstein_loss(one_hot_logits(16, 5), 5, p, 0.3, mode);
				CHECK(out.value == 0.0);
				for (double g : out.grad)
					CHECK(g == 0.0);
			}
	}
	SUBCASE("degenerate prediction reduces to r|j - a|") {
		const double r = 30.0 / 63.0;
		for (std::size_t j = 0; j < 64; j += 7)
			for (Token a = 0; a < 64; a += 5) {
				const double expect = r * std::abs(static_cast<double>(j) - a);
				CHECK(wasserstein_loss(one_hot_logits(64, j), a, 1.0, r, PowerMode::Raw).value == expect);
				CHECK(wasserstein_loss(one_hot_logits(64, j), a, 2.0, r, PowerMode::Raw).value == expect);
			}
	}
	SUBCASE("p-th power mode is the raw value to the p") {
		std::mt19937_64 rng(17);
		for (int trial = 0; trial < 20; ++trial) {
			const auto z = oracle::random_vector(rng, 32, -3, 3);
			for (double p : {1.0, 2.0, 3.0}) {
				const double raw = wasserstein_loss(z, 7, p, 0.2, PowerMode::Raw).value;
				const double pow_ = wasserstein_loss(z, 7, p, 0.2, PowerMode::PthPower).value;
				CHECK(pow_ == doctest::Approx(std::pow(raw, p)).epsilon(1e-12));
			}
		}
	}
	SUBCASE("translation invariance") {
		// support and target shifted together
		std::vector<double> z(40, -50.0);
		const double shape[] = {0.2, 1.0, -0.4, 0.7, 0.0};
		for (int shift : {0, 9, 20}) {
			for (int i = 0; i < 5; ++i)
				z[static_cast<std::size_t>(10 + shift + i)] = shape[i];
			const double v = wasserstein_loss(z, 12 + shift, 1.0, 0.5).value;
			static double first = v;
			CHECK(v == doctest::Approx(first).epsilon(1e-12));
			std::fill(z.begin(), z.end(), -50.0);
		}
	}
	SUBCASE("distance awareness versus cross-entropy") {
		const Token a = 10;
		const auto near = one_hot_logits(32, 12), far = one_hot_logits(32, 25);
		for (double p : {1.0, 2.0}) {
			CHECK(wasserstein_loss(near, a, p, 0.1, PowerMode::Raw).value <
			      wasserstein_loss(far, a, p, 0.1, PowerMode::Raw).value);
		}
		CHECK(cross_entropy(near, a).value == cross_entropy(far, a).value);
	}
	SUBCASE("errors") {
		CHECK_THROWS_AS(wasserstein_loss(std::vector<double>(4, 0.0), 0, 0.5, 1.0), Error);
		CHECK_THROWS_AS(wasserstein_loss(std::vector<double>(4, 0.0), 0, 1.0, 0.0), Error);
		CHECK_THROWS_AS(wasserstein_loss(std::vector<double>(4, 0.0), 9, 1.0, 1.0), Error);
	}
}

TEST_CASE("w1_oracle") {
	CHECK(w1_oracle(std::vector<double>{0.1, 0.4, 0.5}, std::vector<double>{0.1, 0.4, 0.5}, 2.0) == 0.0);
	CHECK(w1_oracle(std::vector<double>{1, 0, 0, 0}, std::vector<double>{0, 0, 0, 1}, 1.0) == 3.0);
	CHECK_THROWS_AS(w1_oracle(std::vector<double>{0.5, 0.4}, std::vector<double>{0.5, 0.5}, 1.0), Error);

	SUBCASE("matches the transport plan for arbitrary pairs") {
		std::mt19937_64 rng(3);
		for (int trial = 0; trial < 200; ++trial) {
			const auto p = oracle::naive_softmax(oracle::random_vector(rng, 24, -2, 2));
			const auto q = oracle::naive_softmax(oracle::random_vector(rng, 24, -2, 2));
			CHECK(w1_oracle(p, q, 0.7) == doctest::Approx(oracle::w1_transport_plan(p, q, 0.7)).epsilon(1e-12));
		}
	}
	SUBCASE("equals the closed form against a point mass") {
		std::mt19937_64 rng(11);
		for (std::size_t d : {4u, 64u, 512u}) {
			const double r = 30.0 / static_cast<double>(d - 1);
			for (int trial = 0; trial < 100; ++trial) {
				const auto z = oracle::random_vector(rng, d, -4, 4);
				const Token a = static_cast<Token>(rng() % d);
				std::vector<double> target(d, 0.0);
				target[static_cast<std::size_t>(a)] = 1.0;
				const double closed = wasserstein_loss(z, a, 1.0, r, PowerMode::Raw).value;
				const double ref = w1_oracle(softmax(z), target, r);
				CHECK(std::abs(closed - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
			}
		}
	}
}

TEST_CASE("analytic gradients match central differences") {
	std::mt19937_64 rng(2024);
	const double r = 0.37;
	struct Case {
		const char *name;
		LossKind kind;
	};
	const Case cases[] = {{"ce", LossKind::cross_entropy()},
	                      {"w1", LossKind::wasserstein(1.0)},
	                      {"w2", LossKind::wasserstein(2.0)},
	                      {"w2 raw", LossKind::wasserstein(2.0, PowerMode::Raw)},
	                      {"w1.5", LossKind::wasserstein(1.5)}};
	for (const Case &c : cases) {
		double worst = 0.0;
		for (int trial = 0; trial < 100; ++trial) {
			const auto z = oracle::random_vector(rng, 16, -2, 2);
			const Token a = static_cast<Token>(rng() % 16);
			const auto analytic = row_loss(z, a, c.kind, r, 16).grad;
			const auto numeric = oracle::central_difference(
			    [&](const std::vector<double> &x) { return row_loss(x, a, c.kind, r, 16).value; }, z);
			worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
		}
		INFO(c.name);
		CHECK(worst < 1e-5);
	}
}

TEST_CASE("gradients sum to zero") {
	std::mt19937_64 rng(8);
	for (int trial = 0; trial < 100; ++trial) {
		const auto z = oracle::random_vector(rng, 64, -5, 5);
		const Token a = static_cast<Token>(rng() % 64);
		for (const LossKind &k : {LossKind::cross_entropy(), LossKind::wasserstein(1.0), LossKind::wasserstein(2.0),
		                          LossKind::wasserstein(2.0, PowerMode::Raw)}) {
			double s = 0.0;
			for (double g : row_loss(z, a, k, 0.1, 64).grad)
				s += g;
			CHECK(std::abs(s) < 1e-10);
		}
	}
}

TEST_CASE("raw mode near zero loss stays finite") {
	std::vector<double> z(16, -30.0);
	z[4] = 30.0;
	const auto out = wasserstein_loss(z, 4, 2.0, 0.1, PowerMode::Raw);
	CHECK(out.value > 0.0);
	for (double g : out.grad)
		CHECK(std::isfinite(g));
}

TEST_CASE("batch_loss") {
	std::mt19937_64 rng(99);
	const std::size_t rows = 6, cols = 10, values = 8;
	Matrix logits(rows, cols);
	for (double &v : logits.data)
		v = std::uniform_real_distribution<double>(-2, 2)(rng);
	const std::vector<Token> targets{0, 3, 7, 8, 5, 2}; // 8 is a special token
	const LossKind w1 = LossKind::wasserstein(1.0);

	SUBCASE("single unmasked row equals the row loss") {
		std::vector<std::uint8_t> mask(rows, 0);
		mask[2] = 1;
		const auto b = batch_loss(logits, targets, w1, mask, 0.5, values);
		const auto row = row_loss(logits.row(2), 7, w1, 0.5, values);
		CHECK(b.value == row.value);
		for (std::size_t j = 0; j < cols; ++j) {
			CHECK(b.grad[2 * cols + j] == row.grad[j]);
			CHECK(b.grad[0 * cols + j] == 0.0);
		}
	}
	SUBCASE("duplicating a row keeps the mean") {
		Matrix two(2, cols);
		std::copy(logits.row(1).begin(), logits.row(1).end(), two.row(0).begin());
		std::copy(logits.row(1).begin(), logits.row(1).end(), two.row(1).begin());
		const auto once = row_loss(logits.row(1), 3, w1, 0.5, values);
		const auto twice = batch_loss(two, std::vector<Token>{3, 3}, w1, {}, 0.5, values);
		CHECK(twice.value == once.value);
	}
	SUBCASE("matches a per-row loop") {
		for (const LossKind &k : {LossKind::cross_entropy(), w1, LossKind::wasserstein(2.0)}) {
			const auto b = batch_loss(logits, targets, k, {}, 0.5, values);
			double acc = 0.0;
			for (std::size_t i = 0; i < rows; ++i) {
				const auto row = row_loss(logits.row(i), targets[i], k, 0.5, values);
				acc += row.value;
				for (std::size_t j = 0; j < cols; ++j)
					CHECK(std::abs(b.grad[i * cols + j] - row.grad[j] / rows) < 1e-12);
			}
			CHECK(std::abs(b.value - acc / rows) < 1e-12);
		}
	}
	SUBCASE("special-token targets use cross-entropy, special logits get no ordinal gradient") {
		const auto special = row_loss(logits.row(3), 8, w1, 0.5, values);
		CHECK(special.value == cross_entropy(logits.row(3), 8).value);
		const auto ordinal = row_loss(logits.row(0), 0, w1, 0.5, values);
		CHECK(ordinal.grad[8] == 0.0);
		CHECK(ordinal.grad[9] == 0.0);
	}
	SUBCASE("all masked") {
		CHECK_THROWS_AS(batch_loss(logits, targets, w1, std::vector<std::uint8_t>(rows, 0), 0.5, values), Error);
	}
	SUBCASE("misaligned targets") {
		CHECK_THROWS_AS(batch_loss(logits, std::vector<Token>{1, 2}, w1, {}, 0.5, values), Error);
	}
}

TEST_CASE("LossKind parsing") {
	CHECK(LossKind::parse("ce").type == LossKind::Type::CrossEntropy);
	CHECK(LossKind::parse("w1").p == 1.0);
	CHECK(LossKind::parse("w2").p == 2.0);
	CHECK(LossKind::parse("w2", true).mode == PowerMode::Raw);
	CHECK(LossKind::parse("w2").mode == PowerMode::PthPower);
	CHECK_THROWS_AS(LossKind::parse("mse"), Error);
}
