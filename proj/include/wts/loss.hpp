#pragma once

// Cross-entropy and closed-form Wasserstein-p losses over token distributions.
//
// The target is a degenerate distribution on token a, and the ground metric
// between tokens i and j is r * |i - j| (distance between centroids). The
// optimal coupling is then forced and
//
//     W_p = r * (sum_i p_i |i - a|^p)^(1/p).
//
// All sums accumulate in double regardless of the caller's storage.

#include "wts/matrix.hpp"
#include "wts/quantizer.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace wts {

enum class PowerMode {
	Raw,      // r * M^(1/p), the distance itself
	PthPower, // r^p * M, same per-sample minimiser, no singular gradient at 0
};

struct LossKind {
	enum class Type { CrossEntropy, Wasserstein };

	Type type = Type::CrossEntropy;
	double p = 1.0;
	PowerMode mode = PowerMode::PthPower;

	static LossKind cross_entropy() { return {}; }
	static LossKind wasserstein(double p, PowerMode mode = PowerMode::PthPower) {
		return {Type::Wasserstein, p, mode};
	}

	/// Parses "ce", "w1" or "w2"; anything else is Error(Config).
	static LossKind parse(std::string_view name, bool raw_wasserstein = false);
	std::string_view name() const noexcept;
};

struct LossOutput {
	double value = 0.0;
	std::vector<double> grad;
};


/// Max-subtracted softmax. Non-finite logits are Error(Numeric).
std::vector<double> softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);

LossOutput cross_entropy(std::span<const double> logits, Token target);

/// Wasserstein-p between the softmax of `logits` and the point mass at
/// `target`, on a lattice with spacing r. With a zero loss in raw mode the
/// gradient is the zero vector; otherwise raw-mode gradients evaluate the root
/// at M + kRawEpsilon.
LossOutput wasserstein_loss(std::span<const double> logits, Token target, double p, double r,
                            PowerMode mode = PowerMode::PthPower);

inline constexpr double kRawEpsilon = 1e-12;

/// Reference 1-D Wasserstein-1 distance between two distributions on the
/// lattice, computed from cumulative distribution functions:
/// r * sum_i |F_P(i) - F_Q(i)|. Inputs must each sum to 1 within 1e-9.
double w1_oracle(std::span<const double> probs_p, std::span<const double> probs_q, double r);

/// Mean loss over unmasked rows of `logits`; the gradient is dL/dlogits for the
/// mean, zero on masked rows.
///
/// Rows whose target is an ordinal value (< value_tokens) use `kind` over the
/// first value_tokens logits. Rows targeting a special token above the value
/// range fall back to cross-entropy over the full row. mask[i] != 0 keeps row
/// i; an empty mask keeps every row.
LossOutput batch_loss(const Matrix &logits, std::span<const Token> targets, const LossKind &kind,
                      std::span<const std::uint8_t> mask, double r, std::size_t value_tokens);

/// Row-level dispatch used by batch_loss.
LossOutput row_loss(std::span<const double> logits, Token target, const LossKind &kind, double r,
                    std::size_t value_tokens);

} // namespace wts
