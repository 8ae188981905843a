#include "wts/loss.hpp"

#include "wts/error.hpp"
#include "wts/kernels.hpp"

#include <cmath>
#include <string>

namespace wts {

LossKind LossKind::parse(std::string_view name, bool raw_wasserstein) {
	const PowerMode mode = raw_wasserstein ? PowerMode::Raw : PowerMode::PthPower;
	if (name == "ce")
		return cross_entropy();
	if (name == "w1")
		return wasserstein(1.0, mode);
	if (name == "w2")
		return wasserstein(2.0, mode);
	throw Error(ErrorCategory::Config, "unknown loss '" + std::string(name) + "' (expected ce, w1 or w2)");
}

std::string_view LossKind::name() const noexcept {
	if (type == Type::CrossEntropy)
		return "ce";
	if (p == 1.0)
		return "w1";
	if (p == 2.0)
		return "w2";
	return "wp";
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
	if (logits.empty())
		throw Error(ErrorCategory::Data, "softmax of an empty vector");
	for (double z : logits)
		if (!std::isfinite(z))
			throw Error(ErrorCategory::Numeric, "non-finite logit");
	const double m = kernels::max(logits);
	for (std::size_t i = 0; i < logits.size(); ++i)
		out[i] = std::exp(logits[i] - m);
	kernels::scale(1.0 / kernels::sum(out.first(logits.size())), out.first(logits.size()));
}

std::vector<double> softmax(std::span<const double> logits) {
	std::vector<double> out(logits.size());
	softmax_into(logits, out);
	return out;
}

namespace {

void check_target(Token target, std::size_t n) {
	if (target < 0 || static_cast<std::size_t>(target) >= n)
		throw Error(ErrorCategory::Data, "target token " + std::to_string(target) + " out of range");
}

} // namespace

LossOutput cross_entropy(std::span<const double> logits, Token target) {
	check_target(target, logits.size());
	LossOutput out;
	out.grad = softmax(logits);
	const double m = kernels::max(logits);
	double z = 0.0;
	for (double l : logits)
		z += std::exp(l - m);
	out.value = std::log(z) + m - logits[static_cast<std::size_t>(target)];
	if (out.value < 0.0)
		out.value = 0.0;
	out.grad[static_cast<std::size_t>(target)] -= 1.0;
	return out;
}

LossOutput wasserstein_loss(std::span<const double> logits, Token target, double p, double r, PowerMode mode) {
	check_target(target, logits.size());
	if (!(p >= 1.0) || !std::isfinite(p))
		throw Error(ErrorCategory::Config, "Wasserstein order p must be >= 1");
	if (!(r > 0.0) || !std::isfinite(r))
		throw Error(ErrorCategory::Config, "grid spacing r must be > 0");

	const std::size_t n = logits.size();
	const auto a = static_cast<std::size_t>(target);
	LossOutput out;
	out.grad = softmax(logits);
	std::span<const double> probs = out.grad;

	// w_i^p for every i; the integer orders go through the vector kernel.
	const bool integral = (p == 1.0 || p == 2.0);
	std::vector<double> wp;
	double moment;
	if (integral) {
		moment = kernels::distance_moment(probs, a, static_cast<int>(p));
	} else {
		wp.resize(n);
		for (std::size_t i = 0; i < n; ++i)
			wp[i] = std::pow(std::abs(static_cast<double>(i) - static_cast<double>(a)), p);
		moment = kernels::dot(probs, wp);
	}
	auto wpow = [&](std::size_t i) {
		if (!integral)
			return wp[i];
		const double w = std::abs(static_cast<double>(i) - static_cast<double>(a));
		return p == 1.0 ? w : w * w;
	};

	// d moment / d z_j = p_j (w_j^p - moment)
	double outer;
	if (mode == PowerMode::PthPower) {
		const double rp = p == 1.0 ? r : (p == 2.0 ? r * r : std::pow(r, p));
		out.value = rp * moment;
		outer = rp;
	} else {
		const double root = p == 1.0 ? moment : (p == 2.0 ? std::sqrt(moment) : std::pow(moment, 1.0 / p));
		out.value = r * root;
		if (moment == 0.0) {
			std::fill(out.grad.begin(), out.grad.end(), 0.0);
			return out;
		}
		outer = p == 1.0 ? r : r / p * std::pow(moment + kRawEpsilon, 1.0 / p - 1.0);
	}
	for (std::size_t j = 0; j < n; ++j)
		out.grad[j] = outer * out.grad[j] * (wpow(j) - moment);
	return out;
}

double w1_oracle(std::span<const double> probs_p, std::span<const double> probs_q, double r) {
	if (probs_p.size() != probs_q.size())
		throw Error(ErrorCategory::Data, "w1_oracle: distributions have different supports");
	double sp = 0.0, sq = 0.0;
	for (std::size_t i = 0; i < probs_p.size(); ++i) {
		sp += probs_p[i];
		sq += probs_q[i];
	}
	if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
		throw Error(ErrorCategory::Data, "w1_oracle: inputs must sum to 1");
	double cp = 0.0, cq = 0.0, acc = 0.0;
	for (std::size_t i = 0; i + 1 < probs_p.size(); ++i) {
		cp += probs_p[i];
		cq += probs_q[i];
		acc += std::abs(cp - cq);
	}
	return r * acc;
}

LossOutput row_loss(std::span<const double> logits, Token target, const LossKind &kind, double r,
                    std::size_t value_tokens) {
	check_target(target, logits.size());
	if (kind.type == LossKind::Type::CrossEntropy || static_cast<std::size_t>(target) >= value_tokens)
		return cross_entropy(logits, target);
	if (value_tokens == logits.size())
		return wasserstein_loss(logits, target, kind.p, r, kind.mode);
	// Special-token logits sit outside the ordinal support: they receive no gradient.
	LossOutput sub = wasserstein_loss(logits.first(value_tokens), target, kind.p, r, kind.mode);
	sub.grad.resize(logits.size(), 0.0);
	return sub;
}

LossOutput batch_loss(const Matrix &logits, std::span<const Token> targets, const LossKind &kind,
                      std::span<const std::uint8_t> mask, double r, std::size_t value_tokens) {
	if (targets.size() != logits.rows)
		throw Error(ErrorCategory::Data, "batch_loss: targets do not align with logit rows");
	if (!mask.empty() && mask.size() != logits.rows)
		throw Error(ErrorCategory::Data, "batch_loss: mask does not align with logit rows");
	if (value_tokens == 0 || value_tokens > logits.cols)
		throw Error(ErrorCategory::Config, "batch_loss: value token count exceeds vocabulary");

	std::size_t kept = 0;
	for (std::size_t i = 0; i < logits.rows; ++i)
		kept += mask.empty() || mask[i] != 0;
	if (kept == 0)
		throw Error(ErrorCategory::Data, "batch_loss: all positions masked");

	const double inv = 1.0 / static_cast<double>(kept);
	LossOutput out;
	out.grad.assign(logits.data.size(), 0.0);
	double acc = 0.0;
	for (std::size_t i = 0; i < logits.rows; ++i) {
		if (!mask.empty() && mask[i] == 0)
			continue;
		LossOutput row = row_loss(logits.row(i), targets[i], kind, r, value_tokens);
		acc += row.value;
		double *g = out.grad.data() + i * logits.cols;
		for (std::size_t j = 0; j < logits.cols; ++j)
			g[j] = row.grad[j] * inv;
	}
	out.value = acc * inv;
	return out;
}

} // namespace wts
