#include "wts/trainer.hpp"

#include "wts/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wts {

void TrainConfig::validate() const {
	if (steps < 1)
		throw Error(ErrorCategory::Config, "steps must be >= 1");
	if (!(lr_initial > 0.0) || !std::isfinite(lr_initial))
		throw Error(ErrorCategory::Config, "initial learning rate must be > 0");
	if (batch_size < 1)
		throw Error(ErrorCategory::Config, "batch_size must be >= 1");
}

double TrainConfig::learning_rate(std::size_t step) const noexcept {
	return lr_initial * (1.0 - static_cast<double>(step) / static_cast<double>(steps));
}

WindowSampler::WindowSampler(std::span<const TokenizedSeries> dataset, std::size_t context_length)
    : dataset_(dataset), context_(context_length) {
	cumulative_.reserve(dataset.size());
	for (const TokenizedSeries &s : dataset) {
		// end positions 1..n-1 each give one (input, target) window
		total_ += s.tokens.size() > 1 ? s.tokens.size() - 1 : 0;
		cumulative_.push_back(total_);
	}
	if (total_ == 0)
		throw Error(ErrorCategory::Data, "training set has no series with at least two tokens");
}

Window WindowSampler::sample(std::mt19937_64 &rng) const {
	std::uniform_int_distribution<std::size_t> pick(0, total_ - 1);
	const std::size_t k = pick(rng);
	const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), k);
	const std::size_t si = static_cast<std::size_t>(it - cumulative_.begin());
	const std::size_t before = si == 0 ? 0 : cumulative_[si - 1];
	const std::size_t end = k - before + 1; // index of the last target
	const std::size_t start = end > context_ ? end - context_ : 0;
	const auto &tok = dataset_[si].tokens;
	Window w;
	w.inputs.assign(tok.begin() + static_cast<std::ptrdiff_t>(start), tok.begin() + static_cast<std::ptrdiff_t>(end));
	w.targets.assign(tok.begin() + static_cast<std::ptrdiff_t>(start + 1),
	                 tok.begin() + static_cast<std::ptrdiff_t>(end + 1));
	return w;
}

TrainResult train(Model &model, std::span<const TokenizedSeries> dataset, const TrainConfig &tc, double r) {
	tc.validate();
	if (dataset.empty())
		throw Error(ErrorCategory::Data, "training set is empty");
	const ModelConfig &c = model.config();
	const std::size_t V = c.vocab_size;
	for (const TokenizedSeries &s : dataset)
		for (Token t : s.tokens)
			if (t < 0 || static_cast<std::size_t>(t) >= V)
				throw Error(ErrorCategory::Data, "training token outside the model vocabulary");

	WindowSampler sampler(dataset, c.context_length);
	std::mt19937_64 rng(tc.seed);
	const std::size_t n = model.parameter_count();
	std::vector<double> grad(n), m1(n, 0.0), m2(n, 0.0);
	std::vector<ForwardCache> caches(tc.batch_size);
	std::vector<Window> windows(tc.batch_size);

	TrainResult result;
	result.history.reserve(tc.steps);
	auto params = model.parameters();
	double b1t = 1.0, b2t = 1.0;

	for (std::size_t step = 0; step < tc.steps; ++step) {
		std::size_t rows = 0;
		for (std::size_t b = 0; b < tc.batch_size; ++b) {
			windows[b] = sampler.sample(rng);
			forward(model, windows[b].inputs, caches[b]);
			rows += windows[b].inputs.size();
		}

		// one mean over every position in the batch
		Matrix logits(rows, V);
		std::vector<Token> targets;
		targets.reserve(rows);
		std::size_t off = 0;
		for (std::size_t b = 0; b < tc.batch_size; ++b) {
			const std::size_t T = windows[b].inputs.size();
			std::copy_n(caches[b].logits.data.begin(), T * V, logits.data.begin() + static_cast<std::ptrdiff_t>(off * V));
			targets.insert(targets.end(), windows[b].targets.begin(), windows[b].targets.end());
			off += T;
		}
		std::vector<std::uint8_t> mask(rows);
		for (std::size_t i = 0; i < rows; ++i)
			mask[i] = targets[i] != c.pad_token();
		const LossOutput lo = batch_loss(logits, targets, tc.loss, mask, r, c.value_tokens());
		if (!std::isfinite(lo.value)) {
			std::ostringstream os;
			os << "training diverged at step " << step << ": loss is " << lo.value;
			throw Error(ErrorCategory::Numeric, os.str());
		}

		std::fill(grad.begin(), grad.end(), 0.0);
		off = 0;
		for (std::size_t b = 0; b < tc.batch_size; ++b) {
			backward_from_logits(model, caches[b], std::span<const double>(lo.grad).subspan(off * V), grad);
			off += windows[b].inputs.size();
		}

		const double lr = tc.learning_rate(step);
		b1t *= tc.beta1;
		b2t *= tc.beta2;
		for (std::size_t i = 0; i < n; ++i) {
			m1[i] = tc.beta1 * m1[i] + (1.0 - tc.beta1) * grad[i];
			m2[i] = tc.beta2 * m2[i] + (1.0 - tc.beta2) * grad[i] * grad[i];
			const double mhat = m1[i] / (1.0 - b1t);
			const double vhat = m2[i] / (1.0 - b2t);
			params[i] -= lr * mhat / (std::sqrt(vhat) + tc.adam_eps);
			if (!std::isfinite(params[i])) {
				std::ostringstream os;
				os << "training diverged at step " << step << ": non-finite parameter " << i;
				throw Error(ErrorCategory::Numeric, os.str());
			}
		}
		result.history.push_back({step, lr, lo.value});
	}
	std::ostringstream os;
	os << rng;
	result.rng_state = os.str();
	return result;
}

} // namespace wts
