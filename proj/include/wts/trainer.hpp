#pragma once

#include "wts/loss.hpp"
#include "wts/model.hpp"
#include "wts/quantizer.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wts {

struct TrainConfig {
	std::size_t steps = 1000;
	double lr_initial = 1e-3;
	std::size_t batch_size = 8;
	LossKind loss = LossKind::cross_entropy();
	std::uint64_t seed = 0;
	// Adam moments
	double beta1 = 0.9;
	double beta2 = 0.999;
	double adam_eps = 1e-8;

	void validate() const;
	/// Linear decay to zero: lr_initial * (1 - step / steps).
	double learning_rate(std::size_t step) const noexcept;
};

struct StepRecord {
	std::size_t step = 0;
	double lr = 0.0;
	double loss = 0.0;
};

struct TrainResult {
	std::vector<StepRecord> history;
	/// Serialised state of the window-sampling generator after training.
	std::string rng_state;
};

/// One training window: inputs and their next-token targets.
struct Window {
	std::vector<Token> inputs;
	std::vector<Token> targets;
};

/// Draws training windows uniformly over (series, end position) pairs. Each
/// window has up to context_length inputs with next-token targets at every
/// position.
class WindowSampler {
public:
	WindowSampler(std::span<const TokenizedSeries> dataset, std::size_t context_length);

	Window sample(std::mt19937_64 &rng) const;
	std::size_t pair_count() const noexcept { return total_; }

private:
	std::span<const TokenizedSeries> dataset_;
	std::size_t context_;
	std::vector<std::size_t> cumulative_;
	std::size_t total_ = 0;
};

/// Runs tc.steps Adam steps on `model` in place. r is the grid spacing for
/// the Wasserstein kinds. Throws Error(Numeric) on a non-finite loss or
/// parameter.
TrainResult train(Model &model, std::span<const TokenizedSeries> dataset, const TrainConfig &tc, double r);

} // namespace wts
