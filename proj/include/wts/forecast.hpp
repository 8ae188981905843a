#pragma once

// Autoregressive sample-path forecasting and its decoding back to the
// original scale.

#include "wts/matrix.hpp"
#include "wts/model.hpp"
#include "wts/quantizer.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

namespace wts {

using TokenMatrix = BasicMatrix<Token>;

/// Running next-token predictor over a growing prefix.
class NextTokenSession {
public:
	virtual ~NextTokenSession() = default;
	/// Logits over the full vocabulary for the token after the current prefix.
	virtual std::span<const double> logits() const = 0;
	virtual void push(Token token) = 0;
};

class NextTokenModel {
public:
	virtual ~NextTokenModel() = default;
	virtual std::unique_ptr<NextTokenSession> start(std::span<const Token> context) const = 0;
	/// Ordinal value tokens are 0..value_tokens()-1; anything above is special.
	virtual std::size_t value_tokens() const = 0;
};

/// Adapts the transformer through its KV-cached DecodeSession.
class TransformerPredictor final : public NextTokenModel {
public:
	explicit TransformerPredictor(const Model &model) : model_(&model) {}
	std::unique_ptr<NextTokenSession> start(std::span<const Token> context) const override;
	std::size_t value_tokens() const override { return model_->config().value_tokens(); }

private:
	const Model *model_;
};

/// Draws one value token from softmax(logits / temperature) with every
/// special token masked out.
Token sample_token(std::span<const double> logits, std::size_t value_tokens, double temperature,
                   std::mt19937_64 &rng);

/// Per-path generator seed; paths are independent of the order they run in.
inline std::uint64_t path_seed(std::uint64_t seed, std::size_t path) noexcept {
	return seed ^ static_cast<std::uint64_t>(path);
}

/// n_paths x horizon matrix of sampled value tokens.
TokenMatrix sample_paths(const NextTokenModel &model, std::span<const Token> context, std::size_t horizon,
                         std::size_t n_paths, std::uint64_t seed, double temperature = 1.0);

/// detokenize(token) * scale for every cell.
Matrix decode_paths(const TokenMatrix &token_paths, const Grid &grid, double scale);

/// Empirical quantile with linear interpolation between order statistics:
/// position h = (n - 1) q in the sorted sample.
double empirical_quantile(std::span<const double> sorted, double level);

/// 0.1, 0.2, ..., 0.9
std::vector<double> default_levels();

struct Summary {
	std::vector<double> median;
	Matrix quantiles; // levels x horizon
};

/// Per-step quantiles across paths (rows of decoded_paths).
Summary summarize(const Matrix &decoded_paths, std::span<const double> levels);

struct ForecastBundle {
	TokenMatrix token_paths;
	Matrix decoded_paths;
	std::vector<double> median;
	Matrix quantiles;
	std::vector<double> levels;
};

struct ForecastOptions {
	std::size_t horizon = 1;
	std::size_t n_paths = 20;
	std::uint64_t seed = 0;
	double temperature = 1.0;
	std::vector<double> levels = default_levels();
};

ForecastBundle forecast(const NextTokenModel &model, std::span<const Token> context, const Grid &grid, double scale,
                        const ForecastOptions &opts);

} // namespace wts
