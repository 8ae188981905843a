#include "wts/forecast.hpp"

#include "wts/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wts {

namespace {

class TransformerSession final : public NextTokenSession {
public:
	TransformerSession(const Model &model, std::span<const Token> context) : session_(model, context) {}
	std::span<const double> logits() const override { return session_.logits(); }
	void push(Token token) override { session_.push(token); }

private:
	DecodeSession session_;
};

// uniform double in [0, 1) from the top 53 bits
double unit_uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

std::unique_ptr<NextTokenSession> TransformerPredictor::start(std::span<const Token> context) const {
	return std::make_unique<TransformerSession>(*model_, context);
}

Token sample_token(std::span<const double> logits, std::size_t value_tokens, double temperature,
                   std::mt19937_64 &rng) {
	if (value_tokens == 0 || value_tokens > logits.size())
		throw Error(ErrorCategory::Config, "sample_token: value token count exceeds the logit vector");
	if (!(temperature > 0.0) || !std::isfinite(temperature))
		throw Error(ErrorCategory::Config, "temperature must be > 0");
	const auto values = logits.first(value_tokens);
	double m = -std::numeric_limits<double>::infinity();
	for (double z : values) {
		if (!std::isfinite(z))
			throw Error(ErrorCategory::Numeric, "non-finite logit during sampling");
		m = std::max(m, z);
	}
	std::vector<double> cdf(value_tokens);
	double acc = 0.0;
	for (std::size_t i = 0; i < value_tokens; ++i) {
		acc += std::exp((values[i] - m) / temperature);
		cdf[i] = acc;
	}
	const double u = unit_uniform(rng) * acc;
	const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
	return static_cast<Token>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), value_tokens - 1));
}

TokenMatrix sample_paths(const NextTokenModel &model, std::span<const Token> context, std::size_t horizon,
                         std::size_t n_paths, std::uint64_t seed, double temperature) {
	if (horizon == 0)
		throw Error(ErrorCategory::Config, "forecast horizon must be >= 1");
	if (n_paths == 0)
		throw Error(ErrorCategory::Config, "n_paths must be >= 1");
	if (context.empty())
		throw Error(ErrorCategory::Data, "forecast context is empty");
	TokenMatrix out(n_paths, horizon);
	for (std::size_t p = 0; p < n_paths; ++p) {
		std::mt19937_64 rng(path_seed(seed, p));
		auto session = model.start(context);
		for (std::size_t t = 0; t < horizon; ++t) {
			const Token tok = sample_token(session->logits(), model.value_tokens(), temperature, rng);
			out(p, t) = tok;
			if (t + 1 < horizon)
				session->push(tok);
		}
	}
	return out;
}

Matrix decode_paths(const TokenMatrix &token_paths, const Grid &grid, double scale) {
	Matrix out(token_paths.rows, token_paths.cols);
	for (std::size_t i = 0; i < token_paths.data.size(); ++i)
		out.data[i] = detokenize(token_paths.data[i], grid) * scale;
	return out;
}

double empirical_quantile(std::span<const double> sorted, double level) {
	if (sorted.empty())
		throw Error(ErrorCategory::Data, "quantile of an empty sample");
	if (!(level >= 0.0 && level <= 1.0))
		throw Error(ErrorCategory::Config, "quantile level must lie in [0, 1]");
	const double h = static_cast<double>(sorted.size() - 1) * level;
	const auto lo = static_cast<std::size_t>(std::floor(h));
	const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
	const double frac = h - static_cast<double>(lo);
	if (frac == 0.0)
		return sorted[lo];
	return std::min(sorted[lo] + frac * (sorted[hi] - sorted[lo]), sorted[hi]);
}

std::vector<double> default_levels() {
	std::vector<double> levels;
	for (int i = 1; i <= 9; ++i)
		levels.push_back(i / 10.0);
	return levels;
}

Summary summarize(const Matrix &decoded_paths, std::span<const double> levels) {
	if (decoded_paths.rows == 0 || decoded_paths.cols == 0)
		throw Error(ErrorCategory::Data, "summarize: no sample paths");
	Summary s;
	s.median.resize(decoded_paths.cols);
	s.quantiles = Matrix(levels.size(), decoded_paths.cols);
	std::vector<double> column(decoded_paths.rows);
	for (std::size_t t = 0; t < decoded_paths.cols; ++t) {
		for (std::size_t p = 0; p < decoded_paths.rows; ++p)
			column[p] = decoded_paths(p, t);
		std::sort(column.begin(), column.end());
		s.median[t] = empirical_quantile(column, 0.5);
		for (std::size_t q = 0; q < levels.size(); ++q)
			s.quantiles(q, t) = empirical_quantile(column, levels[q]);
	}
	return s;
}

ForecastBundle forecast(const NextTokenModel &model, std::span<const Token> context, const Grid &grid, double scale,
                        const ForecastOptions &opts) {
	ForecastBundle b;
	b.token_paths = sample_paths(model, context, opts.horizon, opts.n_paths, opts.seed, opts.temperature);
	b.decoded_paths = decode_paths(b.token_paths, grid, scale);
	Summary s = summarize(b.decoded_paths, opts.levels);
	b.median = std::move(s.median);
	b.quantiles = std::move(s.quantiles);
	b.levels = opts.levels;
	return b;
}

} // namespace wts
