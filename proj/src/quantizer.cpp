#include "wts/quantizer.hpp"

#include "wts/error.hpp"

#include <algorithm>
#include <cmath>

namespace wts {

void validate(const TimeSeries &ts) {
	if (ts.values.empty())
		throw Error(ErrorCategory::Data, "series '" + ts.id + "': empty series");
	for (double v : ts.values)
		if (!std::isfinite(v))
			throw Error(ErrorCategory::Data, "series '" + ts.id + "': non-finite value");
	if (ts.horizon < 1)
		throw Error(ErrorCategory::Data, "series '" + ts.id + "': horizon must be >= 1");
	if (ts.season_length < 1)
		throw Error(ErrorCategory::Data, "series '" + ts.id + "': season_length must be >= 1");
}

Grid::Grid(std::size_t d, double y_min, double y_max) : y_min_(y_min), y_max_(y_max) {
	if (d < 2)
		throw Error(ErrorCategory::Config, "grid size must be >= 2");
	if (!std::isfinite(y_min) || !std::isfinite(y_max) || !(y_min < y_max))
		throw Error(ErrorCategory::Config, "grid bounds must satisfy y_min < y_max");
	const double width = y_max - y_min;
	const double denom = static_cast<double>(d - 1);
	spacing_ = width / denom;
	centroids_.resize(d);
	// i * width / (d-1) rather than i * spacing keeps the last centroid at y_max exactly.
	for (std::size_t i = 0; i < d; ++i)
		centroids_[i] = y_min + static_cast<double>(i) * width / denom;
	centroids_.back() = y_max;
	boundaries_.resize(d - 1);
	for (std::size_t i = 0; i + 1 < d; ++i)
		boundaries_[i] = 0.5 * (centroids_[i] + centroids_[i + 1]);
}

double fit_scale(std::span<const double> train_values) {
	if (train_values.empty())
		throw Error(ErrorCategory::Data, "empty series");
	double acc = 0.0;
	for (double v : train_values) {
		if (!std::isfinite(v))
			throw Error(ErrorCategory::Data, "non-finite value in scale input");
		acc += std::abs(v);
	}
	const double s = acc / static_cast<double>(train_values.size());
	return s > 0.0 ? s : 1.0;
}

Token tokenize(double y, const Grid &grid) {
	if (!std::isfinite(y))
		throw Error(ErrorCategory::Data, "cannot tokenize a non-finite value");
	y = std::clamp(y, grid.y_min(), grid.y_max());
	const auto b = grid.boundaries();
	// count of boundaries b with b <= y
	return static_cast<Token>(std::upper_bound(b.begin(), b.end(), y) - b.begin());
}

double detokenize(Token token, const Grid &grid) {
	if (token < 0 || static_cast<std::size_t>(token) >= grid.size())
		throw Error(ErrorCategory::Data, "token " + std::to_string(token) + " outside value range");
	return grid.centroids()[static_cast<std::size_t>(token)];
}

TokenizedSeries encode_series(std::span<const double> values, const Grid &grid, std::span<const double> scale_from) {
	TokenizedSeries out;
	out.scale = fit_scale(scale_from);
	out.grid_size = grid.size();
	out.grid_min = grid.y_min();
	out.grid_max = grid.y_max();
	out.tokens.reserve(values.size());
	for (double v : values)
		out.tokens.push_back(tokenize(v / out.scale, grid));
	return out;
}

TokenizedSeries encode_series(const TimeSeries &ts, const Grid &grid, std::span<const double> scale_from) {
	validate(ts);
	return encode_series(std::span<const double>(ts.values), grid, scale_from);
}

std::vector<double> decode_series(std::span<const Token> tokens, const Grid &grid, double scale) {
	std::vector<double> out;
	out.reserve(tokens.size());
	for (Token t : tokens)
		out.push_back(detokenize(t, grid) * scale);
	return out;
}

} // namespace wts
