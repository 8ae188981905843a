#pragma once

// Mean-absolute scaling and uniform-grid quantization of real-valued series.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wts {

struct TimeSeries {
	std::string id;
	std::vector<double> values;
	std::size_t season_length = 1;
	std::size_t horizon = 1;
};

/// Throws Error(Data) if the series violates its invariants.
void validate(const TimeSeries &ts);

using Token = std::int32_t;

/// Uniform quantization lattice over [y_min, y_max] with d centroids.
///
/// Value tokens are 0..d-1. The two special tokens sit right above the value
/// range: pad_token() == d and eos_token() == d + 1.
class Grid {
public:
	static constexpr std::size_t kStandardSize = 4094;
	static constexpr double kStandardMin = -15.0;
	static constexpr double kStandardMax = 15.0;

	/// Throws Error(Config) when d < 2 or y_min >= y_max.
	Grid(std::size_t d, double y_min, double y_max);

	static Grid standard() { return Grid(kStandardSize, kStandardMin, kStandardMax); }

	std::size_t size() const noexcept { return centroids_.size(); }
	double y_min() const noexcept { return y_min_; }
	double y_max() const noexcept { return y_max_; }
	/// Spacing between neighbouring centroids.
	double spacing() const noexcept { return spacing_; }
	std::span<const double> centroids() const noexcept { return centroids_; }
	std::span<const double> boundaries() const noexcept { return boundaries_; }

	Token pad_token() const noexcept { return static_cast<Token>(size()); }
	Token eos_token() const noexcept { return static_cast<Token>(size() + 1); }
	std::size_t vocab_size() const noexcept { return size() + 2; }

	bool operator==(const Grid &o) const noexcept {
		return size() == o.size() && y_min_ == o.y_min_ && y_max_ == o.y_max_;
	}

private:
	double y_min_;
	double y_max_;
	double spacing_;
	std::vector<double> centroids_;
	std::vector<double> boundaries_;
};

inline Grid build_grid(std::size_t d, double y_min, double y_max) { return Grid(d, y_min, y_max); }

/// Mean absolute value of the training values; 1 when they are all zero.
double fit_scale(std::span<const double> train_values);

/// Number of boundaries at or below y after clamping to the grid range, so a
/// value exactly on a boundary lands in the upper cell.
Token tokenize(double y, const Grid &grid);

/// Centroid of the token's cell.
double detokenize(Token token, const Grid &grid);

struct TokenizedSeries {
	std::vector<Token> tokens;
	double scale = 1.0;
	std::size_t grid_size = 0;
	double grid_min = 0.0;
	double grid_max = 0.0;
};

/// Scales ts.values by fit_scale(scale_from) and tokenizes. scale_from must be
/// the training slice; fitting on test values leaks the future.
TokenizedSeries encode_series(std::span<const double> values, const Grid &grid, std::span<const double> scale_from);
TokenizedSeries encode_series(const TimeSeries &ts, const Grid &grid, std::span<const double> scale_from);

/// Inverse of encode_series up to quantization error.
std::vector<double> decode_series(std::span<const Token> tokens, const Grid &grid, double scale);

} // namespace wts
