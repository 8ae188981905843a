#pragma once

// Point and probabilistic forecast scores against a seasonal-naive baseline.

#include "wts/matrix.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wts {

/// forecast[t] = train[n - season + (t mod season)]
std::vector<double> seasonal_naive(std::span<const double> train, std::size_t season, std::size_t horizon);

/// In-sample seasonal-naive MAE of the training series; the MASE denominator.
/// Throws Error(Data, "degenerate scaling series") when it is zero.
double mase_scale(std::span<const double> train, std::size_t season);

/// Mean absolute scaled error.
double mase(std::span<const double> actual, std::span<const double> point_forecast, std::span<const double> train,
            std::size_t season);

/// Pinball loss q * max(y - yhat, 0) + (1 - q) * max(yhat - y, 0).
double quantile_loss(double y, double yhat, double q) noexcept;

/// Weighted quantile loss:
///   sum_q sum_t 2 * QL_q(y_t, yhat_qt) / (|levels| * sum_t |y_t|)
/// quantile_forecasts is levels x horizon. Concatenating several series
/// along the horizon gives the pooled dataset-level score.
double wql(std::span<const double> actual, const Matrix &quantile_forecasts, std::span<const double> levels);

struct DatasetScores {
	double mase = 0.0;
	double wql = 0.0;
	double mase_baseline = 0.0;
	double wql_baseline = 0.0;
	double rel_mase = 0.0;
	double rel_wql = 0.0;
	std::size_t series = 0;
	std::size_t excluded = 0; // series dropped for a degenerate MASE denominator
};

struct MetricReport {
	std::map<std::string, DatasetScores> per_dataset; // ordered by dataset id
	double agg_rel_mase = 0.0;
	double agg_rel_wql = 0.0;
};

/// Geometric mean; every value must be positive and finite.
double geometric_mean(std::span<const double> values);

struct RawScores {
	double mase = 0.0;
	double wql = 0.0;
	double mase_baseline = 0.0;
	double wql_baseline = 0.0;
	std::size_t series = 0;
	std::size_t excluded = 0;
};

/// Fills rel_* = score / baseline per dataset and their geometric means.
/// Nonpositive scores or baselines are Error(Data).
MetricReport relative_and_aggregate(const std::map<std::string, RawScores> &scores);

struct DeltaRow {
	std::string dataset;
	double score_a = 0.0;
	double score_b = 0.0;
	double delta = 0.0; // score_a - score_b
};

enum class Metric { Mase, Wql };

/// Per-dataset delta a - b of the chosen metric, sorted by delta descending
/// (ties by dataset id). Differing dataset sets are Error(Data).
std::vector<DeltaRow> delta_table(const MetricReport &a, const MetricReport &b, Metric metric);
std::vector<DeltaRow> delta_table(const std::map<std::string, double> &a, const std::map<std::string, double> &b);

/// Aligned text rendering: Dataset, "<METRIC> <A>", "<METRIC> <B>", delta,
/// three decimals.
std::string format_delta_table(const std::vector<DeltaRow> &rows, const std::string &metric_name,
                               const std::string &name_a, const std::string &name_b);

} // namespace wts
