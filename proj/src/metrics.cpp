#include "wts/metrics.hpp"

#include "wts/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wts {

std::vector<double> seasonal_naive(std::span<const double> train, std::size_t season, std::size_t horizon) {
	if (season == 0)
		throw Error(ErrorCategory::Config, "season must be >= 1");
	if (train.size() < season)
		throw Error(ErrorCategory::Data, "series shorter than its season");
	std::vector<double> out(horizon);
	const std::size_t base = train.size() - season;
	for (std::size_t t = 0; t < horizon; ++t)
		out[t] = train[base + t % season];
	return out;
}

double mase_scale(std::span<const double> train, std::size_t season) {
	if (season == 0)
		throw Error(ErrorCategory::Config, "season must be >= 1");
	if (train.size() <= season)
		throw Error(ErrorCategory::Data, "training series must be longer than its season");
	double acc = 0.0;
	for (std::size_t t = season; t < train.size(); ++t)
		acc += std::abs(train[t] - train[t - season]);
	const double scale = acc / static_cast<double>(train.size() - season);
	if (!(scale > 0.0))
		throw Error(ErrorCategory::Data, "degenerate scaling series");
	return scale;
}

double mase(std::span<const double> actual, std::span<const double> point_forecast, std::span<const double> train,
            std::size_t season) {
	if (actual.size() != point_forecast.size() || actual.empty())
		throw Error(ErrorCategory::Data, "mase: actual and forecast must be non-empty and aligned");
	const double denom = mase_scale(train, season);
	double acc = 0.0;
	for (std::size_t t = 0; t < actual.size(); ++t)
		acc += std::abs(actual[t] - point_forecast[t]);
	return acc / static_cast<double>(actual.size()) / denom;
}

double quantile_loss(double y, double yhat, double q) noexcept {
	return q * std::max(y - yhat, 0.0) + (1.0 - q) * std::max(yhat - y, 0.0);
}

double wql(std::span<const double> actual, const Matrix &qf, std::span<const double> levels) {
	if (levels.empty() || qf.rows != levels.size() || qf.cols != actual.size())
		throw Error(ErrorCategory::Data, "wql: quantile matrix does not align with levels and horizon");
	double denom = 0.0;
	for (double y : actual)
		denom += std::abs(y);
	if (!(denom > 0.0))
		throw Error(ErrorCategory::Data, "zero-denominator target");
	double num = 0.0;
	for (std::size_t q = 0; q < levels.size(); ++q)
		for (std::size_t t = 0; t < actual.size(); ++t)
			num += 2.0 * quantile_loss(actual[t], qf(q, t), levels[q]);
	return num / (static_cast<double>(levels.size()) * denom);
}

double geometric_mean(std::span<const double> values) {
	if (values.empty())
		throw Error(ErrorCategory::Data, "geometric mean of no values");
	double acc = 0.0;
	for (double v : values) {
		if (!(v > 0.0) || !std::isfinite(v))
			throw Error(ErrorCategory::Data, "geometric mean needs positive finite values");
		acc += std::log2(v);
	}
	// base 2 keeps power-of-two inputs exact
	return std::exp2(acc / static_cast<double>(values.size()));
}

MetricReport relative_and_aggregate(const std::map<std::string, RawScores> &scores) {
	if (scores.empty())
		throw Error(ErrorCategory::Data, "no dataset scores to aggregate");
	MetricReport r;
	std::vector<double> rm, rw;
	for (const auto &[id, s] : scores) {
		for (double v : {s.mase, s.wql, s.mase_baseline, s.wql_baseline})
			if (!(v > 0.0) || !std::isfinite(v))
				throw Error(ErrorCategory::Data, "dataset '" + id + "': scores must be positive for relative scoring");
		DatasetScores d{s.mase, s.wql, s.mase_baseline, s.wql_baseline, s.mase / s.mase_baseline,
		                s.wql / s.wql_baseline, s.series, s.excluded};
		rm.push_back(d.rel_mase);
		rw.push_back(d.rel_wql);
		r.per_dataset.emplace(id, d);
	}
	r.agg_rel_mase = geometric_mean(rm);
	r.agg_rel_wql = geometric_mean(rw);
	return r;
}

std::vector<DeltaRow> delta_table(const std::map<std::string, double> &a, const std::map<std::string, double> &b) {
	if (a.size() != b.size())
		throw Error(ErrorCategory::Data, "delta_table: reports cover different datasets");
	std::vector<DeltaRow> rows;
	for (const auto &[id, va] : a) {
		const auto it = b.find(id);
		if (it == b.end())
			throw Error(ErrorCategory::Data, "delta_table: dataset '" + id + "' missing from the second report");
		rows.push_back({id, va, it->second, va - it->second});
	}
	std::stable_sort(rows.begin(), rows.end(), [](const DeltaRow &x, const DeltaRow &y) { return x.delta > y.delta; });
	return rows;
}

std::vector<DeltaRow> delta_table(const MetricReport &a, const MetricReport &b, Metric metric) {
	auto pick = [metric](const MetricReport &r) {
		std::map<std::string, double> m;
		for (const auto &[id, s] : r.per_dataset)
			m[id] = metric == Metric::Mase ? s.mase : s.wql;
		return m;
	};
	return delta_table(pick(a), pick(b));
}

std::string format_delta_table(const std::vector<DeltaRow> &rows, const std::string &metric_name,
                               const std::string &name_a, const std::string &name_b) {
	const std::string ha = metric_name + " " + name_a;
	const std::string hb = metric_name + " " + name_b;
	std::size_t w0 = 7;
	for (const DeltaRow &r : rows)
		w0 = std::max(w0, r.dataset.size());
	const int wa = static_cast<int>(std::max<std::size_t>(ha.size(), 9));
	const int wb = static_cast<int>(std::max<std::size_t>(hb.size(), 9));
	std::ostringstream os;
	char buf[256];
	std::snprintf(buf, sizeof buf, "%-*s  %*s  %*s  %9s\n", static_cast<int>(w0), "Dataset", wa, ha.c_str(), wb,
	              hb.c_str(), "Delta");
	os << buf;
	for (const DeltaRow &r : rows) {
		std::snprintf(buf, sizeof buf, "%-*s  %*.3f  %*.3f  %9.3f\n", static_cast<int>(w0), r.dataset.c_str(), wa,
		              r.score_a, wb, r.score_b, r.delta);
		os << buf;
	}
	return os.str();
}

} // namespace wts
