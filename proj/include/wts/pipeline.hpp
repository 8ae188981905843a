#pragma once

// End-to-end experiment plumbing shared by the CLI and the acceptance suite:
// suite manifests, per-dataset training and evaluation, and the CE-vs-
// Wasserstein comparison with its reports.

#include "wts/checkpoint.hpp"
#include "wts/data.hpp"
#include "wts/forecast.hpp"
#include "wts/metrics.hpp"
#include "wts/model.hpp"
#include "wts/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wts {

struct GridSpec {
	std::size_t d = Grid::kStandardSize;
	double y_min = Grid::kStandardMin;
	double y_max = Grid::kStandardMax;

	Grid build() const { return Grid(d, y_min, y_max); }
};

struct EvalConfig {
	std::size_t n_paths = 20;
	std::uint64_t seed = 0;
	double temperature = 1.0;
};

/// Grid, model shape and schedule shared by every run of an experiment. The
/// model vocabulary is always grid.d + 2.
struct ExperimentConfig {
	GridSpec grid;
	ModelConfig model;
	TrainConfig train;
	EvalConfig eval;

	ModelConfig model_config() const;
};

struct SuiteEntry {
	std::string name;
	GeneratorKind kind = GeneratorKind::Sinusoid;
	std::size_t n_series = 1;
	std::size_t length = 0;
	std::uint64_t seed = 0;
	GeneratorParams params;

	Dataset generate() const;
};

/// Shared CE base trained before the per-loss fine-tuning runs. The corpus
/// holds n_series fresh series per suite dataset (seed + seed_offset), in
/// dataset-name order, with ids prefixed "pre_".
struct PretrainConfig {
	std::size_t steps = 2000;
	double lr_initial = 1e-3;
	std::size_t batch_size = 8;
	std::uint64_t seed = 0;
	std::size_t n_series = 32;
	std::uint64_t seed_offset = 9000;
};

struct Suite {
	std::string name;
	ExperimentConfig experiment;
	std::vector<SuiteEntry> datasets;
	std::optional<PretrainConfig> pretrain;
};

/// Manifest JSON, see suites/default.json for the layout.
Suite parse_suite(const std::string &json_text);
Suite load_suite(const std::filesystem::path &path);
std::string suite_to_json(const Suite &suite);
/// The checked-in default suite, compiled into the binary.
const std::string &default_suite_json();
Suite default_suite();

/// Tokenized training slices (last `horizon` points held out), each scaled by
/// its own training mean absolute value.
std::vector<TokenizedSeries> training_tokens(const Dataset &ds, const Grid &grid);

struct TrainedRun {
	Checkpoint checkpoint;
	TrainResult result;
};

/// Trains a fresh model (or a copy of `base`) on the dataset's training slices.
TrainedRun train_on_dataset(const Dataset &ds, const ExperimentConfig &cfg, const Model *base = nullptr);

Dataset pretrain_corpus(const Suite &suite);
/// Trains the shared CE base described by the suite's pretrain section.
TrainedRun pretrain_base(const Suite &suite);

struct SeriesForecast {
	std::string id;
	std::vector<double> actual;
	std::vector<double> median;
	Matrix quantiles;
	Matrix paths;
};

struct DatasetEvaluation {
	RawScores scores;
	std::vector<double> levels;
	std::vector<SeriesForecast> forecasts;
};

/// Per-series forecast seed derived from the evaluation seed.
std::uint64_t series_seed(std::uint64_t eval_seed, std::size_t series_index) noexcept;

/// Forecasts every series from its training slice and scores the test slice.
/// Dataset MASE is the mean over series with a usable denominator; WQL is
/// pooled over all series. The baseline is seasonal naive with every quantile
/// at the point forecast.
DatasetEvaluation evaluate_dataset(const Model &model, const Grid &grid, const Dataset &ds, const EvalConfig &ec);

void write_loss_curve_csv(const std::filesystem::path &path, const std::vector<StepRecord> &history);
void write_metrics_csv(const std::filesystem::path &path, const MetricReport &report);
void write_forecasts_csv(const std::filesystem::path &path, const DatasetEvaluation &ev, bool with_paths);

struct CompareOptions {
	Suite suite;
	std::vector<LossKind> losses{LossKind::cross_entropy(), LossKind::wasserstein(1.0), LossKind::wasserstein(2.0)};
	std::filesystem::path out_dir;
	// Base precedence: base_checkpoint, then from_scratch, then the suite's
	// pretrain section (written to out_dir/base), then a fresh model.
	std::optional<std::filesystem::path> base_checkpoint;
	bool from_scratch = false;
	std::size_t jobs = 1;
};

struct CompareResult {
	std::map<std::string, MetricReport> reports; // by loss name
	std::vector<std::string> loss_order;
};

/// Trains and evaluates every (loss, dataset) pair and writes per-loss
/// metrics, delta tables, aggregate chart data and the WQL direction flags.
/// Output files depend only on the options, not on `jobs`.
CompareResult run_compare(const CompareOptions &opts, std::ostream *log = nullptr);

/// Writes the comparison artefacts for already-computed reports.
void write_compare_reports(const std::filesystem::path &out_dir, const CompareResult &result);

} // namespace wts
