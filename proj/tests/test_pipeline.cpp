#include "wts/checkpoint.hpp"
#include "wts/error.hpp"
#include "wts/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wts;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
	const fs::path p = fs::temp_directory_path() / "wts_test_pipeline" / name;
	fs::remove_all(p);
	fs::create_directories(p);
	return p;
}

std::string slurp(const fs::path &p) {
	std::ifstream in(p, std::ios::binary);
	REQUIRE(in);
	std::stringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

const char *kTinySuite = R"({
  "name": "tiny",
  "grid": {"d": 32, "y_min": -4.0, "y_max": 4.0},
  "model": {"context_length": 16, "embed_dim": 8, "num_layers": 1, "num_heads": 2, "seed": 1},
  "train": {"steps": 6, "lr": 0.01, "batch_size": 2, "seed": 2},
  "eval": {"n_paths": 4, "seed": 3, "temperature": 1.0},
  "pretrain": {"steps": 4, "lr": 0.01, "batch_size": 2, "seed": 5, "n_series": 2, "seed_offset": 100},
  "datasets": [
    {"name": "wave", "kind": "sinusoid", "n_series": 2, "length": 40, "seed": 1,
     "params": {"period": 4}},
    {"name": "walk", "kind": "random_walk", "n_series": 2, "length": 30, "seed": 2,
     "params": {"level": 10.0, "horizon": 4}}
  ]
})";

} // namespace

TEST_CASE("suite manifests") {
	SUBCASE("parse and serialise round trip") {
		const Suite s = parse_suite(kTinySuite);
		CHECK(s.name == "tiny");
		CHECK(s.experiment.grid.d == 32);
		CHECK(s.experiment.model_config().vocab_size == 34);
		CHECK(s.experiment.train.steps == 6);
		REQUIRE(s.pretrain);
		CHECK(s.pretrain->n_series == 2);
		REQUIRE(s.datasets.size() == 2);
		CHECK(s.datasets[1].kind == GeneratorKind::RandomWalk);
		CHECK(s.datasets[1].params.at("horizon") == 4.0);
		const std::string text = suite_to_json(s);
		CHECK(suite_to_json(parse_suite(text)) == text);
	}
	SUBCASE("default suite") {
		const Suite s = default_suite();
		CHECK(s.datasets.size() == 5);
		std::vector<GeneratorKind> kinds;
		for (const auto &d : s.datasets)
			kinds.push_back(d.kind);
		std::sort(kinds.begin(), kinds.end());
		CHECK(std::unique(kinds.begin(), kinds.end()) == kinds.end());
		CHECK(s.experiment.train.steps == 1000);
		CHECK(s.experiment.train.lr_initial == 0.001);
		CHECK(s.experiment.eval.n_paths == 20);
	}
	SUBCASE("rejected manifests") {
		CHECK_THROWS_AS(parse_suite("{"), Error);
		CHECK_THROWS_AS(parse_suite(R"({"datasets": []})"), Error);
		CHECK_THROWS_AS(parse_suite(R"({"datasets": [{"name": "a"}]})"), Error);
		CHECK_THROWS_AS(
		    parse_suite(R"({"datasets": [{"name": "a", "kind": "ar1", "n_series": 1, "length": 40, "seed": 1},
		                                  {"name": "a", "kind": "ar1", "n_series": 1, "length": 40, "seed": 2}]})"),
		    Error);
		CHECK_THROWS_AS(
		    parse_suite(R"({"grid": {"d": 1}, "datasets": [{"name": "a", "kind": "ar1", "n_series": 1, "length": 40, "seed": 1}]})"),
		    Error);
		try {
			load_suite("/nonexistent/suite.json");
			FAIL("expected an error");
		} catch (const Error &e) {
			CHECK(e.category() == ErrorCategory::Io);
		}
	}
}

TEST_CASE("pretraining corpus") {
	const Suite s = parse_suite(kTinySuite);
	const Dataset corpus = pretrain_corpus(s);
	REQUIRE(corpus.series.size() == 4);
	// name order, fresh seeds
	CHECK(corpus.series[0].id.rfind("pre_walk", 0) == 0);
	CHECK(corpus.series[2].id.rfind("pre_wave", 0) == 0);
	const Dataset wave = s.datasets[0].generate();
	CHECK(corpus.series[2].values != wave.series[0].values);
	Suite none = s;
	none.pretrain.reset();
	CHECK_THROWS_AS(pretrain_corpus(none), Error);
}

TEST_CASE("checkpoint round trip") {
	const Suite s = parse_suite(kTinySuite);
	const Dataset ds = s.datasets[0].generate();
	const TrainedRun run = train_on_dataset(ds, s.experiment);
	const fs::path dir = scratch("ckpt");
	save_checkpoint(dir / "c.json", run.checkpoint);
	const Checkpoint back = load_checkpoint(dir / "c.json");
	CHECK(std::ranges::equal(back.model.parameters(), run.checkpoint.model.parameters()));
	CHECK(back.grid == run.checkpoint.grid);
	CHECK(back.rng_state == run.checkpoint.rng_state);
	CHECK(back.train.steps == 6);
	CHECK(back.model.config().embed_dim == 8);
	save_checkpoint(dir / "d.json", back);
	CHECK(slurp(dir / "c.json") == slurp(dir / "d.json"));

	std::ofstream(dir / "bad.json") << "{\"format\": \"something-else\"}";
	CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), Error);
	CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), Error);
}

TEST_CASE("evaluate_dataset") {
	const Suite s = parse_suite(kTinySuite);
	const Dataset ds = s.datasets[1].generate();
	const TrainedRun run = train_on_dataset(ds, s.experiment);
	const DatasetEvaluation a = evaluate_dataset(run.checkpoint.model, run.checkpoint.grid, ds, s.experiment.eval);
	const DatasetEvaluation b = evaluate_dataset(run.checkpoint.model, run.checkpoint.grid, ds, s.experiment.eval);
	CHECK(a.scores.wql == b.scores.wql);
	CHECK(a.scores.mase == b.scores.mase);
	CHECK(a.scores.series == 2);
	CHECK(a.scores.mase > 0.0);
	CHECK(a.scores.mase_baseline > 0.0);
	CHECK(a.forecasts.size() == 2);
	CHECK(a.forecasts[0].median.size() == 4);
	CHECK(series_seed(3, 0) != series_seed(3, 1));
	const Grid other(16, -4, 4);
	CHECK_THROWS_AS(evaluate_dataset(run.checkpoint.model, other, ds, s.experiment.eval), Error);
}

TEST_CASE("compare is reproducible and independent of the job count") {
	CompareOptions opts;
	opts.suite = parse_suite(kTinySuite);
	opts.out_dir = scratch("cmp1");
	const CompareResult r1 = run_compare(opts);
	opts.out_dir = scratch("cmp2");
	opts.jobs = 3;
	run_compare(opts);

	CHECK(r1.loss_order == std::vector<std::string>{"ce", "w1", "w2"});
	CHECK(fs::exists(fs::temp_directory_path() / "wts_test_pipeline/cmp1/base/checkpoint.json"));
	for (const char *f : {"ce/metrics.csv", "w1/metrics.csv", "w2/metrics.csv", "aggregate.csv", "compare_mase.csv",
	                      "compare_mase.txt", "compare_wql.txt", "compare_mase_ce_w2.txt", "wql_direction.csv",
	                      "chart.svg", "manifest.json", "w1/wave/forecasts.csv", "w1/wave/loss_curve.csv"}) {
		CAPTURE(f);
		CHECK(slurp(fs::temp_directory_path() / "wts_test_pipeline/cmp1" / f) ==
		      slurp(fs::temp_directory_path() / "wts_test_pipeline/cmp2" / f));
	}
	const std::string table = slurp(fs::temp_directory_path() / "wts_test_pipeline/cmp1/compare_mase.txt");
	CHECK(table.find("MASE CE") != std::string::npos);
	CHECK(table.find("MASE W1") != std::string::npos);

	SUBCASE("from scratch skips the base") {
		opts.out_dir = scratch("cmp3");
		opts.from_scratch = true;
		opts.jobs = 1;
		opts.losses = {LossKind::cross_entropy()};
		run_compare(opts);
		CHECK_FALSE(fs::exists(opts.out_dir / "base"));
		CHECK(fs::exists(opts.out_dir / "ce/metrics.csv"));
	}
}
