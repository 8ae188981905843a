#include "wts/pipeline.hpp"

#include "wts/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace wts {

namespace {

#include "default_suite.inc"

using nlohmann::json;

template <typename T>
T get_or(const json &j, const char *key, T fallback) {
	return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::ofstream open_out(const std::filesystem::path &path) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw Error(ErrorCategory::Io, "cannot write '" + path.string() + "'");
	return out;
}

std::string fmt_double(double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

std::string fmt_fixed(double v, int digits = 6) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*f", digits, v);
	return buf;
}

} // namespace

ModelConfig ExperimentConfig::model_config() const {
	ModelConfig mc = model;
	mc.vocab_size = grid.d + 2;
	return mc;
}

Dataset SuiteEntry::generate() const { return wts::generate(name, kind, n_series, length, seed, params); }

Suite parse_suite(const std::string &text) {
	try {
		const json j = json::parse(text);
		Suite s;
		s.name = get_or<std::string>(j, "name", "suite");
		ExperimentConfig &e = s.experiment;
		if (j.contains("grid")) {
			const json &g = j.at("grid");
			e.grid.d = get_or<std::size_t>(g, "d", e.grid.d);
			e.grid.y_min = get_or<double>(g, "y_min", e.grid.y_min);
			e.grid.y_max = get_or<double>(g, "y_max", e.grid.y_max);
		}
		if (j.contains("model")) {
			const json &m = j.at("model");
			e.model.context_length = get_or<std::size_t>(m, "context_length", e.model.context_length);
			e.model.embed_dim = get_or<std::size_t>(m, "embed_dim", e.model.embed_dim);
			e.model.num_layers = get_or<std::size_t>(m, "num_layers", e.model.num_layers);
			e.model.num_heads = get_or<std::size_t>(m, "num_heads", e.model.num_heads);
			e.model.seed = get_or<std::uint64_t>(m, "seed", e.model.seed);
		}
		if (j.contains("train")) {
			const json &t = j.at("train");
			e.train.steps = get_or<std::size_t>(t, "steps", e.train.steps);
			e.train.lr_initial = get_or<double>(t, "lr", e.train.lr_initial);
			e.train.batch_size = get_or<std::size_t>(t, "batch_size", e.train.batch_size);
			e.train.seed = get_or<std::uint64_t>(t, "seed", e.train.seed);
		}
		if (j.contains("eval")) {
			const json &v = j.at("eval");
			e.eval.n_paths = get_or<std::size_t>(v, "n_paths", e.eval.n_paths);
			e.eval.seed = get_or<std::uint64_t>(v, "seed", e.eval.seed);
			e.eval.temperature = get_or<double>(v, "temperature", e.eval.temperature);
		}
		if (j.contains("pretrain")) {
			const json &p = j.at("pretrain");
			PretrainConfig pc;
			pc.steps = get_or<std::size_t>(p, "steps", pc.steps);
			pc.lr_initial = get_or<double>(p, "lr", pc.lr_initial);
			pc.batch_size = get_or<std::size_t>(p, "batch_size", pc.batch_size);
			pc.seed = get_or<std::uint64_t>(p, "seed", pc.seed);
			pc.n_series = get_or<std::size_t>(p, "n_series", pc.n_series);
			pc.seed_offset = get_or<std::uint64_t>(p, "seed_offset", pc.seed_offset);
			if (pc.n_series == 0)
				throw Error(ErrorCategory::Config, "pretrain.n_series must be positive");
			s.pretrain = pc;
		}
		for (const json &d : j.at("datasets")) {
			SuiteEntry entry;
			entry.name = d.at("name").get<std::string>();
			entry.kind = parse_generator_kind(d.at("kind").get<std::string>());
			entry.n_series = d.at("n_series").get<std::size_t>();
			entry.length = d.at("length").get<std::size_t>();
			entry.seed = d.at("seed").get<std::uint64_t>();
			if (d.contains("params"))
				entry.params = d.at("params").get<GeneratorParams>();
			s.datasets.push_back(std::move(entry));
		}
		if (s.datasets.empty())
			throw Error(ErrorCategory::Config, "suite lists no datasets");
		for (std::size_t i = 0; i < s.datasets.size(); ++i)
			for (std::size_t k = i + 1; k < s.datasets.size(); ++k)
				if (s.datasets[i].name == s.datasets[k].name)
					throw Error(ErrorCategory::Config, "duplicate dataset name '" + s.datasets[i].name + "'");
		e.grid.build();
		e.model_config().validate();
		e.train.validate();
		return s;
	} catch (const json::exception &ex) {
		throw Error(ErrorCategory::Config, std::string("malformed suite manifest: ") + ex.what());
	}
}

std::string suite_to_json(const Suite &s) {
	const ExperimentConfig &e = s.experiment;
	nlohmann::ordered_json j;
	j["name"] = s.name;
	j["grid"] = {{"d", e.grid.d}, {"y_min", e.grid.y_min}, {"y_max", e.grid.y_max}};
	j["model"] = {{"context_length", e.model.context_length},
	              {"embed_dim", e.model.embed_dim},
	              {"num_layers", e.model.num_layers},
	              {"num_heads", e.model.num_heads},
	              {"seed", e.model.seed}};
	j["train"] = {{"steps", e.train.steps},
	              {"lr", e.train.lr_initial},
	              {"batch_size", e.train.batch_size},
	              {"seed", e.train.seed}};
	j["eval"] = {{"n_paths", e.eval.n_paths}, {"seed", e.eval.seed}, {"temperature", e.eval.temperature}};
	if (s.pretrain) {
		const PretrainConfig &p = *s.pretrain;
		j["pretrain"] = {{"steps", p.steps},           {"lr", p.lr_initial},     {"batch_size", p.batch_size},
		                 {"seed", p.seed},             {"n_series", p.n_series}, {"seed_offset", p.seed_offset}};
	}
	nlohmann::ordered_json list = nlohmann::ordered_json::array();
	for (const SuiteEntry &d : s.datasets) {
		nlohmann::ordered_json entry;
		entry["name"] = d.name;
		entry["kind"] = std::string(generator_kind_name(d.kind));
		entry["n_series"] = d.n_series;
		entry["length"] = d.length;
		entry["seed"] = d.seed;
		entry["params"] = d.params;
		list.push_back(std::move(entry));
	}
	j["datasets"] = std::move(list);
	return j.dump(2) + "\n";
}

Suite load_suite(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error(ErrorCategory::Io, "cannot open suite manifest '" + path.string() + "'");
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_suite(ss.str());
}

const std::string &default_suite_json() {
	static const std::string text(kDefaultSuiteJson);
	return text;
}

Suite default_suite() { return parse_suite(default_suite_json()); }

std::vector<TokenizedSeries> training_tokens(const Dataset &ds, const Grid &grid) {
	std::vector<TokenizedSeries> out;
	out.reserve(ds.series.size());
	for (const TimeSeries &ts : ds.series) {
		const Split sp = split(ts);
		out.push_back(encode_series(std::span<const double>(sp.train), grid, sp.train));
	}
	return out;
}

TrainedRun train_on_dataset(const Dataset &ds, const ExperimentConfig &cfg, const Model *base) {
	const Grid grid = cfg.grid.build();
	const ModelConfig mc = cfg.model_config();
	Model model = base ? *base : init_model(mc);
	if (model.config().vocab_size != grid.vocab_size())
		throw Error(ErrorCategory::Config, "base model vocabulary does not match the grid");
	const auto tokens = training_tokens(ds, grid);
	TrainResult result = train(model, tokens, cfg.train, grid.spacing());
	TrainedRun run{Checkpoint{std::move(model), grid, cfg.train, result.rng_state}, std::move(result)};
	return run;
}

Dataset pretrain_corpus(const Suite &suite) {
	if (!suite.pretrain)
		throw Error(ErrorCategory::Config, "suite '" + suite.name + "' has no pretrain section");
	const PretrainConfig &pc = *suite.pretrain;
	std::vector<const SuiteEntry *> order;
	for (const SuiteEntry &e : suite.datasets)
		order.push_back(&e);
	std::sort(order.begin(), order.end(), [](auto *a, auto *b) { return a->name < b->name; });
	Dataset corpus{"pretrain", {}, std::nullopt};
	for (const SuiteEntry *e : order) {
		Dataset part = wts::generate("pre_" + e->name, e->kind, pc.n_series, e->length, e->seed + pc.seed_offset,
		                             e->params);
		for (TimeSeries &ts : part.series)
			corpus.series.push_back(std::move(ts));
	}
	return corpus;
}

TrainedRun pretrain_base(const Suite &suite) {
	const Dataset corpus = pretrain_corpus(suite);
	const PretrainConfig &pc = *suite.pretrain;
	ExperimentConfig cfg = suite.experiment;
	cfg.train.steps = pc.steps;
	cfg.train.lr_initial = pc.lr_initial;
	cfg.train.batch_size = pc.batch_size;
	cfg.train.seed = pc.seed;
	cfg.train.loss = LossKind::cross_entropy();
	return train_on_dataset(corpus, cfg);
}

std::uint64_t series_seed(std::uint64_t eval_seed, std::size_t series_index) noexcept {
	// splitmix64 finaliser
	std::uint64_t z = eval_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(series_index) + 1);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

DatasetEvaluation evaluate_dataset(const Model &model, const Grid &grid, const Dataset &ds, const EvalConfig &ec) {
	if (ds.series.empty())
		throw Error(ErrorCategory::Data, "dataset '" + ds.name + "' has no series");
	if (model.config().vocab_size != grid.vocab_size())
		throw Error(ErrorCategory::Config, "model vocabulary does not match the grid");
	const TransformerPredictor predictor(model);
	const std::size_t m = model.config().context_length;

	DatasetEvaluation ev;
	ev.levels = default_levels();
	std::vector<double> all_actual;
	std::vector<std::vector<double>> model_q(ev.levels.size()), base_q(ev.levels.size());
	double mase_sum = 0.0, base_mase_sum = 0.0;
	std::size_t used = 0;

	for (std::size_t si = 0; si < ds.series.size(); ++si) {
		const TimeSeries &ts = ds.series[si];
		const Split sp = split(ts);
		const std::size_t k = ts.horizon;
		const TokenizedSeries enc = encode_series(std::span<const double>(sp.train), grid, sp.train);
		// room for the sampled horizon without sliding the window
		const std::size_t ctx_len = std::min(enc.tokens.size(), k < m ? m - k + 1 : std::size_t{1});
		const std::span<const Token> context(enc.tokens.data() + enc.tokens.size() - ctx_len, ctx_len);

		ForecastOptions fo;
		fo.horizon = k;
		fo.n_paths = ec.n_paths;
		fo.seed = series_seed(ec.seed, si);
		fo.temperature = ec.temperature;
		fo.levels = ev.levels;
		ForecastBundle fb = forecast(predictor, context, grid, enc.scale, fo);

		const std::vector<double> naive = seasonal_naive(sp.train, ts.season_length, k);
		try {
			const double s_model = mase(sp.test, fb.median, sp.train, ts.season_length);
			const double s_base = mase(sp.test, naive, sp.train, ts.season_length);
			mase_sum += s_model;
			base_mase_sum += s_base;
			++used;
		} catch (const Error &e) {
			if (e.category() != ErrorCategory::Data)
				throw;
			++ev.scores.excluded;
		}
		all_actual.insert(all_actual.end(), sp.test.begin(), sp.test.end());
		for (std::size_t q = 0; q < ev.levels.size(); ++q) {
			const auto row = fb.quantiles.row(q);
			model_q[q].insert(model_q[q].end(), row.begin(), row.end());
			base_q[q].insert(base_q[q].end(), naive.begin(), naive.end());
		}
		ev.forecasts.push_back({ts.id, sp.test, fb.median, std::move(fb.quantiles), std::move(fb.decoded_paths)});
	}

	auto stack = [&](const std::vector<std::vector<double>> &rows) {
		Matrix mtx(rows.size(), all_actual.size());
		for (std::size_t q = 0; q < rows.size(); ++q)
			std::copy(rows[q].begin(), rows[q].end(), mtx.row(q).begin());
		return mtx;
	};
	ev.scores.series = ds.series.size();
	if (used == 0)
		throw Error(ErrorCategory::Data, "dataset '" + ds.name + "': every series has a degenerate MASE denominator");
	ev.scores.mase = mase_sum / static_cast<double>(used);
	ev.scores.mase_baseline = base_mase_sum / static_cast<double>(used);
	ev.scores.wql = wql(all_actual, stack(model_q), ev.levels);
	ev.scores.wql_baseline = wql(all_actual, stack(base_q), ev.levels);
	return ev;
}

void write_loss_curve_csv(const std::filesystem::path &path, const std::vector<StepRecord> &history) {
	auto out = open_out(path);
	out << "step,lr,loss\n";
	for (const StepRecord &r : history)
		out << r.step << ',' << fmt_double(r.lr) << ',' << fmt_double(r.loss) << '\n';
}

void write_metrics_csv(const std::filesystem::path &path, const MetricReport &report) {
	auto out = open_out(path);
	out << "dataset,mase,wql,mase_baseline,wql_baseline,rel_mase,rel_wql,series,excluded\n";
	for (const auto &[id, s] : report.per_dataset)
		out << id << ',' << fmt_double(s.mase) << ',' << fmt_double(s.wql) << ',' << fmt_double(s.mase_baseline) << ','
		    << fmt_double(s.wql_baseline) << ',' << fmt_double(s.rel_mase) << ',' << fmt_double(s.rel_wql) << ','
		    << s.series << ',' << s.excluded << '\n';
	out << "aggregate,,,,," << fmt_double(report.agg_rel_mase) << ',' << fmt_double(report.agg_rel_wql) << ",,\n";
}

void write_forecasts_csv(const std::filesystem::path &path, const DatasetEvaluation &ev, bool with_paths) {
	auto out = open_out(path);
	out << "series,step,actual,median";
	for (double l : ev.levels)
		out << ",q" << fmt_fixed(l, 1);
	if (with_paths && !ev.forecasts.empty())
		for (std::size_t p = 0; p < ev.forecasts.front().paths.rows; ++p)
			out << ",path" << p;
	out << '\n';
	for (const SeriesForecast &f : ev.forecasts) {
		for (std::size_t t = 0; t < f.median.size(); ++t) {
			out << f.id << ',' << t << ',' << fmt_double(f.actual[t]) << ',' << fmt_double(f.median[t]);
			for (std::size_t q = 0; q < f.quantiles.rows; ++q)
				out << ',' << fmt_double(f.quantiles(q, t));
			if (with_paths)
				for (std::size_t p = 0; p < f.paths.rows; ++p)
					out << ',' << fmt_double(f.paths(p, t));
			out << '\n';
		}
	}
}

namespace {

void write_delta_files(const std::filesystem::path &dir, const std::string &stem, const std::vector<DeltaRow> &rows,
                       const std::string &metric, const std::string &a, const std::string &b) {
	{
		auto out = open_out(dir / (stem + ".csv"));
		out << "dataset," << metric << '_' << a << ',' << metric << '_' << b << ",delta\n";
		for (const DeltaRow &r : rows)
			out << r.dataset << ',' << fmt_double(r.score_a) << ',' << fmt_double(r.score_b) << ','
			    << fmt_double(r.delta) << '\n';
	}
	auto upper = [](std::string s) {
		std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
		return s;
	};
	auto out = open_out(dir / (stem + ".txt"));
	out << format_delta_table(rows, upper(metric), upper(a), upper(b));
}

void write_chart_svg(const std::filesystem::path &path, const CompareResult &res) {
	const double bar_w = 40.0, gap = 20.0, height = 200.0, top = 30.0, left = 40.0;
	const std::size_t n = res.loss_order.size();
	double vmax = 0.0;
	for (const auto &name : res.loss_order) {
		const MetricReport &r = res.reports.at(name);
		vmax = std::max({vmax, r.agg_rel_mase, r.agg_rel_wql});
	}
	vmax = vmax > 0.0 ? vmax * 1.1 : 1.0;
	const double panel_w = static_cast<double>(n) * (bar_w + gap) + gap;
	auto out = open_out(path);
	out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_fixed(2 * panel_w + 3 * left, 0)
	    << "\" height=\"" << fmt_fixed(height + top + 40.0, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
	for (int panel = 0; panel < 2; ++panel) {
		const double x0 = left + panel * (panel_w + left);
		out << "<text x=\"" << fmt_fixed(x0, 1) << "\" y=\"18\">Aggregate relative "
		    << (panel == 0 ? "MASE" : "WQL") << "</text>\n";
		out << "<line x1=\"" << fmt_fixed(x0, 1) << "\" y1=\"" << fmt_fixed(top + height, 1) << "\" x2=\""
		    << fmt_fixed(x0 + panel_w, 1) << "\" y2=\"" << fmt_fixed(top + height, 1) << "\" stroke=\"black\"/>\n";
		for (std::size_t i = 0; i < n; ++i) {
			const MetricReport &r = res.reports.at(res.loss_order[i]);
			const double v = panel == 0 ? r.agg_rel_mase : r.agg_rel_wql;
			const double h = v / vmax * height;
			const double x = x0 + gap + static_cast<double>(i) * (bar_w + gap);
			out << "<rect x=\"" << fmt_fixed(x, 1) << "\" y=\"" << fmt_fixed(top + height - h, 1) << "\" width=\""
			    << fmt_fixed(bar_w, 1) << "\" height=\"" << fmt_fixed(h, 1) << "\" fill=\"steelblue\"/>\n";
			out << "<text x=\"" << fmt_fixed(x, 1) << "\" y=\"" << fmt_fixed(top + height - h - 4.0, 1) << "\">"
			    << fmt_fixed(v, 3) << "</text>\n";
			out << "<text x=\"" << fmt_fixed(x + 8.0, 1) << "\" y=\"" << fmt_fixed(top + height + 16.0, 1) << "\">"
			    << res.loss_order[i] << "</text>\n";
		}
	}
	out << "</svg>\n";
}

} // namespace

void write_compare_reports(const std::filesystem::path &dir, const CompareResult &res) {
	std::filesystem::create_directories(dir);
	{
		auto out = open_out(dir / "aggregate.csv");
		out << "loss,agg_rel_mase,agg_rel_wql\n";
		for (const auto &name : res.loss_order) {
			const MetricReport &r = res.reports.at(name);
			out << name << ',' << fmt_double(r.agg_rel_mase) << ',' << fmt_double(r.agg_rel_wql) << '\n';
		}
	}
	write_chart_svg(dir / "chart.svg", res);

	const auto ce = res.reports.find("ce");
	if (ce == res.reports.end())
		return;
	for (const auto &name : res.loss_order) {
		if (name == "ce")
			continue;
		const MetricReport &other = res.reports.at(name);
		const std::string suffix = name == "w1" ? "" : "_ce_" + name;
		write_delta_files(dir, "compare_mase" + suffix, delta_table(ce->second, other, Metric::Mase), "mase", "ce",
		                  name);
		write_delta_files(dir, "compare_wql" + suffix, delta_table(ce->second, other, Metric::Wql), "wql", "ce", name);
	}
	const auto w1 = res.reports.find("w1");
	if (w1 == res.reports.end())
		return;
	auto out = open_out(dir / "wql_direction.csv");
	out << "dataset,wql_ce,wql_w1,ce_wql_le_w1\n";
	for (const auto &[id, s] : ce->second.per_dataset) {
		const DatasetScores &o = w1->second.per_dataset.at(id);
		out << id << ',' << fmt_double(s.wql) << ',' << fmt_double(o.wql) << ',' << (s.wql <= o.wql ? "true" : "false")
		    << '\n';
	}
}

CompareResult run_compare(const CompareOptions &opts, std::ostream *log) {
	if (opts.losses.empty())
		throw Error(ErrorCategory::Config, "compare needs at least one loss");
	const Suite &suite = opts.suite;
	const ExperimentConfig &exp = suite.experiment;
	const Grid grid = exp.grid.build();
	std::filesystem::create_directories(opts.out_dir / "data");
	{
		auto out = open_out(opts.out_dir / "manifest.json");
		out << suite_to_json(suite);
	}

	std::vector<Dataset> datasets;
	for (const SuiteEntry &e : suite.datasets) {
		datasets.push_back(e.generate());
		save_dataset(opts.out_dir / "data" / (e.name + ".jsonl"), datasets.back());
	}

	std::optional<Checkpoint> base;
	if (opts.base_checkpoint) {
		base = load_checkpoint(*opts.base_checkpoint);
		if (!(base->grid == grid))
			throw Error(ErrorCategory::Config, "base checkpoint grid differs from the suite grid");
	} else if (!opts.from_scratch && suite.pretrain) {
		if (log)
			*log << "[base] pretraining with ce for " << suite.pretrain->steps << " steps\n";
		TrainedRun run = pretrain_base(suite);
		std::filesystem::create_directories(opts.out_dir / "base");
		save_checkpoint(opts.out_dir / "base" / "checkpoint.json", run.checkpoint);
		write_loss_curve_csv(opts.out_dir / "base" / "loss_curve.csv", run.result.history);
		if (log)
			*log << "[base] final loss " << fmt_fixed(run.result.history.back().loss) << '\n';
		base = std::move(run.checkpoint);
	}

	struct Job {
		std::size_t loss;
		std::size_t dataset;
	};
	std::vector<Job> jobs;
	for (std::size_t l = 0; l < opts.losses.size(); ++l)
		for (std::size_t d = 0; d < datasets.size(); ++d)
			jobs.push_back({l, d});
	std::vector<RawScores> results(jobs.size());
	std::mutex log_mutex;
	std::atomic<std::size_t> next{0};
	std::exception_ptr failure;
	std::mutex failure_mutex;

	auto worker = [&] {
		for (;;) {
			const std::size_t ji = next.fetch_add(1);
			if (ji >= jobs.size())
				return;
			try {
				const Job &job = jobs[ji];
				const LossKind &kind = opts.losses[job.loss];
				const Dataset &ds = datasets[job.dataset];
				ExperimentConfig cfg = exp;
				cfg.train.loss = kind;
				const auto dir = opts.out_dir / std::string(kind.name()) / ds.name;
				std::filesystem::create_directories(dir);
				TrainedRun run = train_on_dataset(ds, cfg, base ? &base->model : nullptr);
				save_checkpoint(dir / "checkpoint.json", run.checkpoint);
				write_loss_curve_csv(dir / "loss_curve.csv", run.result.history);
				DatasetEvaluation ev = evaluate_dataset(run.checkpoint.model, grid, ds, exp.eval);
				write_forecasts_csv(dir / "forecasts.csv", ev, false);
				results[ji] = ev.scores;
				if (log) {
					std::lock_guard lock(log_mutex);
					*log << "[" << kind.name() << "] " << ds.name << ": final loss "
					     << fmt_fixed(run.result.history.back().loss) << ", MASE " << fmt_fixed(ev.scores.mase, 4)
					     << ", WQL " << fmt_fixed(ev.scores.wql, 4) << '\n';
				}
			} catch (...) {
				std::lock_guard lock(failure_mutex);
				if (!failure)
					failure = std::current_exception();
				next.store(jobs.size());
				return;
			}
		}
	};
	const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.jobs, jobs.size()));
	if (n_threads == 1) {
		worker();
	} else {
		std::vector<std::thread> pool;
		for (std::size_t i = 0; i < n_threads; ++i)
			pool.emplace_back(worker);
		for (auto &t : pool)
			t.join();
	}
	if (failure)
		std::rethrow_exception(failure);

	CompareResult res;
	for (std::size_t l = 0; l < opts.losses.size(); ++l) {
		std::map<std::string, RawScores> scores;
		for (std::size_t ji = 0; ji < jobs.size(); ++ji)
			if (jobs[ji].loss == l)
				scores[datasets[jobs[ji].dataset].name] = results[ji];
		const std::string name(opts.losses[l].name());
		if (res.reports.contains(name))
			throw Error(ErrorCategory::Config, "loss '" + name + "' listed twice");
		res.reports[name] = relative_and_aggregate(scores);
		res.loss_order.push_back(name);
		write_metrics_csv(opts.out_dir / name / "metrics.csv", res.reports[name]);
	}
	write_compare_reports(opts.out_dir, res);
	return res;
}

} // namespace wts
