// wts: tokenized forecasting with cross-entropy or Wasserstein training.
//
//   wts generate  --out DIR [--suite FILE]
//   wts train     --dataset FILE --loss ce|w1|w2 --out DIR [...]
//   wts evaluate  --checkpoint FILE --dataset FILE --out DIR [...]
//   wts compare   --out DIR [--suite FILE] [--losses ce,w1,w2] [...]
//
// Every subcommand reads its flags from --config FILE (TOML/INI, one section
// per subcommand); flags on the command line win.

#include "wts/checkpoint.hpp"
#include "wts/data.hpp"
#include "wts/error.hpp"
#include "wts/kernels.hpp"
#include "wts/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wts;

namespace {

struct GridFlags {
	std::optional<std::size_t> d;
	std::optional<double> y_min;
	std::optional<double> y_max;

	void add(CLI::App *cmd, const std::string &defaults) {
		cmd->add_option("--grid-d", d, "number of value tokens" + defaults)->check(CLI::Range(2, 1 << 20));
		cmd->add_option("--grid-min", y_min, "lower bound of the scaled-value grid" + defaults);
		cmd->add_option("--grid-max", y_max, "upper bound of the scaled-value grid" + defaults);
	}
	void apply(GridSpec &g) const {
		if (d)
			g.d = *d;
		if (y_min)
			g.y_min = *y_min;
		if (y_max)
			g.y_max = *y_max;
	}
};

Suite suite_from(const std::string &path) { return path.empty() ? default_suite() : load_suite(path); }

void write_text(const fs::path &path, const std::string &text) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw Error(ErrorCategory::Io, "cannot write '" + path.string() + "'");
	out << text;
}

std::vector<LossKind> parse_losses(const std::vector<std::string> &names, bool raw) {
	std::vector<LossKind> out;
	for (const std::string &n : names)
		out.push_back(LossKind::parse(n, raw));
	return out;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"Tokenized time-series forecasting with cross-entropy or Wasserstein loss"};
	app.set_config("--config", "", "read flags from a TOML/INI file");
	app.require_subcommand(1);
	std::string kernel_choice = "auto";
	app.add_option("--kernels", kernel_choice, "arithmetic kernels: auto, scalar or avx2")
	    ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

	// generate
	auto *gen = app.add_subcommand("generate", "write the synthetic benchmark suite as JSONL datasets");
	std::string gen_suite, gen_out;
	gen->add_option("--suite", gen_suite, "suite manifest (default: built-in desk suite)");
	gen->add_option("--out", gen_out, "output directory")->required();

	// train
	auto *tr = app.add_subcommand("train", "train a model on one dataset");
	std::string tr_dataset, tr_out, tr_loss = "ce", tr_base;
	bool tr_raw = false;
	ExperimentConfig tr_cfg;
	GridFlags tr_grid;
	tr->add_option("--dataset", tr_dataset, "JSONL dataset")->required();
	tr->add_option("--loss", tr_loss, "training loss")->check(CLI::IsMember({"ce", "w1", "w2"}))->capture_default_str();
	tr->add_flag("--raw-wasserstein", tr_raw, "optimise the distance itself instead of its p-th power");
	tr->add_option("--steps", tr_cfg.train.steps, "optimizer steps")->capture_default_str();
	tr->add_option("--lr", tr_cfg.train.lr_initial, "initial learning rate, decays linearly to 0")->capture_default_str();
	tr->add_option("--batch-size", tr_cfg.train.batch_size, "windows per step")->capture_default_str();
	tr->add_option("--seed", tr_cfg.train.seed, "window sampling seed")->capture_default_str();
	tr->add_option("--model-seed", tr_cfg.model.seed, "initialisation seed")->capture_default_str();
	tr->add_option("--context", tr_cfg.model.context_length, "context length")->capture_default_str();
	tr->add_option("--embed-dim", tr_cfg.model.embed_dim, "embedding width")->capture_default_str();
	tr->add_option("--layers", tr_cfg.model.num_layers, "transformer layers")->capture_default_str();
	tr->add_option("--heads", tr_cfg.model.num_heads, "attention heads")->capture_default_str();
	tr->add_option("--base", tr_base, "start from this checkpoint instead of a fresh model");
	tr_grid.add(tr, " (default 4094 on [-15, 15])");
	tr->add_option("--out", tr_out, "output directory")->required();

	// evaluate
	auto *ev = app.add_subcommand("evaluate", "forecast a dataset with a checkpoint and score it");
	std::string ev_ckpt, ev_dataset, ev_out;
	EvalConfig ev_cfg;
	bool ev_paths = false;
	ev->add_option("--checkpoint", ev_ckpt, "checkpoint.json from train")->required();
	ev->add_option("--dataset", ev_dataset, "JSONL dataset")->required();
	ev->add_option("--n-paths", ev_cfg.n_paths, "sample paths per series")->capture_default_str();
	ev->add_option("--seed", ev_cfg.seed, "sampling seed")->capture_default_str();
	ev->add_option("--temperature", ev_cfg.temperature, "sampling temperature")->capture_default_str();
	ev->add_flag("--dump-paths", ev_paths, "include every sample path in forecasts.csv");
	ev->add_option("--out", ev_out, "output directory")->required();

	// compare
	auto *cmp = app.add_subcommand("compare", "train and evaluate every loss on a suite and report the deltas");
	std::string cmp_suite, cmp_out, cmp_base;
	std::vector<std::string> cmp_losses{"ce", "w1", "w2"};
	std::optional<std::size_t> cmp_steps, cmp_n_paths, cmp_pre_steps;
	std::optional<double> cmp_lr;
	std::optional<std::uint64_t> cmp_seed;
	bool cmp_raw = false, cmp_scratch = false;
	std::size_t cmp_jobs = 1;
	GridFlags cmp_grid;
	cmp->add_option("--suite", cmp_suite, "suite manifest (default: built-in desk suite)");
	cmp->add_option("--losses", cmp_losses, "losses to compare")
	    ->delimiter(',')
	    ->check(CLI::IsMember({"ce", "w1", "w2"}));
	cmp->add_option("--loss", cmp_losses, "alias of --losses")->delimiter(',')->check(CLI::IsMember({"ce", "w1", "w2"}));
	cmp->add_flag("--raw-wasserstein", cmp_raw, "optimise the distance itself instead of its p-th power");
	cmp->add_option("--steps", cmp_steps, "override the suite's optimizer steps");
	cmp->add_option("--lr", cmp_lr, "override the suite's initial learning rate");
	cmp->add_option("--seed", cmp_seed, "override the suite's training seed");
	cmp->add_option("--n-paths", cmp_n_paths, "override the suite's sample paths per series");
	cmp->add_option("--pretrain-steps", cmp_pre_steps, "override the suite's base pretraining steps");
	auto *scratch = cmp->add_flag("--from-scratch", cmp_scratch, "train every loss from a fresh model");
	cmp->add_option("--base", cmp_base, "fine-tune every loss from this checkpoint (default: pretrain one per the suite)")
	    ->excludes(scratch);
	cmp->add_option("--jobs", cmp_jobs, "concurrent (loss, dataset) jobs")->check(CLI::PositiveNumber);
	cmp_grid.add(cmp, " (default from the suite)");
	cmp->add_option("--out", cmp_out, "output directory")->required();

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp &e) {
		return app.exit(e);
	} catch (const CLI::CallForAllHelp &e) {
		return app.exit(e);
	} catch (const CLI::ParseError &e) {
		std::cerr << "error[config]: " << e.what() << '\n';
		return static_cast<int>(ErrorCategory::Config);
	}

	try {
		if (kernel_choice == "scalar")
			kernels::set_backend(kernels::Backend::Scalar);
		else if (kernel_choice == "avx2")
			kernels::set_backend(kernels::Backend::Avx2);

		if (*gen) {
			const Suite suite = suite_from(gen_suite);
			fs::create_directories(gen_out);
			for (const SuiteEntry &e : suite.datasets) {
				const fs::path p = fs::path(gen_out) / (e.name + ".jsonl");
				save_dataset(p, e.generate());
				std::cout << "wrote " << p.string() << '\n';
			}
			write_text(fs::path(gen_out) / "manifest.json", suite_to_json(suite));
			std::cout << "wrote " << (fs::path(gen_out) / "manifest.json").string() << '\n';
		} else if (*tr) {
			tr_grid.apply(tr_cfg.grid);
			tr_cfg.train.loss = LossKind::parse(tr_loss, tr_raw);
			const Dataset ds = load_dataset(tr_dataset);
			std::optional<Checkpoint> base;
			if (!tr_base.empty()) {
				base = load_checkpoint(tr_base);
				tr_cfg.grid = {base->grid.size(), base->grid.y_min(), base->grid.y_max()};
				tr_cfg.model = base->model.config();
			}
			TrainedRun run = train_on_dataset(ds, tr_cfg, base ? &base->model : nullptr);
			fs::create_directories(tr_out);
			save_checkpoint(fs::path(tr_out) / "checkpoint.json", run.checkpoint);
			write_loss_curve_csv(fs::path(tr_out) / "loss_curve.csv", run.result.history);
			std::cout << "trained " << run.checkpoint.model.parameter_count() << " parameters for "
			          << tr_cfg.train.steps << " steps (" << tr_loss << "), final loss "
			          << run.result.history.back().loss << '\n';
		} else if (*ev) {
			if (!fs::exists(ev_ckpt))
				throw Error(ErrorCategory::Io, "checkpoint '" + ev_ckpt + "' does not exist");
			const Checkpoint ck = load_checkpoint(ev_ckpt);
			const Dataset ds = load_dataset(ev_dataset);
			const DatasetEvaluation result = evaluate_dataset(ck.model, ck.grid, ds, ev_cfg);
			const MetricReport report = relative_and_aggregate({{ds.name, result.scores}});
			fs::create_directories(ev_out);
			write_metrics_csv(fs::path(ev_out) / "metrics.csv", report);
			write_forecasts_csv(fs::path(ev_out) / "forecasts.csv", result, ev_paths);
			const DatasetScores &s = report.per_dataset.at(ds.name);
			std::cout << ds.name << ": MASE " << s.mase << " (baseline " << s.mase_baseline << ", relative "
			          << s.rel_mase << "), WQL " << s.wql << " (baseline " << s.wql_baseline << ", relative "
			          << s.rel_wql << ")";
			if (s.excluded)
				std::cout << ", " << s.excluded << " series excluded from MASE";
			std::cout << '\n';
		} else if (*cmp) {
			CompareOptions opts;
			opts.suite = suite_from(cmp_suite);
			ExperimentConfig &exp = opts.suite.experiment;
			cmp_grid.apply(exp.grid);
			if (cmp_steps)
				exp.train.steps = *cmp_steps;
			if (cmp_lr)
				exp.train.lr_initial = *cmp_lr;
			if (cmp_seed)
				exp.train.seed = *cmp_seed;
			if (cmp_n_paths)
				exp.eval.n_paths = *cmp_n_paths;
			if (cmp_pre_steps) {
				if (!opts.suite.pretrain)
					throw Error(ErrorCategory::Config, "--pretrain-steps given but the suite has no pretrain section");
				opts.suite.pretrain->steps = *cmp_pre_steps;
			}
			exp.grid.build();
			exp.train.validate();
			opts.losses = parse_losses(cmp_losses, cmp_raw);
			opts.out_dir = cmp_out;
			opts.jobs = cmp_jobs;
			opts.from_scratch = cmp_scratch;
			if (!cmp_base.empty())
				opts.base_checkpoint = cmp_base;
			const CompareResult res = run_compare(opts, &std::cout);
			std::cout << "\naggregate relative scores (geometric mean over datasets)\n";
			for (const auto &name : res.loss_order) {
				const MetricReport &r = res.reports.at(name);
				std::cout << "  " << name << ": MASE " << r.agg_rel_mase << ", WQL " << r.agg_rel_wql << '\n';
			}
			std::cout << "reports written to " << cmp_out << '\n';
		}
	} catch (const Error &e) {
		std::cerr << "error[" << category_name(e.category()) << "]: " << e.what() << '\n';
		return static_cast<int>(e.category());
	} catch (const std::exception &e) {
		std::cerr << "error[internal]: " << e.what() << '\n';
		return 1;
	}
	return 0;
}
