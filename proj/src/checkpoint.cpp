#include "wts/checkpoint.hpp"

#include "wts/error.hpp"

#include <json.hpp>

#include <fstream>

namespace wts {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ck) {
	const ModelConfig &mc = ck.model.config();
	json j;
	j["format"] = "wts-checkpoint";
	j["version"] = Checkpoint::kVersion;
	j["model"] = {{"vocab_size", mc.vocab_size}, {"context_length", mc.context_length},
	              {"embed_dim", mc.embed_dim},   {"num_layers", mc.num_layers},
	              {"num_heads", mc.num_heads},   {"seed", mc.seed}};
	j["grid"] = {{"d", ck.grid.size()}, {"y_min", ck.grid.y_min()}, {"y_max", ck.grid.y_max()}};
	j["train"] = {{"steps", ck.train.steps},
	              {"lr_initial", ck.train.lr_initial},
	              {"batch_size", ck.train.batch_size},
	              {"loss", std::string(ck.train.loss.name())},
	              {"raw_wasserstein", ck.train.loss.mode == PowerMode::Raw},
	              {"seed", ck.train.seed}};
	j["rng_state"] = ck.rng_state;
	j["parameters"] = std::vector<double>(ck.model.parameters().begin(), ck.model.parameters().end());

	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw Error(ErrorCategory::Io, "cannot write checkpoint '" + path.string() + "'");
	out << j.dump() << '\n';
	if (!out)
		throw Error(ErrorCategory::Io, "failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error(ErrorCategory::Io, "cannot open checkpoint '" + path.string() + "'");
	json j;
	try {
		j = json::parse(in);
		if (j.at("format").get<std::string>() != "wts-checkpoint")
			throw Error(ErrorCategory::Data, "'" + path.string() + "' is not a checkpoint");
		if (j.at("version").get<int>() != Checkpoint::kVersion)
			throw Error(ErrorCategory::Data, "unsupported checkpoint version");
		const json &m = j.at("model");
		ModelConfig mc;
		mc.vocab_size = m.at("vocab_size").get<std::size_t>();
		mc.context_length = m.at("context_length").get<std::size_t>();
		mc.embed_dim = m.at("embed_dim").get<std::size_t>();
		mc.num_layers = m.at("num_layers").get<std::size_t>();
		mc.num_heads = m.at("num_heads").get<std::size_t>();
		mc.seed = m.at("seed").get<std::uint64_t>();
		const json &g = j.at("grid");
		const json &t = j.at("train");

		Checkpoint ck{Model(mc), Grid(g.at("d").get<std::size_t>(), g.at("y_min").get<double>(),
		                              g.at("y_max").get<double>()),
		              TrainConfig{}, j.at("rng_state").get<std::string>()};
		ck.train.steps = t.at("steps").get<std::size_t>();
		ck.train.lr_initial = t.at("lr_initial").get<double>();
		ck.train.batch_size = t.at("batch_size").get<std::size_t>();
		ck.train.loss = LossKind::parse(t.at("loss").get<std::string>(), t.at("raw_wasserstein").get<bool>());
		ck.train.seed = t.at("seed").get<std::uint64_t>();
		if (ck.grid.vocab_size() != mc.vocab_size)
			throw Error(ErrorCategory::Data, "checkpoint grid and model vocabulary disagree");

		const auto params = j.at("parameters").get<std::vector<double>>();
		if (params.size() != ck.model.parameter_count())
			throw Error(ErrorCategory::Data, "checkpoint parameter count does not match its model config");
		std::copy(params.begin(), params.end(), ck.model.parameters().begin());
		return ck;
	} catch (const json::exception &e) {
		throw Error(ErrorCategory::Data, "malformed checkpoint '" + path.string() + "': " + e.what());
	}
}

} // namespace wts
