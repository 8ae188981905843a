#include "wts/data.hpp"

#include "wts/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

namespace wts {

namespace {

struct KindInfo {
	GeneratorKind kind;
	std::string_view name;
	GeneratorParams defaults;
	bool seasonal;
};

const std::vector<KindInfo> &kinds() {
	static const std::vector<KindInfo> k{
	    {GeneratorKind::Sinusoid,
	     "sinusoid",
	     {{"level", 5.0}, {"amplitude_min", 1.0}, {"amplitude_max", 3.0}, {"period", 12.0}, {"noise", 0.1}},
	     true},
	    {GeneratorKind::Ar1, "ar1", {{"level", 0.0}, {"phi", 0.9}, {"sigma", 0.1}}, false},
	    {GeneratorKind::TrendSeasonal,
	     "trend_seasonal",
	     {{"level", 10.0}, {"slope_max", 0.05}, {"amplitude", 2.0}, {"period", 12.0}, {"noise", 0.2}},
	     true},
	    {GeneratorKind::RandomWalk, "random_walk", {{"level", 0.0}, {"sigma", 1.0}}, false},
	    {GeneratorKind::Constant, "constant", {{"level_min", 1.0}, {"level_max", 10.0}, {"noise", 0.0}}, false},
	};
	return k;
}

const KindInfo &info(GeneratorKind kind) {
	for (const KindInfo &k : kinds())
		if (k.kind == kind)
			return k;
	throw Error(ErrorCategory::Config, "unknown generator kind");
}

std::size_t positive_count(const GeneratorParams &p, const std::string &key) {
	const double v = p.at(key);
	if (!(v >= 1.0) || v != std::floor(v))
		throw Error(ErrorCategory::Config, "generator parameter '" + key + "' must be a positive integer");
	return static_cast<std::size_t>(v);
}

void require_nonnegative(const GeneratorParams &p, const std::string &key) {
	if (!(p.at(key) >= 0.0))
		throw Error(ErrorCategory::Config, "generator parameter '" + key + "' must be >= 0");
}

} // namespace

GeneratorKind parse_generator_kind(std::string_view name) {
	for (const KindInfo &k : kinds())
		if (k.name == name)
			return k.kind;
	throw Error(ErrorCategory::Config, "unknown generator kind '" + std::string(name) + "'");
}

std::string_view generator_kind_name(GeneratorKind kind) noexcept {
	for (const KindInfo &k : kinds())
		if (k.kind == kind)
			return k.name;
	return "unknown";
}

Dataset generate(std::string name, GeneratorKind kind, std::size_t n_series, std::size_t length, std::uint64_t seed,
                 const GeneratorParams &params) {
	const KindInfo &ki = info(kind);
	GeneratorParams p = ki.defaults;
	for (const auto &[key, value] : params) {
		if (key != "season" && key != "horizon" && !ki.defaults.contains(key))
			throw Error(ErrorCategory::Config,
			            "generator '" + std::string(ki.name) + "' has no parameter '" + key + "'");
		if (!std::isfinite(value))
			throw Error(ErrorCategory::Config, "generator parameter '" + key + "' is not finite");
		p[key] = value;
	}
	if (ki.seasonal) {
		const std::size_t period = positive_count(p, "period");
		p.try_emplace("season", static_cast<double>(period));
		p.try_emplace("horizon", static_cast<double>(2 * period));
	} else {
		p.try_emplace("season", 1.0);
		p.try_emplace("horizon", 8.0);
	}
	const std::size_t season = positive_count(p, "season");
	const std::size_t horizon = positive_count(p, "horizon");
	if (n_series == 0)
		throw Error(ErrorCategory::Config, "n_series must be >= 1");
	if (length <= horizon + season + 1)
		throw Error(ErrorCategory::Config, "series length must exceed horizon + season + 1");

	std::mt19937_64 rng(seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
	constexpr double two_pi = 2.0 * std::numbers::pi;

	Dataset ds;
	ds.name = std::move(name);
	ds.generator = GeneratorSpec{kind, params, seed};
	for (std::size_t s = 0; s < n_series; ++s) {
		TimeSeries ts;
		char id[32];
		std::snprintf(id, sizeof id, "_%04zu", s);
		ts.id = ds.name + id;
		ts.season_length = season;
		ts.horizon = horizon;
		ts.values.resize(length);
		auto &x = ts.values;
		switch (kind) {
		case GeneratorKind::Sinusoid: {
			require_nonnegative(p, "noise");
			if (!(p["amplitude_min"] <= p["amplitude_max"]))
				throw Error(ErrorCategory::Config, "amplitude_min must not exceed amplitude_max");
			const double period = p["period"];
			const double amp = uniform(p["amplitude_min"], p["amplitude_max"]);
			const double phase = uniform(0.0, two_pi);
			for (std::size_t t = 0; t < length; ++t)
				x[t] = p["level"] + amp * std::sin(two_pi * static_cast<double>(t) / period + phase) +
				       p["noise"] * normal(rng);
			break;
		}
		case GeneratorKind::Ar1: {
			const double phi = p["phi"], sigma = p["sigma"];
			if (!(std::abs(phi) < 1.0))
				throw Error(ErrorCategory::Config, "ar1 requires |phi| < 1");
			require_nonnegative(p, "sigma");
			double y = sigma / std::sqrt(1.0 - phi * phi) * normal(rng); // stationary start
			for (std::size_t t = 0; t < length; ++t) {
				x[t] = p["level"] + y;
				y = phi * y + sigma * normal(rng);
			}
			break;
		}
		case GeneratorKind::TrendSeasonal: {
			require_nonnegative(p, "noise");
			require_nonnegative(p, "slope_max");
			const double period = p["period"];
			const double slope = uniform(0.0, p["slope_max"]);
			const double phase = uniform(0.0, two_pi);
			for (std::size_t t = 0; t < length; ++t) {
				const double tt = static_cast<double>(t);
				x[t] = p["level"] + slope * tt + p["amplitude"] * std::sin(two_pi * tt / period + phase) +
				       p["noise"] * normal(rng);
			}
			break;
		}
		case GeneratorKind::RandomWalk: {
			require_nonnegative(p, "sigma");
			double v = p["level"];
			for (std::size_t t = 0; t < length; ++t) {
				x[t] = v;
				v += p["sigma"] * normal(rng);
			}
			break;
		}
		case GeneratorKind::Constant: {
			require_nonnegative(p, "noise");
			if (!(p["level_min"] <= p["level_max"]))
				throw Error(ErrorCategory::Config, "level_min must not exceed level_max");
			const double level = uniform(p["level_min"], p["level_max"]);
			for (std::size_t t = 0; t < length; ++t)
				x[t] = p["noise"] > 0.0 ? level + p["noise"] * normal(rng) : level;
			break;
		}
		}
		ds.series.push_back(std::move(ts));
	}
	return ds;
}

Split split(const TimeSeries &ts) {
	validate(ts);
	if (ts.values.size() <= ts.horizon)
		throw Error(ErrorCategory::Data, "series '" + ts.id + "' is not longer than its horizon");
	const auto cut = ts.values.begin() + static_cast<std::ptrdiff_t>(ts.values.size() - ts.horizon);
	return {std::vector<double>(ts.values.begin(), cut), std::vector<double>(cut, ts.values.end())};
}

void save_dataset(const std::filesystem::path &path, const Dataset &ds) {
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw Error(ErrorCategory::Io, "cannot write dataset '" + path.string() + "'");
	for (const TimeSeries &ts : ds.series) {
		nlohmann::ordered_json j;
		j["id"] = ts.id;
		j["values"] = ts.values;
		j["season_length"] = ts.season_length;
		j["horizon"] = ts.horizon;
		out << j.dump() << '\n';
	}
	if (!out)
		throw Error(ErrorCategory::Io, "failed writing dataset '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error(ErrorCategory::Io, "cannot open dataset '" + path.string() + "'");
	Dataset ds;
	ds.name = path.stem().string();
	std::set<std::string> ids;
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (line.find_first_not_of(" \t\r") == std::string::npos)
			continue;
		const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
		nlohmann::json j;
		try {
			j = nlohmann::json::parse(line);
		} catch (const nlohmann::json::parse_error &e) {
			throw Error(ErrorCategory::Data, where + "malformed JSON (" + e.what() + ")");
		}
		if (!j.is_object())
			throw Error(ErrorCategory::Data, where + "expected a JSON object");
		for (const char *field : {"id", "values", "season_length", "horizon"})
			if (!j.contains(field))
				throw Error(ErrorCategory::Data, where + "missing field \"" + field + "\"");
		TimeSeries ts;
		try {
			ts.id = j["id"].get<std::string>();
		} catch (const nlohmann::json::exception &) {
			throw Error(ErrorCategory::Data, where + "field \"id\" must be a string");
		}
		const auto &vals = j["values"];
		if (!vals.is_array())
			throw Error(ErrorCategory::Data, where + "field \"values\" must be an array");
		for (const auto &v : vals) {
			if (!v.is_number() || !std::isfinite(v.get<double>()))
				throw Error(ErrorCategory::Data, where + "field \"values\" has a non-finite entry");
			ts.values.push_back(v.get<double>());
		}
		for (const char *field : {"season_length", "horizon"}) {
			const auto &v = j[field];
			if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
				throw Error(ErrorCategory::Data, where + "field \"" + field + "\" must be a positive integer");
		}
		ts.season_length = j["season_length"].get<std::size_t>();
		ts.horizon = j["horizon"].get<std::size_t>();
		if (ts.values.empty())
			throw Error(ErrorCategory::Data, where + "field \"values\" is empty");
		if (!ids.insert(ts.id).second)
			throw Error(ErrorCategory::Data, where + "duplicate series id '" + ts.id + "'");
		ds.series.push_back(std::move(ts));
	}
	return ds;
}

} // namespace wts
