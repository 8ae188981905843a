#include "wts/data.hpp"
#include "wts/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace wts;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
	const fs::path dir = fs::temp_directory_path() / "wts_test_data";
	fs::create_directories(dir);
	return dir;
}

fs::path write_file(const std::string &name, const std::string &text) {
	const fs::path p = scratch_dir() / name;
	std::ofstream(p, std::ios::binary) << text;
	return p;
}

std::string load_error(const fs::path &p) {
	try {
		load_dataset(p);
	} catch (const Error &e) {
		CHECK(e.category() == ErrorCategory::Data);
		return e.what();
	}
	FAIL("expected a load error");
	return {};
}

double lag1_autocorrelation(const std::vector<double> &x) {
	double mean = 0.0;
	for (double v : x)
		mean += v;
	mean /= static_cast<double>(x.size());
	double num = 0.0, den = 0.0;
	for (std::size_t t = 0; t < x.size(); ++t) {
		den += (x[t] - mean) * (x[t] - mean);
		if (t > 0)
			num += (x[t] - mean) * (x[t - 1] - mean);
	}
	return num / den;
}

} // namespace

TEST_CASE("generator kinds") {
	for (GeneratorKind k : {GeneratorKind::Sinusoid, GeneratorKind::Ar1, GeneratorKind::TrendSeasonal,
	                        GeneratorKind::RandomWalk, GeneratorKind::Constant}) {
		CAPTURE(generator_kind_name(k));
		CHECK(parse_generator_kind(generator_kind_name(k)) == k);
		const Dataset a = generate("d", k, 4, 80, 42);
		const Dataset b = generate("d", k, 4, 80, 42);
		const Dataset c = generate("d", k, 4, 80, 43);
		REQUIRE(a.series.size() == 4);
		bool differs = false;
		for (std::size_t i = 0; i < 4; ++i) {
			CHECK(a.series[i].values.size() == 80);
			CHECK(a.series[i].values == b.series[i].values);
			differs = differs || a.series[i].values != c.series[i].values;
			for (double v : a.series[i].values)
				CHECK(std::isfinite(v));
			CHECK_NOTHROW(validate(a.series[i]));
		}
		CHECK(differs);
		CHECK(a.series[0].id != a.series[1].id);
	}
	CHECK_THROWS_AS(parse_generator_kind("sawtooth"), Error);
}

TEST_CASE("generator parameters") {
	SUBCASE("constant series are constant") {
		const Dataset ds = generate("c", GeneratorKind::Constant, 5, 30, 1);
		for (const auto &ts : ds.series)
			for (double v : ts.values)
				CHECK(v == ts.values.front());
	}
	SUBCASE("seasonal defaults") {
		const Dataset ds = generate("s", GeneratorKind::Sinusoid, 1, 100, 1, {{"period", 7}});
		CHECK(ds.series[0].season_length == 7);
		CHECK(ds.series[0].horizon == 14);
		const Dataset rw = generate("r", GeneratorKind::RandomWalk, 1, 100, 1);
		CHECK(rw.series[0].season_length == 1);
		CHECK(rw.series[0].horizon == 8);
	}
	SUBCASE("ar1 lag-1 autocorrelation") {
		const Dataset ds = generate("a", GeneratorKind::Ar1, 8, 2048, 7, {{"phi", 0.9}, {"sigma", 0.1}});
		for (const auto &ts : ds.series) {
			const double rho = lag1_autocorrelation(ts.values);
			CHECK(rho >= 0.8);
			CHECK(rho <= 0.95);
		}
	}
	SUBCASE("invalid parameters") {
		CHECK_THROWS_AS(generate("a", GeneratorKind::Ar1, 1, 100, 1, {{"phi", 1.0}}), Error);
		CHECK_THROWS_AS(generate("a", GeneratorKind::Ar1, 1, 100, 1, {{"sigma", -1.0}}), Error);
		CHECK_THROWS_AS(generate("a", GeneratorKind::Ar1, 1, 100, 1, {{"bogus", 1.0}}), Error);
		CHECK_THROWS_AS(generate("a", GeneratorKind::Sinusoid, 1, 100, 1, {{"period", 2.5}}), Error);
		CHECK_THROWS_AS(generate("a", GeneratorKind::Ar1, 0, 100, 1), Error);
		CHECK_THROWS_AS(generate("a", GeneratorKind::Sinusoid, 1, 30, 1), Error);
	}
}

TEST_CASE("split") {
	TimeSeries ts{"x", {1, 2, 3, 4, 5}, 1, 2};
	Split s = split(ts);
	CHECK(s.train == std::vector<double>{1, 2, 3});
	CHECK(s.test == std::vector<double>{4, 5});
	ts.horizon = 4;
	CHECK(split(ts).train == std::vector<double>{1});
	ts.horizon = 5;
	CHECK_THROWS_AS(split(ts), Error);

	std::mt19937_64 rng(2);
	for (int trial = 0; trial < 200; ++trial) {
		TimeSeries r{"r", std::vector<double>(2 + rng() % 50), 1, 1};
		for (double &v : r.values)
			v = std::ldexp(static_cast<double>(rng() % 1000), -3);
		r.horizon = 1 + rng() % (r.values.size() - 1);
		Split p = split(r);
		CHECK(p.test.size() == r.horizon);
		p.train.insert(p.train.end(), p.test.begin(), p.test.end());
		CHECK(p.train == r.values);
	}
}

TEST_CASE("dataset files") {
	SUBCASE("save then load") {
		const Dataset ds = generate("roundtrip", GeneratorKind::TrendSeasonal, 3, 60, 9);
		const fs::path p = scratch_dir() / "roundtrip.jsonl";
		save_dataset(p, ds);
		const Dataset back = load_dataset(p);
		CHECK(back.name == "roundtrip");
		REQUIRE(back.series.size() == ds.series.size());
		for (std::size_t i = 0; i < ds.series.size(); ++i) {
			CHECK(back.series[i].id == ds.series[i].id);
			CHECK(back.series[i].values == ds.series[i].values);
			CHECK(back.series[i].season_length == ds.series[i].season_length);
			CHECK(back.series[i].horizon == ds.series[i].horizon);
		}
	}
	SUBCASE("missing horizon names the field and line") {
		const auto p = write_file("nohorizon.jsonl", "{\"id\":\"a\",\"values\":[1,2,3],\"season_length\":1,\"horizon\":1}\n"
		                                             "{\"id\":\"b\",\"values\":[1,2,3],\"season_length\":1}\n");
		const std::string msg = load_error(p);
		CHECK(msg.find("horizon") != std::string::npos);
		CHECK(msg.find(":2:") != std::string::npos);
	}
	SUBCASE("non-finite values rejected") {
		const auto p = write_file("nan.jsonl", "{\"id\":\"a\",\"values\":[1,NaN],\"season_length\":1,\"horizon\":1}\n");
		CHECK(load_error(p).find(":1:") != std::string::npos);
		const auto q = write_file("null.jsonl", "{\"id\":\"a\",\"values\":[1,null],\"season_length\":1,\"horizon\":1}\n");
		CHECK(load_error(q).find("values") != std::string::npos);
	}
	SUBCASE("duplicate ids rejected") {
		const auto p = write_file("dup.jsonl", "{\"id\":\"a\",\"values\":[1,2],\"season_length\":1,\"horizon\":1}\n"
		                                       "{\"id\":\"a\",\"values\":[1,2],\"season_length\":1,\"horizon\":1}\n");
		CHECK(load_error(p).find("duplicate") != std::string::npos);
	}
	SUBCASE("missing file is an io error") {
		try {
			load_dataset(scratch_dir() / "does_not_exist.jsonl");
			FAIL("expected an error");
		} catch (const Error &e) {
			CHECK(e.category() == ErrorCategory::Io);
		}
	}
}
