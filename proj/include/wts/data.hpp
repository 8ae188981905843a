#pragma once

// Synthetic benchmark series, JSONL dataset files and the last-k split.

#include "wts/quantizer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wts {

enum class GeneratorKind { Sinusoid, Ar1, TrendSeasonal, RandomWalk, Constant };

GeneratorKind parse_generator_kind(std::string_view name);
std::string_view generator_kind_name(GeneratorKind kind) noexcept;

/// Parameters by name. Unknown names are rejected. Defaults per kind:
///
///   sinusoid        level 5, amplitude_min 1, amplitude_max 3, period 12, noise 0.1
///   ar1             level 0, phi 0.9, sigma 0.1
///   trend_seasonal  level 10, slope_max 0.05, amplitude 2, period 12, noise 0.2
///   random_walk     level 0, sigma 1
///   constant        level_min 1, level_max 10, noise 0
///
/// Every kind also takes "season" and "horizon". Seasonal kinds default to
/// season = period and horizon = 2 * period; the rest to season 1, horizon 8.
using GeneratorParams = std::map<std::string, double>;

struct GeneratorSpec {
	GeneratorKind kind = GeneratorKind::Sinusoid;
	GeneratorParams params;
	std::uint64_t seed = 0;
};

struct Dataset {
	std::string name;
	std::vector<TimeSeries> series;
	std::optional<GeneratorSpec> generator;
};

/// Deterministic in seed. Throws Error(Config) on invalid parameters, e.g.
/// |phi| >= 1, negative noise, or a length that leaves no training data.
Dataset generate(std::string name, GeneratorKind kind, std::size_t n_series, std::size_t length, std::uint64_t seed,
                 const GeneratorParams &params = {});

struct Split {
	std::vector<double> train;
	std::vector<double> test;
};

/// The last `horizon` observations form the test slice.
Split split(const TimeSeries &ts);

/// One JSON object per line: {"id", "values", "season_length", "horizon"}.
void save_dataset(const std::filesystem::path &path, const Dataset &ds);
/// Dataset name is the file stem. Malformed lines raise Error(Data) naming the
/// line number and, where relevant, the field.
Dataset load_dataset(const std::filesystem::path &path);

} // namespace wts
