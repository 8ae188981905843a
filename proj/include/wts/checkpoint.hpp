#pragma once

#include "wts/model.hpp"
#include "wts/quantizer.hpp"
#include "wts/trainer.hpp"

#include <filesystem>
#include <string>

namespace wts {

/// Everything needed to resume or evaluate a trained model. Stored as a
/// versioned JSON document; doubles are written in shortest round-trip form
/// so save/load reproduces every parameter bit-for-bit.
struct Checkpoint {
	static constexpr int kVersion = 1;

	Model model{ModelConfig{}};
	Grid grid = Grid::standard();
	TrainConfig train;
	std::string rng_state;
};

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace wts
