#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wts {

/// Dense row-major matrix.
template <typename T>
struct BasicMatrix {
	std::size_t rows = 0;
	std::size_t cols = 0;
	std::vector<T> data;

	BasicMatrix() = default;
	BasicMatrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

	std::span<T> row(std::size_t i) noexcept { return {data.data() + i * cols, cols}; }
	std::span<const T> row(std::size_t i) const noexcept { return {data.data() + i * cols, cols}; }
	T &operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols + j]; }
	const T &operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }

	bool operator==(const BasicMatrix &) const = default;
};

using Matrix = BasicMatrix<double>;

} // namespace wts
