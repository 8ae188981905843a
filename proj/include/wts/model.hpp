#pragma once

// A small decoder-only transformer over the token vocabulary, with a
// hand-written reverse pass.
//
// Architecture (pre-norm, learned absolute positions):
//
//   x = tok_emb[token] + pos_emb[t]
//   repeat num_layers times:
//     x += Wo * attn(LN1(x)) + bo          causal multi-head self-attention
//     x += W2 * gelu(W1 * LN2(x) + b1) + b2   hidden width 4 * embed_dim
//   logits = W_head * LNf(x) + b_head
//
// Parameter count, with V = vocab_size, m = context_length, D = embed_dim,
// L = num_layers:
//
//   V*D + m*D + L*(12*D^2 + 13*D) + 2*D + V*D + V
//
// The last two value ids of the vocabulary are PAD (V-2) and EOS (V-1); the
// ordinal value tokens are 0..V-3.

#include "wts/loss.hpp"
#include "wts/quantizer.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wts {

struct ModelConfig {
	std::size_t vocab_size = 66;
	std::size_t context_length = 64;
	std::size_t embed_dim = 64;
	std::size_t num_layers = 2;
	std::size_t num_heads = 2;
	std::uint64_t seed = 0;

	/// Throws Error(Config) on a violated invariant.
	void validate() const;
	std::size_t value_tokens() const noexcept { return vocab_size - 2; }
	Token pad_token() const noexcept { return static_cast<Token>(vocab_size - 2); }
	Token eos_token() const noexcept { return static_cast<Token>(vocab_size - 1); }
	std::size_t hidden_dim() const noexcept { return 4 * embed_dim; }
	/// Closed-form parameter count (see header comment).
	std::size_t parameter_count() const noexcept;

	bool operator==(const ModelConfig &) const = default;
};

/// A named block in the flat parameter vector, stored row-major as
/// rows x cols (out x in for weight matrices).
struct TensorSlot {
	std::string name;
	std::size_t offset = 0;
	std::size_t rows = 0;
	std::size_t cols = 0;
	std::size_t size() const noexcept { return rows * cols; }
};

struct LayerSlots {
	std::size_t ln1_g, ln1_b;
	std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
	std::size_t ln2_g, ln2_b;
	std::size_t w1, b1, w2, b2;
};

struct ParamLayout {
	std::size_t tok_emb = 0;
	std::size_t pos_emb = 0;
	std::vector<LayerSlots> layers;
	std::size_t lnf_g = 0, lnf_b = 0;
	std::size_t head_w = 0, head_b = 0;
	std::size_t total = 0;
	std::vector<TensorSlot> tensors;

	static ParamLayout build(const ModelConfig &config);
};

class Model {
public:
	explicit Model(ModelConfig config);

	const ModelConfig &config() const noexcept { return config_; }
	const ParamLayout &layout() const noexcept { return layout_; }
	std::span<const double> parameters() const noexcept { return params_; }
	std::span<double> parameters() noexcept { return params_; }
	std::size_t parameter_count() const noexcept { return params_.size(); }

private:
	ModelConfig config_;
	ParamLayout layout_;
	std::vector<double> params_;
};

/// Deterministic initialisation from config.seed.
Model init_model(const ModelConfig &config);

/// Per-position activations retained for the reverse pass and for incremental
/// decoding.
struct ForwardCache {
	struct Layer {
		std::vector<double> xin, ln1, mean1, rstd1, q, k, v, att, ctx, xmid, ln2, mean2, rstd2, hpre, hact;
	};
	std::size_t length = 0;
	std::size_t capacity = 0;
	std::vector<Token> tokens;
	std::vector<Layer> layers;
	std::vector<double> xfin, lnf, meanf, rstdf;
	Matrix logits;

	void reset(const ModelConfig &config, std::size_t capacity);
};

/// Appends one position to the cache and fills its logit row. Rows already in
/// the cache are untouched, so running this position by position is the full
/// causal forward pass.
void forward_step(const Model &model, ForwardCache &cache, Token token);

/// Logits for every position, shape tokens.size() x vocab_size.
Matrix forward(const Model &model, std::span<const Token> tokens);
void forward(const Model &model, std::span<const Token> tokens, ForwardCache &cache);

/// Accumulates dL/dparams into grad given dL/dlogits for the cached positions.
void backward_from_logits(const Model &model, const ForwardCache &cache, std::span<const double> dlogits,
                          std::span<double> grad);

struct BackwardResult {
	double loss = 0.0;
	std::vector<double> grad;
};

/// Loss and parameter gradient for one sequence with teacher forcing.
/// Positions whose target is PAD are masked out. r is the grid spacing used
/// by the Wasserstein kinds.
BackwardResult backward(const Model &model, std::span<const Token> tokens, std::span<const Token> targets,
                        const LossKind &kind, double r);

/// Incremental decoder: holds the cached prefix and exposes next-token logits.
/// When the prefix would exceed the context length it is truncated to the
/// last context_length tokens and recomputed.
class DecodeSession {
public:
	DecodeSession(const Model &model, std::span<const Token> context);

	std::span<const double> logits() const;
	void push(Token token);
	std::size_t length() const noexcept { return cache_.length; }

private:
	const Model *model_;
	std::vector<Token> history_;
	ForwardCache cache_;
};

} // namespace wts
