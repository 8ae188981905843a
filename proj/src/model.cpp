#include "wts/model.hpp"

#include "wts/error.hpp"
#include "wts/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace wts {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;
constexpr double kGeluC = 0.7978845608028654; // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

double gelu(double x) {
	return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_grad(double x) {
	const double th = std::tanh(kGeluC * (x + kGeluA * x * x * x));
	return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

// y[o] = W[o,:] . x + b[o], W is out x in
void linear(const double *w, const double *b, const double *x, double *y, std::size_t out, std::size_t in) {
	for (std::size_t o = 0; o < out; ++o)
		y[o] = kernels::active().dot(w + o * in, x, in) + b[o];
}

// dx += W^T dy, dW += dy x^T, db += dy
void linear_backward(const double *w, const double *x, const double *dy, double *dx, double *dw, double *db,
                     std::size_t out, std::size_t in) {
	const auto &k = kernels::active();
	for (std::size_t o = 0; o < out; ++o) {
		const double g = dy[o];
		if (g == 0.0)
			continue;
		k.axpy(g, w + o * in, dx, in);
		k.axpy(g, x, dw + o * in, in);
		db[o] += g;
	}
}

void layer_norm(const double *x, const double *gamma, const double *beta, double *y, double &mean, double &rstd,
                std::size_t n) {
	double mu = 0.0;
	for (std::size_t i = 0; i < n; ++i)
		mu += x[i];
	mu /= static_cast<double>(n);
	double var = 0.0;
	for (std::size_t i = 0; i < n; ++i)
		var += (x[i] - mu) * (x[i] - mu);
	var /= static_cast<double>(n);
	const double rs = 1.0 / std::sqrt(var + kLayerNormEps);
	for (std::size_t i = 0; i < n; ++i)
		y[i] = (x[i] - mu) * rs * gamma[i] + beta[i];
	mean = mu;
	rstd = rs;
}

// dx += dLN/dx^T dy; accumulates dgamma, dbeta
void layer_norm_backward(const double *x, double mean, double rstd, const double *gamma, const double *dy,
                         double *dx, double *dgamma, double *dbeta, std::size_t n) {
	double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		const double xhat = (x[i] - mean) * rstd;
		const double dxhat = dy[i] * gamma[i];
		mean_dxhat += dxhat;
		mean_dxhat_xhat += dxhat * xhat;
		dgamma[i] += dy[i] * xhat;
		dbeta[i] += dy[i];
	}
	mean_dxhat /= static_cast<double>(n);
	mean_dxhat_xhat /= static_cast<double>(n);
	for (std::size_t i = 0; i < n; ++i) {
		const double xhat = (x[i] - mean) * rstd;
		dx[i] += rstd * (dy[i] * gamma[i] - mean_dxhat - xhat * mean_dxhat_xhat);
	}
}

void check_token(const ModelConfig &c, Token t) {
	if (t < 0 || static_cast<std::size_t>(t) >= c.vocab_size)
		throw Error(ErrorCategory::Data, "token " + std::to_string(t) + " outside the model vocabulary");
}

} // namespace

void ModelConfig::validate() const {
	if (vocab_size < 3)
		throw Error(ErrorCategory::Config, "vocab_size must leave room for PAD, EOS and a value token");
	if (context_length < 2)
		throw Error(ErrorCategory::Config, "context_length must be >= 2");
	if (embed_dim == 0 || num_layers == 0 || num_heads == 0)
		throw Error(ErrorCategory::Config, "embed_dim, num_layers and num_heads must be positive");
	if (embed_dim % num_heads != 0)
		throw Error(ErrorCategory::Config, "embed_dim must be divisible by num_heads");
}

std::size_t ModelConfig::parameter_count() const noexcept {
	const std::size_t V = vocab_size, m = context_length, D = embed_dim, L = num_layers;
	return V * D + m * D + L * (12 * D * D + 13 * D) + 2 * D + V * D + V;
}

ParamLayout ParamLayout::build(const ModelConfig &c) {
	ParamLayout p;
	const std::size_t D = c.embed_dim, F = c.hidden_dim();
	auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
		const std::size_t off = p.total;
		p.tensors.push_back({std::move(name), off, rows, cols});
		p.total += rows * cols;
		return off;
	};
	p.tok_emb = add("tok_emb", c.vocab_size, D);
	p.pos_emb = add("pos_emb", c.context_length, D);
	for (std::size_t l = 0; l < c.num_layers; ++l) {
		const std::string pre = "layer" + std::to_string(l) + ".";
		LayerSlots s{};
		s.ln1_g = add(pre + "ln1.gamma", 1, D);
		s.ln1_b = add(pre + "ln1.beta", 1, D);
		s.wq = add(pre + "attn.wq", D, D);
		s.bq = add(pre + "attn.bq", 1, D);
		s.wk = add(pre + "attn.wk", D, D);
		s.bk = add(pre + "attn.bk", 1, D);
		s.wv = add(pre + "attn.wv", D, D);
		s.bv = add(pre + "attn.bv", 1, D);
		s.wo = add(pre + "attn.wo", D, D);
		s.bo = add(pre + "attn.bo", 1, D);
		s.ln2_g = add(pre + "ln2.gamma", 1, D);
		s.ln2_b = add(pre + "ln2.beta", 1, D);
		s.w1 = add(pre + "mlp.w1", F, D);
		s.b1 = add(pre + "mlp.b1", 1, F);
		s.w2 = add(pre + "mlp.w2", D, F);
		s.b2 = add(pre + "mlp.b2", 1, D);
		p.layers.push_back(s);
	}
	p.lnf_g = add("lnf.gamma", 1, D);
	p.lnf_b = add("lnf.beta", 1, D);
	p.head_w = add("head.w", c.vocab_size, D);
	p.head_b = add("head.b", 1, c.vocab_size);
	return p;
}

Model::Model(ModelConfig config) : config_(config) {
	config_.validate();
	layout_ = ParamLayout::build(config_);
	params_.assign(layout_.total, 0.0);
}

Model init_model(const ModelConfig &config) {
	Model model(config);
	std::mt19937_64 rng(config.seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	auto params = model.parameters();
	const double resid_std = kInitStd / std::sqrt(2.0 * static_cast<double>(config.num_layers));
	for (const TensorSlot &t : model.layout().tensors) {
		const auto &n = t.name;
		double std = 0.0, fill = 0.0;
		if (n.ends_with(".gamma"))
			fill = 1.0;
		else if (n.ends_with("attn.wo") || n.ends_with("mlp.w2"))
			std = resid_std;
		else if (t.rows > 1)
			std = kInitStd;
		for (std::size_t i = 0; i < t.size(); ++i)
			params[t.offset + i] = std > 0.0 ? std * normal(rng) : fill;
	}
	return model;
}

void ForwardCache::reset(const ModelConfig &c, std::size_t cap) {
	const std::size_t D = c.embed_dim, F = c.hidden_dim(), H = c.num_heads;
	length = 0;
	capacity = cap;
	tokens.assign(cap, 0);
	layers.resize(c.num_layers);
	for (Layer &l : layers) {
		for (auto *v : {&l.xin, &l.ln1, &l.q, &l.k, &l.v, &l.ctx, &l.xmid, &l.ln2})
			v->assign(cap * D, 0.0);
		for (auto *v : {&l.mean1, &l.rstd1, &l.mean2, &l.rstd2})
			v->assign(cap, 0.0);
		l.att.assign(H * cap * cap, 0.0);
		l.hpre.assign(cap * F, 0.0);
		l.hact.assign(cap * F, 0.0);
	}
	xfin.assign(cap * D, 0.0);
	lnf.assign(cap * D, 0.0);
	meanf.assign(cap, 0.0);
	rstdf.assign(cap, 0.0);
	logits = Matrix(cap, c.vocab_size);
}

void forward_step(const Model &model, ForwardCache &cache, Token token) {
	const ModelConfig &c = model.config();
	check_token(c, token);
	if (cache.length >= cache.capacity || cache.length >= c.context_length)
		throw Error(ErrorCategory::Data, "sequence longer than the model context");
	const std::size_t t = cache.length;
	const std::size_t D = c.embed_dim, F = c.hidden_dim(), H = c.num_heads, hd = D / H, cap = cache.capacity;
	const double *P = model.parameters().data();
	const ParamLayout &L = model.layout();
	const auto &kt = kernels::active();
	const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));

	cache.tokens[t] = token;
	double *x = cache.layers.empty() ? cache.xfin.data() + t * D : cache.layers[0].xin.data() + t * D;
	const double *te = P + L.tok_emb + static_cast<std::size_t>(token) * D;
	const double *pe = P + L.pos_emb + t * D;
	for (std::size_t i = 0; i < D; ++i)
		x[i] = te[i] + pe[i];

	for (std::size_t li = 0; li < c.num_layers; ++li) {
		const LayerSlots &s = L.layers[li];
		ForwardCache::Layer &a = cache.layers[li];
		const double *xin = a.xin.data() + t * D;
		double *ln1 = a.ln1.data() + t * D;
		layer_norm(xin, P + s.ln1_g, P + s.ln1_b, ln1, a.mean1[t], a.rstd1[t], D);
		double *q = a.q.data() + t * D;
		linear(P + s.wq, P + s.bq, ln1, q, D, D);
		linear(P + s.wk, P + s.bk, ln1, a.k.data() + t * D, D, D);
		linear(P + s.wv, P + s.bv, ln1, a.v.data() + t * D, D, D);

		double *ctx = a.ctx.data() + t * D;
		std::fill(ctx, ctx + D, 0.0);
		for (std::size_t h = 0; h < H; ++h) {
			double *att = a.att.data() + (h * cap + t) * cap;
			for (std::size_t j = 0; j <= t; ++j)
				att[j] = kt.dot(q + h * hd, a.k.data() + j * D + h * hd, hd) * att_scale;
			const double m = kt.max(att, t + 1);
			for (std::size_t j = 0; j <= t; ++j)
				att[j] = std::exp(att[j] - m);
			kt.scale(1.0 / kt.sum(att, t + 1), att, t + 1);
			for (std::size_t j = 0; j <= t; ++j)
				kt.axpy(att[j], a.v.data() + j * D + h * hd, ctx + h * hd, hd);
		}

		double *xmid = a.xmid.data() + t * D;
		linear(P + s.wo, P + s.bo, ctx, xmid, D, D);
		for (std::size_t i = 0; i < D; ++i)
			xmid[i] += xin[i];

		double *ln2 = a.ln2.data() + t * D;
		layer_norm(xmid, P + s.ln2_g, P + s.ln2_b, ln2, a.mean2[t], a.rstd2[t], D);
		double *hpre = a.hpre.data() + t * F;
		double *hact = a.hact.data() + t * F;
		linear(P + s.w1, P + s.b1, ln2, hpre, F, D);
		for (std::size_t i = 0; i < F; ++i)
			hact[i] = gelu(hpre[i]);
		double *xout = li + 1 < c.num_layers ? cache.layers[li + 1].xin.data() + t * D : cache.xfin.data() + t * D;
		linear(P + s.w2, P + s.b2, hact, xout, D, F);
		for (std::size_t i = 0; i < D; ++i)
			xout[i] += xmid[i];
	}

	double *lnf = cache.lnf.data() + t * D;
	layer_norm(cache.xfin.data() + t * D, P + L.lnf_g, P + L.lnf_b, lnf, cache.meanf[t], cache.rstdf[t], D);
	linear(P + L.head_w, P + L.head_b, lnf, cache.logits.row(t).data(), c.vocab_size, D);
	cache.length = t + 1;
}

void forward(const Model &model, std::span<const Token> tokens, ForwardCache &cache) {
	if (tokens.empty())
		throw Error(ErrorCategory::Data, "forward: empty token sequence");
	if (tokens.size() > model.config().context_length)
		throw Error(ErrorCategory::Data, "forward: sequence longer than the model context");
	cache.reset(model.config(), tokens.size());
	for (Token t : tokens)
		forward_step(model, cache, t);
}

Matrix forward(const Model &model, std::span<const Token> tokens) {
	ForwardCache cache;
	forward(model, tokens, cache);
	return std::move(cache.logits);
}

void backward_from_logits(const Model &model, const ForwardCache &cache, std::span<const double> dlogits,
                          std::span<double> grad) {
	const ModelConfig &c = model.config();
	const std::size_t T = cache.length, D = c.embed_dim, F = c.hidden_dim(), H = c.num_heads, hd = D / H,
	                  V = c.vocab_size, cap = cache.capacity;
	if (dlogits.size() < T * V)
		throw Error(ErrorCategory::Data, "backward: logit gradient has the wrong shape");
	if (grad.size() != model.parameter_count())
		throw Error(ErrorCategory::Data, "backward: gradient buffer has the wrong size");
	const double *P = model.parameters().data();
	double *G = grad.data();
	const ParamLayout &L = model.layout();
	const auto &kt = kernels::active();
	const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));

	// dx holds dL/d(residual stream) for the layer being unwound.
	std::vector<double> dx(T * D, 0.0), dtmp(T * D, 0.0);
	for (std::size_t t = 0; t < T; ++t) {
		std::fill(dtmp.begin(), dtmp.begin() + D, 0.0);
		linear_backward(P + L.head_w, cache.lnf.data() + t * D, dlogits.data() + t * V, dtmp.data(), G + L.head_w,
		                G + L.head_b, V, D);
		layer_norm_backward(cache.xfin.data() + t * D, cache.meanf[t], cache.rstdf[t], P + L.lnf_g, dtmp.data(),
		                    dx.data() + t * D, G + L.lnf_g, G + L.lnf_b, D);
	}

	std::vector<double> dh(F), dctx(T * D), dq(T * D), dk(T * D), dv(T * D), dln(D), datt(T);
	for (std::size_t li = c.num_layers; li-- > 0;) {
		const LayerSlots &s = L.layers[li];
		const ForwardCache::Layer &a = cache.layers[li];

		// MLP block; dx becomes dL/dxmid
		for (std::size_t t = 0; t < T; ++t) {
			std::fill(dh.begin(), dh.end(), 0.0);
			linear_backward(P + s.w2, a.hact.data() + t * F, dx.data() + t * D, dh.data(), G + s.w2, G + s.b2, D, F);
			const double *hpre = a.hpre.data() + t * F;
			for (std::size_t i = 0; i < F; ++i)
				dh[i] *= gelu_grad(hpre[i]);
			std::fill(dln.begin(), dln.end(), 0.0);
			linear_backward(P + s.w1, a.ln2.data() + t * D, dh.data(), dln.data(), G + s.w1, G + s.b1, F, D);
			layer_norm_backward(a.xmid.data() + t * D, a.mean2[t], a.rstd2[t], P + s.ln2_g, dln.data(),
			                    dx.data() + t * D, G + s.ln2_g, G + s.ln2_b, D);
		}

		// attention output projection
		std::fill(dctx.begin(), dctx.end(), 0.0);
		for (std::size_t t = 0; t < T; ++t)
			linear_backward(P + s.wo, a.ctx.data() + t * D, dx.data() + t * D, dctx.data() + t * D, G + s.wo, G + s.bo,
			                D, D);

		std::fill(dq.begin(), dq.end(), 0.0);
		std::fill(dk.begin(), dk.end(), 0.0);
		std::fill(dv.begin(), dv.end(), 0.0);
		for (std::size_t h = 0; h < H; ++h) {
			for (std::size_t i = 0; i < T; ++i) {
				const double *att = a.att.data() + (h * cap + i) * cap;
				const double *dci = dctx.data() + i * D + h * hd;
				double dot_sum = 0.0;
				for (std::size_t j = 0; j <= i; ++j) {
					datt[j] = kt.dot(dci, a.v.data() + j * D + h * hd, hd);
					kt.axpy(att[j], dci, dv.data() + j * D + h * hd, hd);
					dot_sum += att[j] * datt[j];
				}
				for (std::size_t j = 0; j <= i; ++j) {
					const double ds = att[j] * (datt[j] - dot_sum) * att_scale;
					if (ds == 0.0)
						continue;
					kt.axpy(ds, a.k.data() + j * D + h * hd, dq.data() + i * D + h * hd, hd);
					kt.axpy(ds, a.q.data() + i * D + h * hd, dk.data() + j * D + h * hd, hd);
				}
			}
		}

		for (std::size_t t = 0; t < T; ++t) {
			std::fill(dln.begin(), dln.end(), 0.0);
			const double *ln1 = a.ln1.data() + t * D;
			linear_backward(P + s.wq, ln1, dq.data() + t * D, dln.data(), G + s.wq, G + s.bq, D, D);
			linear_backward(P + s.wk, ln1, dk.data() + t * D, dln.data(), G + s.wk, G + s.bk, D, D);
			linear_backward(P + s.wv, ln1, dv.data() + t * D, dln.data(), G + s.wv, G + s.bv, D, D);
			layer_norm_backward(a.xin.data() + t * D, a.mean1[t], a.rstd1[t], P + s.ln1_g, dln.data(),
			                    dx.data() + t * D, G + s.ln1_g, G + s.ln1_b, D);
		}
	}

	for (std::size_t t = 0; t < T; ++t) {
		const double *g = dx.data() + t * D;
		kt.axpy(1.0, g, G + L.tok_emb + static_cast<std::size_t>(cache.tokens[t]) * D, D);
		kt.axpy(1.0, g, G + L.pos_emb + t * D, D);
	}
}

BackwardResult backward(const Model &model, std::span<const Token> tokens, std::span<const Token> targets,
                        const LossKind &kind, double r) {
	if (tokens.size() != targets.size())
		throw Error(ErrorCategory::Data, "backward: tokens and targets differ in length");
	const ModelConfig &c = model.config();
	for (Token t : targets)
		check_token(c, t);
	ForwardCache cache;
	forward(model, tokens, cache);
	std::vector<std::uint8_t> mask(targets.size());
	for (std::size_t i = 0; i < targets.size(); ++i)
		mask[i] = targets[i] != c.pad_token();
	LossOutput lo = batch_loss(cache.logits, targets, kind, mask, r, c.value_tokens());
	BackwardResult out;
	out.loss = lo.value;
	out.grad.assign(model.parameter_count(), 0.0);
	backward_from_logits(model, cache, lo.grad, out.grad);
	return out;
}

DecodeSession::DecodeSession(const Model &model, std::span<const Token> context)
    : model_(&model), history_(context.begin(), context.end()) {
	if (history_.empty())
		throw Error(ErrorCategory::Data, "decode: empty context");
	const std::size_t m = model.config().context_length;
	if (history_.size() > m)
		history_.erase(history_.begin(), history_.end() - static_cast<std::ptrdiff_t>(m));
	cache_.reset(model.config(), m);
	for (Token t : history_)
		forward_step(*model_, cache_, t);
}

std::span<const double> DecodeSession::logits() const { return cache_.logits.row(cache_.length - 1); }

void DecodeSession::push(Token token) {
	const std::size_t m = model_->config().context_length;
	history_.push_back(token);
	if (cache_.length < m) {
		forward_step(*model_, cache_, token);
		return;
	}
	// absolute positions shift, so the whole window is recomputed
	history_.erase(history_.begin(), history_.end() - static_cast<std::ptrdiff_t>(m));
	cache_.length = 0;
	for (Token t : history_)
		forward_step(*model_, cache_, t);
}

} // namespace wts
