"""Network building blocks on top of the autodiff tape."""

import math

import numpy as np

from magpilot.policy import autodiff as ad

INIT_STD = 0.02


class ParamStore:
    """Ordered name -> parameter tensor registry with seeded initialization."""

    def __init__(self, seed: int):
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.params: dict[str, ad.Tensor] = {}

    def normal(self, name, shape, std=INIT_STD):
        return self._register(name, self.rng.normal(0.0, std, size=shape))

    def zeros(self, name, shape):
        return self._register(name, np.zeros(shape))

    def ones(self, name, shape):
        return self._register(name, np.ones(shape))

    def _register(self, name, data):
        if name in self.params:
            raise ValueError(f"duplicate parameter {name}")
        t = ad.param(data)
        self.params[name] = t
        return t

    def items(self):
        return self.params.items()

    def zero_grad(self):
        for t in self.params.values():
            t.grad = None

    def num_params(self) -> int:
        return sum(t.data.size for t in self.params.values())


class Linear:
    def __init__(self, store: ParamStore, name: str, d_in: int, d_out: int,
                 zero_init: bool = False):
        if zero_init:
            self.w = store.zeros(f"{name}.w", (d_in, d_out))
            self.b = store.zeros(f"{name}.b", (d_out,))
        else:
            self.w = store.normal(f"{name}.w", (d_in, d_out))
            self.b = store.zeros(f"{name}.b", (d_out,))

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return ad.add(ad.matmul(x, self.w), self.b)


class LayerNorm:
    def __init__(self, store: ParamStore, name: str, dim: int):
        self.g = store.ones(f"{name}.g", (dim,))
        self.b = store.zeros(f"{name}.b", (dim,))

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return ad.layernorm(x, self.g, self.b)


class MultiHeadAttention:
    """Scaled dot-product attention, 4 heads by default, batch-first."""

    def __init__(self, store: ParamStore, name: str, dim: int, n_heads: int):
        if dim % n_heads:
            raise ValueError("hidden width must divide the head count")
        self.dim = dim
        self.n_heads = n_heads
        self.d_head = dim // n_heads
        self.wq = Linear(store, f"{name}.q", dim, dim)
        self.wk = Linear(store, f"{name}.k", dim, dim)
        self.wv = Linear(store, f"{name}.v", dim, dim)
        self.wo = Linear(store, f"{name}.o", dim, dim)

    def _split(self, x: ad.Tensor, batch: int, t: int) -> ad.Tensor:
        x = ad.reshape(x, (batch, t, self.n_heads, self.d_head))
        return ad.transpose(x, (0, 2, 1, 3))  # (B, h, T, dh)

    def __call__(self, q_in: ad.Tensor, kv_in: ad.Tensor) -> ad.Tensor:
        batch, tq, _ = q_in.shape
        tk = kv_in.shape[1]
        q = self._split(self.wq(q_in), batch, tq)
        k = self._split(self.wk(kv_in), batch, tk)
        v = self._split(self.wv(kv_in), batch, tk)
        scores = ad.scale(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))),
                          1.0 / math.sqrt(self.d_head))
        attn = ad.softmax(scores, axis=-1)
        ctx = ad.matmul(attn, v)  # (B, h, Tq, dh)
        ctx = ad.transpose(ctx, (0, 2, 1, 3))
        ctx = ad.reshape(ctx, (batch, tq, self.dim))
        return self.wo(ctx)


class FeedForward:
    def __init__(self, store: ParamStore, name: str, dim: int, hidden: int):
        self.fc1 = Linear(store, f"{name}.fc1", dim, hidden)
        self.fc2 = Linear(store, f"{name}.fc2", hidden, dim)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return self.fc2(ad.gelu(self.fc1(x)))


class EncoderLayer:
    """Pre-norm self-attention block."""

    def __init__(self, store, name, dim, n_heads, ffn_hidden):
        self.ln1 = LayerNorm(store, f"{name}.ln1", dim)
        self.attn = MultiHeadAttention(store, f"{name}.attn", dim, n_heads)
        self.ln2 = LayerNorm(store, f"{name}.ln2", dim)
        self.ffn = FeedForward(store, f"{name}.ffn", dim, ffn_hidden)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        h = self.ln1(x)
        x = ad.add(x, self.attn(h, h))
        return ad.add(x, self.ffn(self.ln2(x)))


class DecoderLayer:
    """Pre-norm block: query self-attention, cross-attention, feedforward."""

    def __init__(self, store, name, dim, n_heads, ffn_hidden):
        self.ln1 = LayerNorm(store, f"{name}.ln1", dim)
        self.self_attn = MultiHeadAttention(store, f"{name}.self", dim, n_heads)
        self.ln2 = LayerNorm(store, f"{name}.ln2", dim)
        self.cross_attn = MultiHeadAttention(store, f"{name}.cross", dim, n_heads)
        self.ln3 = LayerNorm(store, f"{name}.ln3", dim)
        self.ffn = FeedForward(store, f"{name}.ffn", dim, ffn_hidden)

    def __call__(self, queries: ad.Tensor, memory: ad.Tensor) -> ad.Tensor:
        h = self.ln1(queries)
        queries = ad.add(queries, self.self_attn(h, h))
        queries = ad.add(queries, self.cross_attn(self.ln2(queries), memory))
        return ad.add(queries, self.ffn(self.ln3(queries)))
