"""Phase-conditioned action-chunking policy.

Pipeline per step: a compact self-attention encoder turns the 4-frame
observation history and the prompt embedding into a multimodal memory; the
current arm state is projected and appended as one extra token; a
motion-aware head classifies the manipulation phase; the phase selects a
learned token that is prepended to the memory; five learnable queries
cross-attend to it and regress the 5x4 normalized action chunk in a single
forward pass.
"""

from dataclasses import dataclass, field

import numpy as np

from magpilot.data.prompts import build_prompt_bank
from magpilot.policy import autodiff as ad
from magpilot.policy.layers import (
    DecoderLayer,
    EncoderLayer,
    Linear,
    LayerNorm,
    ParamStore,
)
from magpilot.sim.observe import FEATURE_DIM
from magpilot.sim.workspace import HEIGHT, TASKS, WIDTH

CHUNK_LEN = 5
ACTION_DIM = 4
N_PHASES = 2
GRID_FLAT = 4 * 32 * 32


def _default_prompt_tasks() -> tuple[int, ...]:
    bank = build_prompt_bank()
    return tuple(TASKS.index(t) for t in bank.prompt_to_task)


@dataclass(frozen=True)
class ModelConfig:
    hidden: int = 64  # D
    encoder_layers: int = 2
    decoder_layers: int = 2
    n_queries: int = CHUNK_LEN
    chunk_len: int = CHUNK_LEN
    action_dim: int = ACTION_DIM
    n_heads: int = 4
    ffn_hidden: int = 128
    phase_hidden: int = 64
    history: int = 4
    feature_dim: int = FEATURE_DIM
    use_grid: bool = False
    lambda_phase: float = 0.1
    beta: float = 1.0
    seed: int = 0
    ws_width: float = WIDTH
    ws_height: float = HEIGHT
    prompt_tasks: tuple[int, ...] = field(default_factory=_default_prompt_tasks)

    @property
    def tokens_per_frame(self) -> int:
        return 2 if self.use_grid else 1

    @property
    def memory_len(self) -> int:
        """L: per-frame tokens plus the prompt token (state token excluded)."""
        return self.history * self.tokens_per_frame + 1

    @property
    def n_prompts(self) -> int:
        return len(self.prompt_tasks)

    def validate(self) -> None:
        if self.decoder_layers != 2 or self.n_queries != CHUNK_LEN \
                or self.chunk_len != CHUNK_LEN or self.action_dim != ACTION_DIM:
            raise ValueError("decoder_layers=2, n_queries=K=5, d_a=4 are fixed")
        if self.hidden % self.n_heads:
            raise ValueError("hidden width must be divisible by the head count")
        if self.lambda_phase < 0 or self.beta <= 0:
            raise ValueError("lambda_phase >= 0 and beta > 0 required")

    def to_dict(self) -> dict:
        return {
            "hidden": self.hidden, "encoder_layers": self.encoder_layers,
            "decoder_layers": self.decoder_layers, "n_queries": self.n_queries,
            "chunk_len": self.chunk_len, "action_dim": self.action_dim,
            "n_heads": self.n_heads, "ffn_hidden": self.ffn_hidden,
            "phase_hidden": self.phase_hidden, "history": self.history,
            "feature_dim": self.feature_dim, "use_grid": self.use_grid,
            "lambda_phase": self.lambda_phase, "beta": self.beta,
            "seed": self.seed, "ws_width": self.ws_width,
            "ws_height": self.ws_height,
            "prompt_tasks": list(self.prompt_tasks),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["prompt_tasks"] = tuple(d["prompt_tasks"])
        cfg = cls(**d)
        cfg.validate()
        return cfg


def smooth_l1(pred, target, beta: float = 1.0) -> ad.Tensor:
    """SmoothL1 between two (tensors or arrays), mean-reduced."""
    if not isinstance(pred, ad.Tensor):
        pred = ad.tensor(pred)
    if not isinstance(target, ad.Tensor):
        target = ad.tensor(target)
    return ad.smooth_l1_mean(pred, target, beta)


class Policy:
    def __init__(self, cfg: ModelConfig):
        cfg.validate()
        self.cfg = cfg
        store = ParamStore(cfg.seed)
        self.store = store
        d = cfg.hidden
        self.frame_proj = Linear(store, "frame_proj", cfg.feature_dim, d)
        if cfg.use_grid:
            self.grid_proj = Linear(store, "grid_proj", GRID_FLAT, d)
        self.prompt_emb = store.normal("prompt_emb", (cfg.n_prompts, d))
        self.task_emb = store.normal("task_emb", (len(TASKS), d))
        self.pos_emb = store.normal("pos_emb", (cfg.memory_len, d))
        self.encoder = [EncoderLayer(store, f"enc{i}", d, cfg.n_heads, cfg.ffn_hidden)
                        for i in range(cfg.encoder_layers)]
        self.enc_ln = LayerNorm(store, "enc_ln", d)
        self.state_proj = Linear(store, "state_proj", 4, d)
        self.phase_fc1 = Linear(store, "phase_fc1", d + 8, cfg.phase_hidden)
        self.phase_fc2 = Linear(store, "phase_fc2", cfg.phase_hidden, N_PHASES)
        self.phase_emb = store.normal("phase_emb", (N_PHASES, d))
        self.query_emb = store.normal("query_emb", (cfg.n_queries, d))
        self.decoder = [DecoderLayer(store, f"dec{i}", d, cfg.n_heads, cfg.ffn_hidden)
                        for i in range(cfg.decoder_layers)]
        self.dec_ln = LayerNorm(store, "dec_ln", d)
        # zero-initialized so the untrained policy emits null actions
        self.head = Linear(store, "head", d, cfg.action_dim, zero_init=True)
        self._prompt_task = np.asarray(cfg.prompt_tasks, dtype=np.int64)
        self._state_scale = np.array([cfg.ws_width, cfg.ws_height,
                                      cfg.ws_width, cfg.ws_height])

    # -- spec operations ---------------------------------------------------

    def encode(self, obs_history, prompt_ids, grid_history=None) -> ad.Tensor:
        """(B, history, F) observations + prompt ids -> (B, L, D) memory."""
        obs_history = np.asarray(obs_history, dtype=np.float64)
        batch, hist, _ = obs_history.shape
        frame_tokens = self.frame_proj(ad.tensor(obs_history))  # (B, H, D)
        if self.cfg.use_grid:
            if grid_history is None:
                raise ValueError("model configured with grids but none given")
            flat = np.asarray(grid_history, dtype=np.float64).reshape(batch, hist, GRID_FLAT)
            grid_tokens = self.grid_proj(ad.tensor(flat))
            # interleave [frame_i, grid_i] along the token axis
            stacked = ad.concat([
                ad.reshape(frame_tokens, (batch, hist, 1, self.cfg.hidden)),
                ad.reshape(grid_tokens, (batch, hist, 1, self.cfg.hidden)),
            ], axis=2)
            frame_tokens = ad.reshape(stacked, (batch, hist * 2, self.cfg.hidden))
        prompt_vec = ad.add(ad.take(self.prompt_emb, prompt_ids),
                            ad.take(self.task_emb, self._prompt_task[prompt_ids]))
        prompt_tok = ad.reshape(prompt_vec, (batch, 1, self.cfg.hidden))
        tokens = ad.concat([frame_tokens, prompt_tok], axis=1)
        tokens = ad.add(tokens, self.pos_emb)
        for layer in self.encoder:
            tokens = layer(tokens)
        return self.enc_ln(tokens)

    def inject_state(self, memory: ad.Tensor, state_norm) -> ad.Tensor:
        """Append one projected-state token: (B, L, D) -> (B, L+1, D)."""
        if not isinstance(state_norm, ad.Tensor):
            state_norm = ad.tensor(state_norm)
        batch = memory.shape[0]
        tok = ad.reshape(self.state_proj(state_norm), (batch, 1, self.cfg.hidden))
        return ad.concat([memory, tok], axis=1)

    def phase_head(self, memory: ad.Tensor, state_norm, motion_norm,
                   mask=None) -> ad.Tensor:
        """Masked mean-pool fused with state and motion cues -> 2 logits."""
        batch, length, _ = memory.shape
        if mask is None:
            mask = np.ones((batch, length))
        mask = np.asarray(mask, dtype=np.float64)
        counts = mask.sum(axis=1, keepdims=True)
        if np.any(counts == 0):
            raise ValueError("phase head needs a non-empty token mask")
        masked = ad.mul(memory, ad.tensor(mask[:, :, None]))
        pooled = ad.mul(ad.reduce_sum(masked, axis=1), ad.tensor(1.0 / counts))
        feats = ad.concat([pooled, ad.tensor(np.asarray(state_norm)),
                           ad.tensor(np.asarray(motion_norm))], axis=1)
        return self.phase_fc2(ad.gelu(self.phase_fc1(feats)))

    def phase_token(self, phase_idx) -> ad.Tensor:
        """(B,) phase indices -> (B, D) learned tokens."""
        return ad.take(self.phase_emb, np.asarray(phase_idx, dtype=np.int64))

    def decode_chunk(self, memory: ad.Tensor, z_phase: ad.Tensor) -> ad.Tensor:
        """Cross-attend 5 learned queries over [phase token; memory]."""
        batch = memory.shape[0]
        d = self.cfg.hidden
        mem = ad.concat([ad.reshape(z_phase, (batch, 1, d)), memory], axis=1)
        queries = ad.broadcast_to(
            ad.reshape(self.query_emb, (1, self.cfg.n_queries, d)),
            (batch, self.cfg.n_queries, d))
        for layer in self.decoder:
            queries = layer(queries, mem)
        out = self.head(self.dec_ln(queries))  # (B, K, d_a)
        return out

    # -- composition ---------------------------------------------------------

    def normalize_state(self, states) -> np.ndarray:
        return np.asarray(states, dtype=np.float64) / self._state_scale

    @staticmethod
    def predict_phase(logits: np.ndarray) -> np.ndarray:
        """Argmax with ties resolved toward phase 0 (approach)."""
        return (logits[:, 1] > logits[:, 0]).astype(np.int64)

    def forward(self, batch: dict, teacher_phase: bool = True):
        """Returns (chunk (B,K,4) tensor, logits (B,2) tensor, phase_pred)."""
        obs_h = batch["obs_history"]
        state_h = np.asarray(batch["state_history"], dtype=np.float64)
        state_norm = self.normalize_state(batch["state"])
        motion_norm = self.normalize_state(state_h[:, -1] - state_h[:, 0])
        memory = self.encode(obs_h, batch["prompt_id"],
                             grid_history=batch.get("grid_history"))
        full = self.inject_state(memory, state_norm)
        logits = self.phase_head(full, state_norm, motion_norm)
        phase_pred = self.predict_phase(logits.data)
        if teacher_phase:
            token_idx = np.asarray(batch["phase"], dtype=np.int64)
        else:
            token_idx = phase_pred
        chunk = self.decode_chunk(full, self.phase_token(token_idx))
        return chunk, logits, phase_pred

    def compute_loss(self, chunk_pred: ad.Tensor, chunk_gt, logits: ad.Tensor,
                     phase_gt):
        phase_gt = np.asarray(phase_gt, dtype=np.int64)
        if phase_gt.min() < 0 or phase_gt.max() >= N_PHASES:
            raise ValueError("invalid phase label")
        action_term = smooth_l1(chunk_pred, np.asarray(chunk_gt), self.cfg.beta)
        phase_term = ad.cross_entropy_mean(logits, phase_gt)
        total = ad.add(action_term, ad.scale(phase_term, self.cfg.lambda_phase))
        return total, {"loss_action": action_term.item(),
                       "loss_phase": phase_term.item(),
                       "loss": total.item()}

    # -- parameter access ----------------------------------------------------

    def parameters(self) -> dict:
        return self.store.params

    def zero_grad(self) -> None:
        self.store.zero_grad()

    def num_params(self) -> int:
        return self.store.num_params()

    def state_arrays(self) -> dict:
        return {name: t.data for name, t in self.store.items()}

    def load_arrays(self, arrays: dict) -> None:
        own = self.store.params
        if set(arrays) != set(own):
            missing = set(own) ^ set(arrays)
            raise ValueError(f"parameter name mismatch: {sorted(missing)[:5]}")
        for name, value in arrays.items():
            if own[name].data.shape != value.shape:
                raise ValueError(f"shape mismatch for {name}")
            own[name].data = np.asarray(value, dtype=np.float64).copy()
