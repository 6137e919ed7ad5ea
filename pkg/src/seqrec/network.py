"""Gated recurrent networks over an item catalog: config, forward, BPTT.

A network maps a sequence of sparse binary input vectors (one-hot item plus
optional feature blocks) to logits over the catalog. Training reduces the
mean per-step cross-entropy (optionally popularity-scaled) via
backpropagation through time; all math is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import (GATE_COUNT, GATE_NAMES, chain_backward, chain_forward,
                    gru_chain_forward, lstm_chain_forward)

CELL_KINDS = ("lstm", "gru")


class NumericFault(ArithmeticError):
    """A forward or backward pass produced non-finite values."""


@dataclass(frozen=True)
class NetworkConfig:
    catalog_size: int
    hidden_size: int
    cell_kind: str = "lstm"
    layers: int = 1
    bidirectional: bool = False
    extra_input: int = 0        # total width of enabled feature blocks
    init_seed: int = 0

    def __post_init__(self):
        if self.cell_kind not in CELL_KINDS:
            raise ValueError(f"cell_kind must be one of {CELL_KINDS}, got {self.cell_kind!r}")
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if self.catalog_size < 1:
            raise ValueError("catalog_size must be >= 1")
        if self.layers not in (1, 2):
            raise ValueError("layers must be 1 or 2")
        if self.bidirectional and self.layers != 1:
            raise ValueError("bidirectional requires layers=1")
        if self.extra_input < 0:
            raise ValueError("extra_input must be >= 0")

    @property
    def input_size(self) -> int:
        return self.catalog_size + self.extra_input

    @property
    def output_size(self) -> int:
        return self.catalog_size

    @property
    def directions(self) -> tuple[str, ...]:
        return ("fwd", "bwd") if self.bidirectional else ("fwd",)


def _glorot(rng: np.random.Generator, shape: tuple[int, int],
            fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_parameters(config: NetworkConfig) -> dict[str, np.ndarray]:
    """Seeded Glorot-uniform weights, zero biases (LSTM forget bias 1)."""
    rng = np.random.default_rng(config.init_seed)
    G = GATE_COUNT[config.cell_kind]
    H = config.hidden_size
    params: dict[str, np.ndarray] = {}
    for layer in range(config.layers):
        d_in = config.input_size if layer == 0 else H
        for d in config.directions:
            params[f"l{layer}.{d}.Wx"] = _glorot(rng, (G * H, d_in), d_in, H)
            params[f"l{layer}.{d}.Uh"] = _glorot(rng, (G * H, H), H, H)
            b = np.zeros(G * H)
            if config.cell_kind == "lstm":
                b[H:2 * H] = 1.0  # forget-gate bias stabilizer
            params[f"l{layer}.{d}.b"] = b
    for d in config.directions:
        params[f"out.{d}.W"] = _glorot(rng, (config.catalog_size, H), H, config.catalog_size)
    params["out.b"] = np.zeros(config.catalog_size)
    return params


def parameter_blocks(config: NetworkConfig) -> dict[str, tuple[str, slice]]:
    """Per-gate named views into the packed parameter arrays.

    Maps block name (e.g. ``l0.fwd.W_i``) to (packed key, row slice). Output
    blocks map to the full array.
    """
    H = config.hidden_size
    blocks: dict[str, tuple[str, slice]] = {}
    for layer in range(config.layers):
        for d in config.directions:
            for gi, gate in enumerate(GATE_NAMES[config.cell_kind]):
                rows = slice(gi * H, (gi + 1) * H)
                blocks[f"l{layer}.{d}.W_{gate}"] = (f"l{layer}.{d}.Wx", rows)
                blocks[f"l{layer}.{d}.U_{gate}"] = (f"l{layer}.{d}.Uh", rows)
                blocks[f"l{layer}.{d}.b_{gate}"] = (f"l{layer}.{d}.b", rows)
    for d in config.directions:
        blocks[f"out.{d}.W"] = (f"out.{d}.W", slice(None))
    blocks["out.b"] = ("out.b", slice(None))
    return blocks


# -- losses -------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    ex = np.exp(shifted)
    return ex / ex.sum()


def xent_loss(logits: np.ndarray, correct: int) -> float:
    """-log softmax(logits)[correct], computed in fused stable form."""
    if not 0 <= correct < len(logits):
        raise ValueError(f"correct item {correct} outside catalog of {len(logits)}")
    m = logits.max()
    return float(m + np.log(np.exp(logits - m).sum()) - logits[correct])


def diversity_loss(logits: np.ndarray, correct: int, p_correct: int,
                   delta: float) -> float:
    """Cross-entropy down-weighted for popular correct items: L / e^(delta*p)."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if not 1 <= p_correct <= 10:
        raise ValueError(f"p_correct must be in 1..10, got {p_correct}")
    return xent_loss(logits, correct) / np.exp(delta * p_correct)


# -- the network --------------------------------------------------------------

@dataclass
class StepState:
    """Per-layer recurrent state for incremental (causal) stepping."""

    h: list[np.ndarray]
    c: list[np.ndarray | None]
    t: int = 0


class Network:
    """A configured gated RNN with its parameter dictionary."""

    def __init__(self, config: NetworkConfig, params: dict[str, np.ndarray]):
        self.config = config
        self.params = params

    @classmethod
    def create(cls, config: NetworkConfig) -> "Network":
        return cls(config, init_parameters(config))

    def _layer(self, layer: int, d: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        p = self.params
        return p[f"l{layer}.{d}.Wx"], p[f"l{layer}.{d}.Uh"], p[f"l{layer}.{d}.b"]

    # -- incremental stepping (causal configs) --

    def initial_state(self) -> StepState:
        cfg = self.config
        lstm = cfg.cell_kind == "lstm"
        return StepState(
            h=[np.zeros(cfg.hidden_size) for _ in range(cfg.layers)],
            c=[np.zeros(cfg.hidden_size) if lstm else None for _ in range(cfg.layers)],
        )

    def forward_step(self, active: np.ndarray, state: StepState) -> tuple[np.ndarray, StepState]:
        """One step through the layer stack; returns catalog logits and new state.

        Bidirectional networks cannot be stepped causally (their backward
        direction consumes the whole prefix); use predict_topk instead.
        """
        cfg = self.config
        if cfg.bidirectional:
            raise ValueError("forward_step is undefined for bidirectional networks")
        active = np.asarray(active, dtype=np.int64)
        if active.size and (active.min() < 0 or active.max() >= cfg.input_size):
            raise ValueError(f"active indices outside input size {cfg.input_size}")
        new = StepState(h=list(state.h), c=list(state.c), t=state.t + 1)
        xs: object = [active]
        for layer in range(cfg.layers):
            Wx, Uh, b = self._layer(layer, "fwd")
            if cfg.cell_kind == "lstm":
                cache = lstm_chain_forward(Wx, Uh, b, xs, h0=state.h[layer], c0=state.c[layer])
                new.c[layer] = cache.c[0]
            else:
                cache = gru_chain_forward(Wx, Uh, b, xs, h0=state.h[layer])
            new.h[layer] = cache.h[0]
            xs = cache.h
        logits = self.params["out.fwd.W"] @ new.h[-1] + self.params["out.b"]
        if not np.isfinite(logits).all() or not np.isfinite(new.h[-1]).all():
            raise NumericFault(f"non-finite activation at step {state.t}")
        return logits, new

    # -- whole-sequence runs --

    def _run_causal(self, inputs: list[np.ndarray]):
        """Forward chains for all layers; returns the list of caches."""
        caches = []
        xs: object = inputs
        for layer in range(self.config.layers):
            Wx, Uh, b = self._layer(layer, "fwd")
            cache = chain_forward(self.config.cell_kind, Wx, Uh, b, xs)
            caches.append(cache)
            xs = cache.h
        return caches

    def final_logits(self, inputs: list[np.ndarray]) -> np.ndarray:
        """Catalog logits after consuming the whole input sequence."""
        if not inputs:
            raise ValueError("input sequence is empty")
        cfg = self.config
        caches = self._run_causal(inputs)
        logits = self.params["out.fwd.W"] @ caches[-1].h[-1] + self.params["out.b"]
        if cfg.bidirectional:
            Wx, Uh, b = self._layer(0, "bwd")
            rev = chain_forward(cfg.cell_kind, Wx, Uh, b, inputs[::-1])
            logits = logits + self.params["out.bwd.W"] @ rev.h[-1]
        self._check_finite_rows(caches[-1].h)
        return logits

    def predict_topk(self, inputs: list[np.ndarray], k: int,
                     exclude: set[int] | frozenset[int] = frozenset()) -> list[int]:
        """Top-k catalog items by final-step logit, never excluded ones.

        Ties break by ascending item id.
        """
        logits = self.final_logits(inputs).copy()
        if exclude:
            logits[sorted(exclude)] = -np.inf
        order = np.lexsort((np.arange(len(logits)), -logits))
        out = []
        for item in order:
            if len(out) == k:
                break
            if np.isneginf(logits[item]):
                break
            out.append(int(item))
        return out

    # -- training --

    def sequence_gradients(self, inputs: list[np.ndarray], targets: np.ndarray,
                           p_bins: np.ndarray | None = None, delta: float = 0.0,
                           ) -> tuple[dict[str, np.ndarray], float]:
        """Gradients of the mean per-step loss over the unrolled sequence.

        ``targets[t]`` is the item whose softmax probability step t must
        raise; with ``delta > 0`` each step's loss is divided by
        ``exp(delta * p_bins[t])``.
        """
        if len(inputs) < 1:
            raise ValueError("sequence must have at least one step")
        if len(targets) != len(inputs):
            raise ValueError("inputs and targets length mismatch")
        if delta < 0:
            raise ValueError("delta must be >= 0")
        T = len(inputs)
        scale = np.full(T, 1.0 / T)
        if delta > 0.0:
            if p_bins is None:
                raise ValueError("p_bins required when delta > 0")
            scale *= np.exp(-delta * np.asarray(p_bins, dtype=np.float64))
        if self.config.bidirectional:
            return self._gradients_bidirectional(inputs, targets, scale)
        return self._gradients_causal(inputs, targets, scale)

    def _output_backward(self, H_top: np.ndarray, targets: np.ndarray,
                         scale: np.ndarray, extra_H: np.ndarray | None = None,
                         ) -> tuple[float, np.ndarray, dict[str, np.ndarray]]:
        """Loss, dlogits and output-layer gradients for stacked hidden states."""
        T = len(targets)
        Wf = self.params["out.fwd.W"]
        logits = H_top @ Wf.T
        if extra_H is not None:
            logits += extra_H @ self.params["out.bwd.W"].T
        logits += self.params["out.b"]
        m = logits.max(axis=1)
        lse = m + np.log(np.exp(logits - m[:, None]).sum(axis=1))
        loss_steps = lse - logits[np.arange(T), targets]
        if not np.isfinite(loss_steps).all():
            bad = int(np.nonzero(~np.isfinite(loss_steps))[0][0])
            raise NumericFault(f"non-finite loss at step {bad}")
        mean_loss = float(loss_steps @ scale)

        dlogits = np.exp(logits - lse[:, None])
        dlogits[np.arange(T), targets] -= 1.0
        dlogits *= scale[:, None]
        grads = {
            "out.fwd.W": dlogits.T @ H_top,
            "out.b": dlogits.sum(axis=0),
        }
        if extra_H is not None:
            grads["out.bwd.W"] = dlogits.T @ extra_H
        return mean_loss, dlogits, grads

    def _check_finite_rows(self, h: np.ndarray) -> None:
        if not np.isfinite(h).all():
            bad = int(np.nonzero(~np.isfinite(h).all(axis=1))[0][0])
            raise NumericFault(f"non-finite hidden state at step {bad}")

    def _gradients_causal(self, inputs, targets, scale):
        cfg = self.config
        caches = self._run_causal(inputs)
        self._check_finite_rows(caches[-1].h)
        mean_loss, dlogits, grads = self._output_backward(caches[-1].h, targets, scale)
        dH = dlogits @ self.params["out.fwd.W"]
        for layer in range(cfg.layers - 1, -1, -1):
            Wx, Uh, _ = self._layer(layer, "fwd")
            dWx, dUh, db, dX = chain_backward(cfg.cell_kind, Wx, Uh, caches[layer], dH)
            grads[f"l{layer}.fwd.Wx"] = dWx
            grads[f"l{layer}.fwd.Uh"] = dUh
            grads[f"l{layer}.fwd.b"] = db
            dH = dX
        self._check_gradients_finite(grads)
        return grads, mean_loss

    def _gradients_bidirectional(self, inputs, targets, scale):
        cfg = self.config
        T = len(inputs)
        Wxf, Uhf, bf = self._layer(0, "fwd")
        Wxb, Uhb, bb = self._layer(0, "bwd")
        fwd = chain_forward(cfg.cell_kind, Wxf, Uhf, bf, inputs)
        self._check_finite_rows(fwd.h)
        # Backward direction sees only the observed prefix, reversed, so each
        # step gets its own chain over inputs[t..0].
        prefix_caches = [
            chain_forward(cfg.cell_kind, Wxb, Uhb, bb, inputs[t::-1]) for t in range(T)
        ]
        Hb = np.vstack([pc.h[-1] for pc in prefix_caches])
        self._check_finite_rows(Hb)

        mean_loss, dlogits, grads = self._output_backward(fwd.h, targets, scale, extra_H=Hb)

        dHf = dlogits @ self.params["out.fwd.W"]
        dWx, dUh, db, _ = chain_backward(cfg.cell_kind, Wxf, Uhf, fwd, dHf)
        grads["l0.fwd.Wx"] = dWx
        grads["l0.fwd.Uh"] = dUh
        grads["l0.fwd.b"] = db

        dHb_final = dlogits @ self.params["out.bwd.W"]
        gWx = np.zeros_like(Wxb)
        gUh = np.zeros_like(Uhb)
        gb = np.zeros_like(bb)
        for t in range(T):
            dH_prefix = np.zeros((t + 1, cfg.hidden_size))
            dH_prefix[-1] = dHb_final[t]
            dWx, dUh, db, _ = chain_backward(cfg.cell_kind, Wxb, Uhb, prefix_caches[t], dH_prefix)
            gWx += dWx
            gUh += dUh
            gb += db
        grads["l0.bwd.Wx"] = gWx
        grads["l0.bwd.Uh"] = gUh
        grads["l0.bwd.b"] = gb
        self._check_gradients_finite(grads)
        return grads, mean_loss

    def _check_gradients_finite(self, grads: dict[str, np.ndarray]) -> None:
        for key, g in grads.items():
            if not np.isfinite(g).all():
                raise NumericFault(f"non-finite gradient in {key}")

    def clone_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}
