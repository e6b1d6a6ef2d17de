"""Desk-scale multimodal fusion math: projectors, sequence assembly,
action head, and the L1 training loss with its analytic gradient.

Everything here is plain float64 numpy so the numbers are exactly
checkable: a linear visual projector, a three-layer audio MLP, a
proprioceptive state encoder followed by a two-layer projector, token
concatenation with learnable empty-action slots, a deterministic stand-in
for the sequence backbone, and a shared four-layer MLP action head whose
tanh output lands every action in [-1, 1].

The assembled sequence is ordered [language; visual; audio; proprio;
empty-action slots] and always has N_l + N_v + N_a + 1 + K*D rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimMismatchError, ShapeMismatchError


class Modality(enum.Enum):
    VISUAL = "visual"
    AUDIO = "audio"
    PROPRIO = "proprio"
    LANGUAGE = "language"
    FUSED = "fused"


@dataclass(frozen=True)
class FeatureBlock:
    """A (rows, dim) float64 token block tagged with its modality."""

    data: np.ndarray
    modality: Modality

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ShapeMismatchError(f"feature data must be 2-D, got shape {data.shape}")
        if data.shape[1] <= 0:
            raise ShapeMismatchError("feature width must be > 0")
        if not np.all(np.isfinite(data)):
            raise ValueError("feature data must be finite")
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ModelDims:
    """Token counts and feature widths for one fusion configuration.

    Defaults give the desk-scale test setup: two 256-patch camera views
    (N_v = 512), an 8-step, 7-dof action block, and a 64-wide backbone.
    """

    d_vis: int = 48
    d_aud: int = 32
    d_prop: int = 16
    d_llm: int = 64
    n_lang: int = 10
    n_visual: int = 512
    n_audio: int = 4
    horizon: int = 8  # future timesteps predicted at once (K)
    action_dim: int = 7  # per-step command width (D)

    def __post_init__(self):
        for name in ("d_vis", "d_aud", "d_prop", "d_llm", "n_lang", "n_visual",
                     "n_audio", "horizon", "action_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def action_slots(self) -> int:
        return self.horizon * self.action_dim

    @property
    def sequence_rows(self) -> int:
        """Total assembled sequence length: N_l + N_v + N_a + 1 + K*D."""
        return self.n_lang + self.n_visual + self.n_audio + 1 + self.action_slots


@dataclass(frozen=True)
class ActionBlock:
    """K x D continuous actions, every entry in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeMismatchError(f"action block must be 2-D, got shape {values.shape}")
        if np.any(np.abs(values) > 1.0) or not np.all(np.isfinite(values)):
            raise ValueError("action values must be finite and within [-1, 1]")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Linear:
    """Affine map x @ weight + bias."""

    weight: np.ndarray
    bias: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "Linear":
        return cls(weight=np.eye(dim), bias=np.zeros(dim))

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight + self.bias


@dataclass(frozen=True)
class MLP:
    """Dense stack with tanh on every hidden layer, linear output."""

    layers: tuple[Linear, ...]

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def apply(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers[:-1]:
            x = np.tanh(layer.apply(x))
        return self.layers[-1].apply(x)


@dataclass(frozen=True)
class ProprioParams:
    """State encoder (one tanh layer to d_prop) plus two-layer projector."""

    state: Linear
    projector: MLP


@dataclass(frozen=True)
class FusionParams:
    visual: Linear  # d_vis -> d_llm
    audio: MLP  # d_aud -> d_llm, three layers
    proprio: ProprioParams  # state -> d_prop -> d_llm
    empty_action: np.ndarray  # (K*D, d_llm) learnable slots
    action_head: MLP  # d_llm -> 1, four layers


def init_params(
    dims: ModelDims, seed: int = 0, state_dim: int | None = None
) -> FusionParams:
    """Seeded uniform [-0.1, 0.1] initialisation of every parameter."""
    rng = np.random.default_rng(seed)
    state_dim = dims.d_prop if state_dim is None else state_dim

    def linear(n_in, n_out):
        return Linear(
            weight=rng.uniform(-0.1, 0.1, size=(n_in, n_out)),
            bias=rng.uniform(-0.1, 0.1, size=n_out),
        )

    return FusionParams(
        visual=linear(dims.d_vis, dims.d_llm),
        audio=MLP(layers=(
            linear(dims.d_aud, dims.d_llm),
            linear(dims.d_llm, dims.d_llm),
            linear(dims.d_llm, dims.d_llm),
        )),
        proprio=ProprioParams(
            state=linear(state_dim, dims.d_prop),
            projector=MLP(layers=(
                linear(dims.d_prop, dims.d_llm),
                linear(dims.d_llm, dims.d_llm),
            )),
        ),
        empty_action=rng.uniform(-0.1, 0.1, size=(dims.action_slots, dims.d_llm)),
        action_head=MLP(layers=(
            linear(dims.d_llm, dims.d_llm),
            linear(dims.d_llm, dims.d_llm),
            linear(dims.d_llm, dims.d_llm),
            linear(dims.d_llm, 1),
        )),
    )


def _check_width(block: FeatureBlock, expected: int) -> None:
    if block.dim != expected:
        raise DimMismatchError(f"feature width {block.dim} does not match {expected}")


def concat_views(third: FeatureBlock, wrist: FeatureBlock) -> FeatureBlock:
    """Row-wise concatenation of per-view visual patches, third-person first."""
    for block in (third, wrist):
        if block.modality is not Modality.VISUAL:
            raise DimMismatchError(f"expected visual blocks, got {block.modality}")
    if third.dim != wrist.dim:
        raise DimMismatchError(f"view widths differ: {third.dim} vs {wrist.dim}")
    return FeatureBlock(
        data=np.concatenate([third.data, wrist.data], axis=0), modality=Modality.VISUAL
    )


def project_visual(block: FeatureBlock, params: Linear) -> FeatureBlock:
    """Single linear map onto the shared width; row count preserved."""
    _check_width(block, params.in_dim)
    return FeatureBlock(data=params.apply(block.data), modality=block.modality)


def project_audio(block: FeatureBlock, params: MLP) -> FeatureBlock:
    """Three-layer MLP (tanh hiddens) onto the shared width."""
    _check_width(block, params.in_dim)
    return FeatureBlock(data=params.apply(block.data), modality=block.modality)


def project_proprio(state: np.ndarray, params: ProprioParams) -> FeatureBlock:
    """Encode a raw state vector to a single shared-width token.

    The state passes through the tanh encoder to the proprio width, then
    the two-layer projector; output is exactly one row.
    """
    state = np.asarray(state, dtype=np.float64)
    if state.ndim != 1:
        raise DimMismatchError(f"state must be a 1-D vector, got shape {state.shape}")
    if state.shape[0] != params.state.in_dim:
        raise DimMismatchError(
            f"state width {state.shape[0]} does not match encoder input "
            f"{params.state.in_dim}"
        )
    embedded = np.tanh(params.state.apply(state[np.newaxis, :]))
    return FeatureBlock(data=params.projector.apply(embedded), modality=Modality.PROPRIO)


def concat_modalities(
    visual: FeatureBlock, audio: FeatureBlock, proprio: FeatureBlock
) -> FeatureBlock:
    """Stack projected modality tokens as [visual; audio; proprio]."""
    widths = {visual.dim, audio.dim, proprio.dim}
    if len(widths) != 1:
        raise DimMismatchError(f"projected widths differ: {sorted(widths)}")
    return FeatureBlock(
        data=np.concatenate([visual.data, audio.data, proprio.data], axis=0),
        modality=Modality.FUSED,
    )


def assemble_sequence(
    lang: FeatureBlock,
    modal: FeatureBlock,
    dims: ModelDims,
    empty_action: np.ndarray,
) -> FeatureBlock:
    """Full input sequence: [language; modal tokens; empty action slots].

    Row count is always ``dims.sequence_rows``.
    """
    empty_action = np.asarray(empty_action, dtype=np.float64)
    if lang.dim != dims.d_llm or modal.dim != dims.d_llm:
        raise DimMismatchError(
            f"token widths ({lang.dim}, {modal.dim}) must equal d_llm {dims.d_llm}"
        )
    if empty_action.shape != (dims.action_slots, dims.d_llm):
        raise DimMismatchError(
            f"empty action slots must be {(dims.action_slots, dims.d_llm)}, "
            f"got {empty_action.shape}"
        )
    if lang.rows != dims.n_lang:
        raise DimMismatchError(f"expected {dims.n_lang} language rows, got {lang.rows}")
    expected_modal = dims.n_visual + dims.n_audio + 1
    if modal.rows != expected_modal:
        raise DimMismatchError(f"expected {expected_modal} modal rows, got {modal.rows}")
    return FeatureBlock(
        data=np.concatenate([lang.data, modal.data, empty_action], axis=0),
        modality=Modality.FUSED,
    )


def backbone_stub(block: FeatureBlock, seed: int = 0, identity: bool = False) -> FeatureBlock:
    """Deterministic stand-in for the sequence backbone.

    Applies one seeded position-independent linear map per row (or the
    identity when ``identity`` is set); shape is preserved and equal seeds
    give bit-identical outputs.
    """
    if identity:
        return FeatureBlock(data=block.data.copy(), modality=block.modality)
    rng = np.random.default_rng(seed)
    mixer = rng.uniform(-0.1, 0.1, size=(block.dim, block.dim))
    return FeatureBlock(data=block.data @ mixer, modality=block.modality)


def extract_action_hidden(decoded: FeatureBlock, dims: ModelDims) -> FeatureBlock:
    """Last K*D rows of the decoded sequence, order preserved."""
    slots = dims.action_slots
    if decoded.rows < slots:
        raise ShapeMismatchError(
            f"decoded sequence has {decoded.rows} rows, need at least {slots}"
        )
    return FeatureBlock(data=decoded.data[-slots:].copy(), modality=decoded.modality)


def action_head(hidden: FeatureBlock, params: MLP, dims: ModelDims) -> ActionBlock:
    """Map each hidden row to one scalar action and reshape to K x D.

    The shared four-layer MLP runs per row; a final tanh squashes into
    [-1, 1]. Row k*D + i becomes entry [k][i].
    """
    if hidden.rows != dims.action_slots:
        raise ShapeMismatchError(
            f"need exactly {dims.action_slots} hidden rows, got {hidden.rows}"
        )
    if hidden.dim != params.in_dim:
        raise ShapeMismatchError(
            f"hidden width {hidden.dim} does not match head input {params.in_dim}"
        )
    scalars = np.tanh(params.apply(hidden.data))[:, 0]
    return ActionBlock(values=scalars.reshape(dims.horizon, dims.action_dim))


class L1Loss(NamedTuple):
    loss: float
    grad: np.ndarray


def l1_loss(pred: ActionBlock, truth: ActionBlock) -> L1Loss:
    """Mean absolute error and its subgradient w.r.t. the prediction.

    grad[k, i] = sign(pred - truth) / (K*D), with sign(0) taken as 0.
    """
    if pred.values.shape != truth.values.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {pred.values.shape} vs {truth.values.shape}"
        )
    diff = pred.values - truth.values
    count = diff.size
    loss = float(np.sum(np.abs(diff)) / count)
    grad = np.sign(diff) / count
    return L1Loss(loss, grad)
