"""Actor/critic backends.

A ModelPair bundles two batched capabilities used by the planners:

  sample_actions(s, k, rng) -> (k, action_dim) array, one batched call
  cost_to_go(s, actions)    -> (k,) nonnegative costs, one batched call

Backends: a portable MLP inference engine (tanh-squashed Gaussian actor
head, Q critic on concat(state, action)) loaded from a text weight file,
and analytic surrogates that give useful near-goal guidance while staying
blind to obstacles.

Critic sign convention: a trained Q network predicts return; costs are
negated rewards, so the adapter returns max(0, -Q). The search core always
consumes nonnegative cost units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import BodyRect, closest_point_on_body_rect, ray_exit_distance, wrap_angle

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0

_ACTIVATIONS = ("relu", "tanh", "identity")


class ModelFaultError(RuntimeError):
    """Actor or critic produced unusable output (wrong shape, non-finite)."""


class WeightFormatError(ValueError):
    """Weight file failed to parse or validate."""


@dataclass(frozen=True)
class ModelPair:
    """Action sampler + cost-to-go estimator with their declared dims."""

    sample_actions: Callable[[np.ndarray, int, np.random.Generator], np.ndarray]
    cost_to_go: Callable[[np.ndarray, np.ndarray], np.ndarray]
    state_dim: int
    action_dim: int


# ---------------------------------------------------------------------------
# MLP inference
# ---------------------------------------------------------------------------

@dataclass
class DenseLayer:
    weight: np.ndarray  # (out, in), row-major: one row per output unit
    bias: np.ndarray    # (out,)
    activation: str

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


@dataclass
class MlpWeights:
    """Trunk layers plus, for actors, mean/log-std heads and action scaling."""

    layers: list[DenseLayer]
    mean_head: DenseLayer | None = None
    log_std_head: DenseLayer | None = None
    action_scale: np.ndarray | None = None
    action_offset: np.ndarray | None = None

    @property
    def is_actor(self) -> bool:
        return self.mean_head is not None

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    def validate(self):
        if not self.layers:
            raise WeightFormatError("weight set has no layers")
        for i, layer in enumerate(self.layers):
            _check_layer(layer, f"layer {i}")
            if i > 0 and layer.in_dim != self.layers[i - 1].out_dim:
                raise WeightFormatError(
                    f"dim chain break: layer {i - 1} outputs "
                    f"{self.layers[i - 1].out_dim} but layer {i} expects {layer.in_dim}"
                )
        heads = (self.mean_head, self.log_std_head)
        if any(h is not None for h in heads):
            if any(h is None for h in heads):
                raise WeightFormatError("actor needs both mean and log_std heads")
            trunk_out = self.layers[-1].out_dim
            for name, head in (("mean", self.mean_head), ("log_std", self.log_std_head)):
                _check_layer(head, f"{name} head")
                if head.in_dim != trunk_out:
                    raise WeightFormatError(
                        f"dim chain break: trunk outputs {trunk_out} but "
                        f"{name} head expects {head.in_dim}"
                    )
            if self.mean_head.out_dim != self.log_std_head.out_dim:
                raise WeightFormatError("mean and log_std heads disagree on action dim")
            adim = self.mean_head.out_dim
            for name, vec in (("scale", self.action_scale), ("offset", self.action_offset)):
                if vec is None or vec.shape != (adim,):
                    raise WeightFormatError(f"action {name} must be a length-{adim} vector")
                if not np.all(np.isfinite(vec)):
                    raise WeightFormatError(f"action {name} has non-finite entries")


def _check_layer(layer: DenseLayer, where: str):
    if layer.activation not in _ACTIVATIONS:
        raise WeightFormatError(f"{where}: unknown activation {layer.activation!r}")
    if layer.weight.ndim != 2 or layer.bias.shape != (layer.weight.shape[0],):
        raise WeightFormatError(f"{where}: weight/bias shapes disagree")
    if not (np.all(np.isfinite(layer.weight)) and np.all(np.isfinite(layer.bias))):
        raise WeightFormatError(f"{where}: non-finite entries")


def _apply(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    # Row-wise matvec keeps batched outputs bit-identical to single calls
    # (batched gemm may accumulate in a different order than gemv).
    if x.ndim == 1:
        y = layer.weight @ x + layer.bias
    else:
        y = np.stack([layer.weight @ row for row in x]) + layer.bias
    if layer.activation == "relu":
        np.maximum(y, 0.0, out=y)
    elif layer.activation == "tanh":
        np.tanh(y, out=y)
    return y


def mlp_forward(weights: MlpWeights, x: np.ndarray) -> np.ndarray:
    """Run the trunk on x, shape (..., in_dim); final layer as tagged."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != weights.in_dim:
        raise ModelFaultError(
            f"input dim {x.shape[-1]} does not match network input {weights.in_dim}"
        )
    y = x
    for layer in weights.layers:
        y = _apply(layer, y)
    return y


def actor_sample(
    weights: MlpWeights,
    s: np.ndarray,
    k: int,
    rng: np.random.Generator,
    deterministic_offsets: np.ndarray | None = None,
) -> np.ndarray:
    """Draw k actions from the tanh-squashed Gaussian head at state s.

    With deterministic_offsets given (length k), the Gaussian noise z is
    replaced by the fixed probe scalars, yielding a reproducible action set.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    trunk = mlp_forward(weights, s)
    mu = _apply(weights.mean_head, trunk)
    log_std = np.clip(_apply(weights.log_std_head, trunk), LOG_STD_MIN, LOG_STD_MAX)
    std = np.exp(log_std)
    if deterministic_offsets is not None:
        offs = np.asarray(deterministic_offsets, dtype=float)
        if offs.shape != (k,):
            raise ValueError("deterministic offsets must have length k")
        z = offs[:, None] * np.ones((1, mu.shape[-1]))
    else:
        z = rng.standard_normal((k, mu.shape[-1]))
    raw = mu + std * z
    actions = weights.action_scale * np.tanh(raw) + weights.action_offset
    if not np.all(np.isfinite(actions)):
        raise ModelFaultError("actor produced non-finite actions")
    return actions


def critic_cost_to_go(weights: MlpWeights, s: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Batched cost-to-go for each action at s: max(0, -Q(concat(s, a)))."""
    actions = np.asarray(actions, dtype=float)
    if actions.ndim != 2 or actions.shape[0] < 1:
        raise ModelFaultError("actions must be a nonempty (k, action_dim) batch")
    batch = np.concatenate(
        [np.broadcast_to(np.asarray(s, dtype=float), (actions.shape[0], len(s))), actions],
        axis=1,
    )
    raw = mlp_forward(weights, batch)
    if raw.shape[-1] != 1:
        raise ModelFaultError("critic network must output a single Q value")
    out = np.maximum(0.0, -raw[:, 0])
    if not np.all(np.isfinite(out)):
        raise ModelFaultError("critic produced non-finite values")
    return out


def mlp_model_pair(
    actor_weights: MlpWeights,
    critic_weights: MlpWeights,
    state_dim: int,
    action_dim: int,
    deterministic_offsets: np.ndarray | None = None,
) -> ModelPair:
    """Bundle MLP actor + critic behind the ModelPair contract."""
    if actor_weights.in_dim != state_dim:
        raise ModelFaultError("actor input dim does not match state dim")
    if critic_weights.in_dim != state_dim + action_dim:
        raise ModelFaultError("critic input dim must be state_dim + action_dim")

    def sample(s, k, rng):
        return actor_sample(actor_weights, s, k, rng, deterministic_offsets)

    def cost(s, actions):
        return critic_cost_to_go(critic_weights, s, actions)

    return ModelPair(sample, cost, state_dim, action_dim)


# ---------------------------------------------------------------------------
# Weight file format
# ---------------------------------------------------------------------------
#
#   mlpweights 1
#   role actor|critic
#   trunk <n_layers>
#   layer <i> <in> <out> <activation>
#   <out> rows of <in> floats      (weight matrix, one output row per line)
#   <in=out floats on one line>    (bias)
#   ... actor only:
#   head mean <in> <out> <activation> / rows / bias
#   head log_std <in> <out> <activation> / rows / bias
#   scale <out floats>
#   offset <out floats>
#
# Floats are base-10 with 17 significant digits, losslessly round-tripping
# 64-bit values; save(load(f)) reproduces f byte-identically.

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _fmt_vec(vec: np.ndarray) -> str:
    return " ".join(_fmt(float(v)) for v in vec)


def save_weights(weights: MlpWeights, path) -> None:
    weights.validate()
    lines = ["mlpweights 1", f"role {'actor' if weights.is_actor else 'critic'}"]
    lines.append(f"trunk {len(weights.layers)}")
    for i, layer in enumerate(weights.layers):
        lines.append(f"layer {i} {layer.in_dim} {layer.out_dim} {layer.activation}")
        for row in layer.weight:
            lines.append(_fmt_vec(row))
        lines.append(_fmt_vec(layer.bias))
    if weights.is_actor:
        for name, head in (("mean", weights.mean_head), ("log_std", weights.log_std_head)):
            lines.append(f"head {name} {head.in_dim} {head.out_dim} {head.activation}")
            for row in head.weight:
                lines.append(_fmt_vec(row))
            lines.append(_fmt_vec(head.bias))
        lines.append(f"scale {_fmt_vec(weights.action_scale)}")
        lines.append(f"offset {_fmt_vec(weights.action_offset)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class _LineReader:
    def __init__(self, path):
        with open(path) as fh:
            self.lines = fh.read().splitlines()
        self.pos = 0
        self.path = path

    def next(self, what: str) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        raise WeightFormatError(f"{self.path}: unexpected end of file, expected {what}")

    def floats(self, n: int, what: str) -> np.ndarray:
        parts = self.next(what).split()
        if len(parts) != n:
            raise WeightFormatError(
                f"{self.path}:{self.pos}: expected {n} floats for {what}, got {len(parts)}"
            )
        try:
            return np.array([float(p) for p in parts])
        except ValueError as exc:
            raise WeightFormatError(f"{self.path}:{self.pos}: {exc}") from exc


def _read_layer(r: _LineReader, header: str, tag: str, index: str) -> DenseLayer:
    parts = header.split()
    if len(parts) != (5 if tag == "layer" else 5) or parts[0] != tag:
        raise WeightFormatError(f"{r.path}:{r.pos}: malformed {tag} header at {index}")
    in_dim, out_dim = int(parts[2]), int(parts[3])
    activation = parts[4]
    rows = [r.floats(in_dim, f"{tag} {index} weight row") for _ in range(out_dim)]
    bias = r.floats(out_dim, f"{tag} {index} bias")
    return DenseLayer(np.array(rows), bias, activation)


def load_weights(path) -> MlpWeights:
    """Parse and validate a weight file; raises WeightFormatError on defects."""
    r = _LineReader(path)
    magic = r.next("magic header")
    if magic != "mlpweights 1":
        raise WeightFormatError(f"{path}: bad magic line {magic!r}")
    role_line = r.next("role").split()
    if len(role_line) != 2 or role_line[0] != "role" or role_line[1] not in ("actor", "critic"):
        raise WeightFormatError(f"{path}: bad role line")
    role = role_line[1]
    trunk_line = r.next("trunk count").split()
    if len(trunk_line) != 2 or trunk_line[0] != "trunk":
        raise WeightFormatError(f"{path}: bad trunk line")
    n_layers = int(trunk_line[1])
    layers = [
        _read_layer(r, r.next(f"layer {i} header"), "layer", str(i))
        for i in range(n_layers)
    ]
    weights = MlpWeights(layers)
    if role == "actor":
        heads = {}
        for _ in range(2):
            header = r.next("head header")
            name = header.split()[1] if len(header.split()) > 1 else "?"
            heads[name] = _read_layer(r, header, "head", name)
        if set(heads) != {"mean", "log_std"}:
            raise WeightFormatError(f"{path}: actor must declare mean and log_std heads")
        adim = heads["mean"].out_dim
        scale_line = r.next("scale").split()
        offset_line = r.next("offset").split()
        if scale_line[0] != "scale" or offset_line[0] != "offset":
            raise WeightFormatError(f"{path}: missing scale/offset lines")
        weights = MlpWeights(
            layers,
            mean_head=heads["mean"],
            log_std_head=heads["log_std"],
            action_scale=np.array([float(v) for v in scale_line[1:]]),
            action_offset=np.array([float(v) for v in offset_line[1:]]),
        )
        if weights.action_scale.shape != (adim,):
            raise WeightFormatError(f"{path}: scale length != action dim {adim}")
    weights.validate()
    return weights


# ---------------------------------------------------------------------------
# Analytic surrogates
# ---------------------------------------------------------------------------

def _clip_norm(v: np.ndarray, max_norm: float) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n > max_norm and n > 0.0:
        return v * (max_norm / n)
    return v


def surrogate_nav(goal: np.ndarray, sigma: float, max_action_norm: float) -> ModelPair:
    """Goal-seeking 2D point models: greedy step actor, straight-line critic.

    Both ignore obstacles on purpose; the search has to supply the detours.
    """
    goal = np.asarray(goal, dtype=float)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")

    def sample(s, k, rng):
        mu = _clip_norm(goal - np.asarray(s, dtype=float), max_action_norm)
        if sigma > 0.0:
            acts = mu + rng.normal(0.0, sigma, size=(k, 2))
        else:
            acts = np.tile(mu, (k, 1))
        return np.array([_clip_norm(a, max_action_norm) for a in acts])

    def cost(s, actions):
        s = np.asarray(s, dtype=float)
        actions = np.asarray(actions, dtype=float)
        step = np.linalg.norm(actions, axis=1)
        remain = np.linalg.norm((s + actions) - goal, axis=1)
        return step + remain

    return ModelPair(sample, cost, 2, 2)


def surrogate_pusht(
    goal_pose: tuple[float, float, float],
    parts: list[BodyRect],
    w_pos: float,
    w_ang: float,
    w_reach: float,
    contact_radius: float,
    sigma: float,
    max_action_norm: float,
    workspace: tuple[float, float, float, float] | None = None,
) -> ModelPair:
    """Planar-push models for the (pusher, object-pose) state.

    State layout: (pusher_x, pusher_y, obj_x, obj_y, obj_theta). The critic
    scores the one-step naive prediction (object frozen, pusher moved by a)
    with position, angle, and reach terms; the actor samples pusher deltas
    biased toward the boundary point opposite the goal direction. Neither
    knows about obstacles.
    """
    if min(w_pos, w_ang, w_reach) <= 0:
        raise ValueError("cost weights must be > 0")
    gx, gy, gth = float(goal_pose[0]), float(goal_pose[1]), float(goal_pose[2])

    def _dist_to_object(px, py, ox, oy, oth):
        ct, st = math.cos(oth), math.sin(oth)
        best = math.inf
        for part in parts:
            _, _, d = closest_point_on_body_rect(px, py, part, ox, oy, ct, st)
            if d < best:
                best = d
        return best

    def cost(s, actions):
        s = np.asarray(s, dtype=float)
        actions = np.asarray(actions, dtype=float)
        ox, oy, oth = float(s[2]), float(s[3]), float(s[4])
        pos_term = w_pos * math.hypot(ox - gx, oy - gy)
        ang_term = w_ang * abs(wrap_angle(oth - gth))
        out = np.empty(actions.shape[0])
        for i in range(actions.shape[0]):
            px = float(s[0]) + float(actions[i, 0])
            py = float(s[1]) + float(actions[i, 1])
            reach = max(0.0, _dist_to_object(px, py, ox, oy, oth) - contact_radius)
            out[i] = pos_term + ang_term + w_reach * reach
        return out

    orbit_radius = max(math.hypot(p.cx, p.cy) + math.hypot(p.hw, p.hh) for p in parts)
    orbit_radius += 2.0 * contact_radius

    def clamp_ws(x, y):
        if workspace is None:
            return x, y
        xmin, ymin, xmax, ymax = workspace
        return (
            min(max(x, xmin + 0.01), xmax - 0.01),
            min(max(y, ymin + 0.01), ymax - 0.01),
        )

    def mean_delta(s, steer):
        """Steer to a push-from-behind contact: orbit the object until the
        pusher sits behind it, then drive through the contact point toward
        the goal. steer rotates the contact aim around the object so
        off-center pushes also turn it.
        """
        px, py = float(s[0]), float(s[1])
        ox, oy, oth = float(s[2]), float(s[3]), float(s[4])
        dx, dy = gx - ox, gy - oy
        n = math.hypot(dx, dy)
        if n < 1e-9:
            dx, dy = 1.0, 0.0
        else:
            dx, dy = dx / n, dy / n
        cp, sp = math.cos(steer), math.sin(steer)
        ex = -(dx * cp - dy * sp)
        ey = -(dx * sp + dy * cp)
        ct, st = math.cos(oth), math.sin(oth)
        t = ray_exit_distance(ox, oy, ex, ey, parts, ox, oy, ct, st)
        bx = ox + ex * (t + contact_radius)
        by = oy + ey * (t + contact_radius)
        ux, uy = px - ox, py - oy
        du = math.hypot(ux, uy)
        phi_err = wrap_angle(math.atan2(uy, ux) - math.atan2(ey, ex))
        if abs(phi_err) > 0.4 and du > 1e-9:
            # Not behind the object yet: advance along its orbit circle.
            step = -0.35 if phi_err > 0 else 0.35
            angle = math.atan2(uy, ux) + step
            wx, wy = clamp_ws(ox + orbit_radius * math.cos(angle),
                              oy + orbit_radius * math.sin(angle))
            return wx - px, wy - py
        if math.hypot(bx - px, by - py) > 1.5 * contact_radius:
            bx, by = clamp_ws(bx, by)
            return bx - px, by - py
        # In pushing position: drive toward the goal; the offset contact
        # point turns the motion into a steering push. Throttle down as the
        # object closes in so the endgame can make small corrections.
        mag = min(max_action_norm, 0.6 * n + 0.008)
        return dx * mag, dy * mag

    def sample(s, k, rng):
        s = np.asarray(s, dtype=float)
        theta_err = wrap_angle(float(s[4]) - gth)
        steer0 = max(-0.6, min(0.6, -1.2 * theta_err))
        px, py = float(s[0]), float(s[1])
        out = np.empty((k, 2))
        for i in range(k):
            if sigma > 0.0:
                steer = max(-1.1, min(1.1, steer0 + rng.normal(0.0, 0.35)))
                noise = rng.normal(0.0, sigma, 2)
            else:
                steer = steer0
                noise = 0.0
            mu = _clip_norm(np.array(mean_delta(s, steer)), max_action_norm)
            a = _clip_norm(mu + noise, max_action_norm)
            ex_, ey_ = clamp_ws(px + float(a[0]), py + float(a[1]))
            out[i, 0] = ex_ - px
            out[i, 1] = ey_ - py
        return out

    return ModelPair(sample, cost, 5, 2)


def fixed_action_models(
    action_set: np.ndarray,
    cost_to_go: Callable[[np.ndarray, np.ndarray], np.ndarray],
    state_dim: int,
) -> ModelPair:
    """Deterministic-mode pair: the actor always returns the fixed set.

    Used by the oracle-comparable planner configurations and by the
    ePA*SE-style baseline, which needs a finite, enumerable action space.
    """
    action_set = np.asarray(action_set, dtype=float)

    def sample(s, k, rng):
        if k != action_set.shape[0]:
            raise ModelFaultError(
                f"fixed action set has {action_set.shape[0]} actions, asked for {k}"
            )
        return action_set.copy()

    return ModelPair(sample, cost_to_go, state_dim, action_set.shape[1])


def zero_cost_to_go(s: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return np.zeros(np.asarray(actions).shape[0])
