import math
from pathlib import Path

import numpy as np
import pytest

from pachs.geometry import BodyRect, wrap_angle
from pachs.models import (
    DenseLayer,
    MlpWeights,
    ModelFaultError,
    WeightFormatError,
    actor_sample,
    critic_cost_to_go,
    load_weights,
    mlp_forward,
    mlp_model_pair,
    save_weights,
    surrogate_nav,
    surrogate_pusht,
)

FIXTURES = Path(__file__).parent / "fixtures"


def _random_weights(rng, dims, activations):
    layers = []
    for (n_in, n_out), act in zip(zip(dims[:-1], dims[1:]), activations):
        layers.append(DenseLayer(rng.normal(size=(n_out, n_in)), rng.normal(size=n_out), act))
    return MlpWeights(layers)


# -- forward pass -----------------------------------------------------------

def test_forward_zero_weights_returns_bias():
    b = np.array([0.3, -1.2])
    w = MlpWeights([DenseLayer(np.zeros((2, 3)), b, "identity")])
    assert np.allclose(mlp_forward(w, np.zeros(3)), b)


def test_forward_relu_clips():
    w = MlpWeights([DenseLayer(np.eye(2), np.zeros(2), "relu")])
    assert np.allclose(mlp_forward(w, np.array([-1.0, 2.0])), [0.0, 2.0])


def test_forward_matches_naive_matmul_oracle():
    rng = np.random.default_rng(123)
    w = _random_weights(rng, (5, 8, 8, 3), ("relu", "tanh", "identity"))
    x = rng.normal(size=5)
    out = mlp_forward(w, x)
    # straight-line oracle
    y = x.copy()
    for layer in w.layers:
        z = np.array([float(np.dot(row, y)) + float(b) for row, b in zip(layer.weight, layer.bias)])
        if layer.activation == "relu":
            z = np.maximum(z, 0.0)
        elif layer.activation == "tanh":
            z = np.tanh(z)
        y = z
    assert np.allclose(out, y, rtol=1e-6)


def test_forward_dim_mismatch():
    w = MlpWeights([DenseLayer(np.eye(2), np.zeros(2), "identity")])
    with pytest.raises(ModelFaultError):
        mlp_forward(w, np.zeros(3))


# -- actor -------------------------------------------------------------------

def _actor_weights(rng, state_dim=3, action_dim=2, log_std_bias=-1.0):
    trunk = _random_weights(rng, (state_dim, 8), ("relu",)).layers
    return MlpWeights(
        layers=trunk,
        mean_head=DenseLayer(rng.normal(size=(action_dim, 8)), rng.normal(size=action_dim), "identity"),
        log_std_head=DenseLayer(np.zeros((action_dim, 8)), np.full(action_dim, log_std_bias), "identity"),
        action_scale=np.array([0.5, 0.25]),
        action_offset=np.array([0.1, -0.1]),
    )


def test_actor_collapsed_gaussian():
    rng = np.random.default_rng(0)
    w = _actor_weights(rng, log_std_bias=-40.0)  # clamped to -20, std ~ 2e-9
    s = rng.normal(size=3)
    acts = actor_sample(w, s, 16, np.random.default_rng(1))
    trunk = mlp_forward(w, s)
    mu = trunk @ w.mean_head.weight.T + w.mean_head.bias
    want = w.action_scale * np.tanh(mu) + w.action_offset
    assert np.allclose(acts, np.tile(want, (16, 1)), atol=1e-7)


def test_actor_symmetric_sample_mean():
    # zero mean head, zero offset: the sample mean must vanish by symmetry
    adim = 2
    w = MlpWeights(
        layers=[DenseLayer(np.zeros((4, 3)), np.zeros(4), "relu")],
        mean_head=DenseLayer(np.zeros((adim, 4)), np.zeros(adim), "identity"),
        log_std_head=DenseLayer(np.zeros((adim, 4)), np.full(adim, -1.0), "identity"),
        action_scale=np.array([1.0, 1.0]),
        action_offset=np.zeros(2),
    )
    n = 100_000
    acts = actor_sample(w, np.zeros(3), n, np.random.default_rng(5))
    sigma_component = math.tanh(1.0) * math.exp(-1.0)  # loose upper bound on std
    assert np.all(np.abs(acts.mean(axis=0)) < 3 * sigma_component / math.sqrt(n) + 1e-3)


def test_actor_range_bound():
    rng = np.random.default_rng(9)
    w = _actor_weights(rng)
    for _ in range(50):
        s = rng.normal(size=3) * 5
        acts = actor_sample(w, s, 64, rng)
        assert np.all(np.abs(acts - w.action_offset) <= np.abs(w.action_scale) + 1e-12)


def test_actor_batched_equals_looped():
    rng = np.random.default_rng(2)
    w = _actor_weights(rng)
    s = rng.normal(size=3)
    batch = actor_sample(w, s, 8, np.random.default_rng(77))
    looped_rng = np.random.default_rng(77)
    looped = np.vstack([actor_sample(w, s, 1, looped_rng) for _ in range(8)])
    assert np.array_equal(batch, looped)


def test_actor_deterministic_probe_set():
    rng = np.random.default_rng(2)
    w = _actor_weights(rng)
    s = rng.normal(size=3)
    offs = np.array([-1.0, 0.0, 1.0])
    a1 = actor_sample(w, s, 3, np.random.default_rng(0), deterministic_offsets=offs)
    a2 = actor_sample(w, s, 3, np.random.default_rng(99), deterministic_offsets=offs)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1[0], a1[2])


# -- critic ------------------------------------------------------------------

def _critic_const(raw_q, state_dim=2, action_dim=1):
    # zero weights, bias = raw_q on the single output
    return MlpWeights(
        [DenseLayer(np.zeros((1, state_dim + action_dim)), np.array([raw_q]), "identity")]
    )


def test_critic_sign_adaptation():
    w = _critic_const(-3.2)
    assert critic_cost_to_go(w, np.zeros(2), np.zeros((1, 1)))[0] == pytest.approx(3.2)
    w = _critic_const(0.7)
    assert critic_cost_to_go(w, np.zeros(2), np.zeros((1, 1)))[0] == 0.0


def test_critic_batch_equals_singles_exactly():
    rng = np.random.default_rng(4)
    w = _random_weights(rng, (5, 16, 1), ("relu", "identity"))
    s = rng.normal(size=3)
    acts = rng.normal(size=(16, 2))
    batch = critic_cost_to_go(w, s, acts)
    singles = np.array([critic_cost_to_go(w, s, acts[i : i + 1])[0] for i in range(16)])
    assert np.array_equal(batch, singles)


def test_critic_nonnegative_finite_sweep():
    rng = np.random.default_rng(8)
    w = _random_weights(rng, (4, 32, 1), ("tanh", "identity"))
    s = rng.normal(size=(200, 2))
    for i in range(200):
        out = critic_cost_to_go(w, s[i], rng.normal(size=(8, 2)))
        assert np.all(out >= 0) and np.all(np.isfinite(out))


# -- weight files ------------------------------------------------------------

def test_weight_roundtrip_byte_identical(tmp_path):
    rng = np.random.default_rng(21)
    w = _actor_weights(rng)
    p1 = tmp_path / "a.w"
    p2 = tmp_path / "b.w"
    save_weights(w, p1)
    save_weights(load_weights(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_weight_chain_break_names_layers(tmp_path):
    w = MlpWeights(
        [
            DenseLayer(np.zeros((64, 4)), np.zeros(64), "relu"),
            DenseLayer(np.zeros((2, 32)), np.zeros(2), "identity"),
        ]
    )
    with pytest.raises(WeightFormatError, match="layer 0.*layer 1"):
        w.validate()
    # also through the file path
    good = MlpWeights([DenseLayer(np.zeros((3, 2)), np.zeros(3), "relu"),
                       DenseLayer(np.zeros((1, 3)), np.zeros(1), "identity")])
    p = tmp_path / "c.w"
    save_weights(good, p)
    text = p.read_text().replace("layer 1 3 1 identity", "layer 1 4 1 identity")
    p.write_text(text)
    with pytest.raises(WeightFormatError):
        load_weights(p)


def test_weight_malformed_file(tmp_path):
    p = tmp_path / "bad.w"
    p.write_text("not a weight file\n")
    with pytest.raises(WeightFormatError):
        load_weights(p)


def test_reference_fixture_pairs():
    critic = load_weights(FIXTURES / "critic_small.w")
    actor = load_weights(FIXTURES / "actor_small.w")
    assert actor.is_actor and not critic.is_actor
    for line in (FIXTURES / "critic_pairs.txt").read_text().splitlines():
        parts = line.split()
        assert parts[0] == "input"
        sep = parts.index("output")
        vec = np.array([float(v) for v in parts[1:sep]])
        want = float(parts[sep + 1])
        s, a = vec[:4], vec[4:]
        got = critic_cost_to_go(critic, s, a[None, :])[0]
        assert got == pytest.approx(want, abs=1e-6)
        # independent matmul oracle on the same file contents
        y = np.concatenate([s, a])
        for layer in critic.layers:
            y = layer.weight @ y + layer.bias
            if layer.activation == "relu":
                y = np.maximum(y, 0.0)
        assert max(0.0, -float(y[0])) == pytest.approx(want, abs=1e-6)


def test_mlp_model_pair_contract():
    rng = np.random.default_rng(31)
    actor = _actor_weights(rng, state_dim=3, action_dim=2)
    critic = _random_weights(rng, (5, 8, 1), ("relu", "identity"))
    pair = mlp_model_pair(actor, critic, 3, 2)
    acts = pair.sample_actions(np.zeros(3), 4, np.random.default_rng(0))
    assert acts.shape == (4, 2)
    qs = pair.cost_to_go(np.zeros(3), acts)
    assert qs.shape == (4,) and np.all(qs >= 0)
    with pytest.raises(ModelFaultError):
        mlp_model_pair(actor, critic, 4, 2)


# -- surrogates ----------------------------------------------------------------

def test_surrogate_nav_at_goal_fixed_point():
    m = surrogate_nav(np.array([0.5, 0.5]), sigma=0.0, max_action_norm=0.1)
    a = m.sample_actions(np.array([0.5, 0.5]), 1, np.random.default_rng(0))[0]
    assert np.linalg.norm(a) < 1e-12
    assert m.cost_to_go(np.array([0.5, 0.5]), np.zeros((1, 2)))[0] == pytest.approx(0.0)


def test_surrogate_nav_cost_arithmetic():
    m = surrogate_nav(np.array([1.0, 0.0]), sigma=0.0, max_action_norm=0.5)
    q = m.cost_to_go(np.array([0.0, 0.0]), np.array([[0.1, 0.0]]))[0]
    assert q == pytest.approx(1.0)


def test_surrogate_nav_greedy_step_count():
    goal = np.array([0.83, 0.41])
    start = np.array([0.1, 0.2])
    max_step = 0.07
    m = surrogate_nav(goal, sigma=0.0, max_action_norm=max_step)
    dist = float(np.linalg.norm(goal - start))
    want = math.ceil(dist / max_step)
    s = start.copy()
    rng = np.random.default_rng(0)
    steps = 0
    while np.linalg.norm(s - goal) > 1e-9:
        a = m.sample_actions(s, 1, rng)[0]
        s = s + a
        steps += 1
        assert steps <= want
    assert steps == want


def _pusht_models(w_pos=1.0, w_ang=0.5, w_reach=0.5, sigma=0.0):
    parts = [BodyRect(0.0, -0.05, 0.03, 0.09), BodyRect(0.0, 0.07, 0.12, 0.03)]
    return parts, surrogate_pusht(
        goal_pose=(0.5, 0.5, 0.0),
        parts=parts,
        w_pos=w_pos,
        w_ang=w_ang,
        w_reach=w_reach,
        contact_radius=0.02,
        sigma=sigma,
        max_action_norm=0.06,
    )


def test_surrogate_pusht_zero_at_goal_contact():
    parts, m = _pusht_models()
    # pusher touching the stem side at the goal pose
    s = np.array([0.5 + 0.03 + 0.02, 0.45, 0.5, 0.5, 0.0])
    q = m.cost_to_go(s, np.zeros((1, 2)))[0]
    assert q == pytest.approx(0.0, abs=1e-12)


def test_surrogate_pusht_weight_linearity():
    _, m1 = _pusht_models(w_pos=1.0)
    _, m2 = _pusht_models(w_pos=2.0)
    s = np.array([0.2, 0.2, 0.3, 0.4, 0.0])  # far pusher, offset object
    a = np.zeros((1, 2))
    q1 = m1.cost_to_go(s, a)[0]
    q2 = m2.cost_to_go(s, a)[0]
    pos_term = math.hypot(0.3 - 0.5, 0.4 - 0.5)
    assert q2 - q1 == pytest.approx(pos_term)


def test_surrogate_pusht_grid_argmin_matches_oracle():
    parts, m = _pusht_models()
    rng = np.random.default_rng(17)
    from pachs.geometry import closest_point_on_body_rect

    def oracle_cost(s, a):
        px, py = s[0] + a[0], s[1] + a[1]
        ox, oy, oth = s[2], s[3], s[4]
        ct, st = math.cos(oth), math.sin(oth)
        d = min(
            closest_point_on_body_rect(px, py, p, ox, oy, ct, st)[2] for p in parts
        )
        return (
            1.0 * math.hypot(ox - 0.5, oy - 0.5)
            + 0.5 * abs(wrap_angle(oth - 0.0))
            + 0.5 * max(0.0, d - 0.02)
        )

    for _ in range(5):
        s = np.array([*rng.uniform(0.1, 0.9, 2), *rng.uniform(0.3, 0.7, 2), rng.uniform(-1, 1)])
        grid = np.array([[dx, dy] for dx in np.linspace(-0.04, 0.04, 9)
                         for dy in np.linspace(-0.04, 0.04, 9)])
        got = m.cost_to_go(s, grid)
        want = np.array([oracle_cost(s, a) for a in grid])
        assert np.allclose(got, want, atol=1e-12)
        assert int(np.argmin(got)) == int(np.argmin(want))


def test_surrogate_seed_determinism():
    _, m = _pusht_models(sigma=0.03)
    s = np.array([0.3, 0.3, 0.5, 0.5, 0.2])
    a1 = m.sample_actions(s, 8, np.random.default_rng(123))
    a2 = m.sample_actions(s, 8, np.random.default_rng(123))
    assert np.array_equal(a1, a2)


def test_surrogate_pusht_batched_equals_looped():
    _, m = _pusht_models(sigma=0.03)
    s = np.array([0.3, 0.3, 0.5, 0.5, 0.2])
    batch = m.sample_actions(s, 6, np.random.default_rng(42))
    looped_rng = np.random.default_rng(42)
    looped = np.vstack([m.sample_actions(s, 1, looped_rng) for _ in range(6)])
    assert np.array_equal(batch, looped)
