"""Generate the reference weight fixtures checked into tests/fixtures/.

Run once from the repo root:

    python3 scripts/gen_weight_fixture.py

Writes a small seeded actor and critic in the portable text format plus a
pairs file holding five critic input -> output vectors produced by the
same forward pass. The test suite reloads these and cross-checks them
against an independent matmul oracle.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pachs.models import DenseLayer, MlpWeights, critic_cost_to_go, save_weights

STATE_DIM = 4
ACTION_DIM = 2
HIDDEN = 16
SEED = 20240817


def _layer(rng, n_in, n_out, activation):
    w = rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_out, n_in))
    b = rng.normal(0.0, 0.1, size=n_out)
    return DenseLayer(w, b, activation)


def main():
    out = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)

    actor = MlpWeights(
        layers=[_layer(rng, STATE_DIM, HIDDEN, "relu"), _layer(rng, HIDDEN, HIDDEN, "relu")],
        mean_head=_layer(rng, HIDDEN, ACTION_DIM, "identity"),
        log_std_head=_layer(rng, HIDDEN, ACTION_DIM, "identity"),
        action_scale=np.array([0.05, 0.05]),
        action_offset=np.array([0.0, 0.0]),
    )
    critic = MlpWeights(
        layers=[
            _layer(rng, STATE_DIM + ACTION_DIM, HIDDEN, "relu"),
            _layer(rng, HIDDEN, HIDDEN, "relu"),
            _layer(rng, HIDDEN, 1, "identity"),
        ]
    )
    save_weights(actor, out / "actor_small.w")
    save_weights(critic, out / "critic_small.w")

    lines = []
    for _ in range(5):
        s = rng.normal(0.0, 1.0, STATE_DIM)
        a = rng.normal(0.0, 0.05, ACTION_DIM)
        q = critic_cost_to_go(critic, s, a[None, :])[0]
        vec = " ".join(f"{v:.17g}" for v in np.concatenate([s, a]))
        lines.append(f"input {vec} output {q:.17g}")
    (out / "critic_pairs.txt").write_text("\n".join(lines) + "\n")
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()
