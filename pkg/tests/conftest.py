import numpy as np
import pytest

from fronttrack import flux_core as fc
from fronttrack import tracker as tk

MODEL_IDS = ["burgers", "cubic", "remark-2x2", "p-system"]


@pytest.fixture(scope="session")
def models():
    return {mid: fc.make_model(mid) for mid in MODEL_IDS}


def random_state(model, rng, margin=0.2):
    lo = model.domain[:, 0]
    hi = model.domain[:, 1]
    pad = margin * (hi - lo)
    return lo + pad + (hi - lo - 2 * pad) * rng.random(model.N)


def scenario_center(model):
    return 0.5 * (model.domain[:, 0] + model.domain[:, 1])


def random_breakpoint_scenario(model_id, rng, n_jumps=4, scale=None):
    """Small-BV piecewise-constant initial data as a breakpoints spec."""
    model = fc.make_model(model_id)
    if scale is None:
        scale = {"burgers": 0.3, "cubic": 0.3,
                 "remark-2x2": 0.05, "p-system": 0.08}[model_id]
    center = scenario_center(model)
    xs = np.sort(rng.uniform(-1.0, 1.0, n_jumps))
    while len(np.unique(xs)) < n_jumps:
        xs = np.sort(rng.uniform(-1.0, 1.0, n_jumps))
    lo = model.domain[:, 0] + 0.12 * (model.domain[:, 1] - model.domain[:, 0])
    hi = model.domain[:, 1] - 0.12 * (model.domain[:, 1] - model.domain[:, 0])
    values = [center.copy()]
    state = center.copy()
    for _ in range(n_jumps):
        step = scale * (2.0 * rng.random(model.N) - 1.0)
        state = np.clip(state + step, lo, hi)
        values.append(state.copy())
    return {"kind": "breakpoints", "xs": [float(x) for x in xs],
            "values": [[float(v) for v in u] for u in values]}


def quick_run(model_id, initial, epsilon=0.05, t_end=1.0, **kw):
    cfg = tk.RunConfig(model_id=model_id, initial=initial, epsilon=epsilon,
                       t_end=t_end, **kw)
    return tk.run(cfg)


@pytest.fixture(scope="session")
def burgers_merge_timeline():
    return quick_run("burgers", {"kind": "breakpoints", "xs": [-1.0, 0.0],
                                 "values": [[1.0], [0.5], [0.0]]},
                     epsilon=0.1, t_end=5.0)


@pytest.fixture(scope="session")
def burgers_fan_timeline():
    return quick_run("burgers", {"kind": "breakpoints", "xs": [0.0],
                                 "values": [[0.0], [1.0]]},
                     epsilon=0.01, t_end=2.0)


@pytest.fixture(scope="session")
def sawtooth_timeline():
    initial = {"kind": "profile", "name": "sawtooth", "samples": 24,
               "params": {"teeth": 3, "amplitude": 0.5}}
    return quick_run("burgers", initial, epsilon=0.05, t_end=2.0)


@pytest.fixture(scope="session")
def remark_timeline():
    rng = np.random.default_rng(7)
    initial = random_breakpoint_scenario("remark-2x2", rng, n_jumps=5)
    return quick_run("remark-2x2", initial, epsilon=0.05, t_end=1.5)
