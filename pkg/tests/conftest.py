import numpy as np

from cartsim import ModelParams, SimState, RANGES, STANDARD_PARAMS, STANDARD_INIT

PARAM_NAMES = tuple(STANDARD_PARAMS)
INIT_NAMES = tuple(STANDARD_INIT)


def draw_case(rng: np.random.Generator):
    """One parameter set + initial state drawn uniformly inside the ranges."""
    p = ModelParams(**{k: rng.uniform(*RANGES[k]) for k in PARAM_NAMES})
    iv = {k: rng.uniform(*RANGES[k]) for k in INIT_NAMES}
    return p, SimState(C=iv["C0"], L=iv["L0"], B=iv["B0"])
