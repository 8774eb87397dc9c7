"""Deterministic substream RNG.

Every random draw in the simulator comes from a counter-based Philox
generator keyed by (seed, draw kind, mb, q, u).  Keying each draw kind
separately means any sub-draw (one UE's shadowing, one CB's small-scale
fading, ...) can be reproduced in isolation without replaying the whole
realization, and results do not depend on evaluation order.
"""

import numpy as np

# Draw kinds.  Values are part of the reproducibility contract: changing
# them changes every simulated number.
POSITIONS = 0
SHADOWING = 1
GEOMETRY = 2
SMALLSCALE = 3

_KEY_ARITY = 5


def substream(seed: int, kind: int, a: int = 0, b: int = 0, c: int = 0) -> np.random.Generator:
    """Generator for the substream keyed by (seed, kind, a, b, c).

    The key arity is fixed so that distinct coordinate tuples can never
    alias each other in the SeedSequence entropy pool.
    """
    ss = np.random.SeedSequence([int(seed), int(kind), int(a), int(b), int(c)])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-realization seed from a campaign master seed.

    Adding realizations never perturbs the seeds of earlier ones.
    """
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])
