"""Counter-based random streams keyed by integer tuples.

Every stochastic routine derives its generator from ``stream(seed, *keys)``
so that replicas are reproducible regardless of execution order.
"""

import numpy as np


def stream(seed, *keys):
    """Philox generator keyed by ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return np.random.Generator(np.random.Philox(ss))


class Draws:
    """Buffered scalar draws from a generator.

    Single-value numpy calls cost far more than a Python list pop, so the
    simulation loops pull uniforms and exponentials from refilled blocks.
    """

    def __init__(self, gen, block=4096):
        self.gen = gen
        self.block = block
        self._u = []
        self._e = []

    def uniform(self):
        if not self._u:
            self._u = self.gen.random(self.block).tolist()
        return self._u.pop()

    def exponential(self):
        if not self._e:
            self._e = self.gen.standard_exponential(self.block).tolist()
        return self._e.pop()

    def point(self, lower, sides):
        u = np.array([self.uniform() for _ in range(len(sides))])
        return lower + sides * u
