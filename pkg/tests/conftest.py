import random

import pytest
from hypothesis import HealthCheck, settings

from hamdec.digraph import BipartiteDigraph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_bipartite(rng: random.Random, n_a: int, n_b: int, p: float) -> BipartiteDigraph:
    out_a = [sum(1 << j for j in range(n_b) if rng.random() < p) for _ in range(n_a)]
    out_b = [sum(1 << j for j in range(n_a) if rng.random() < p) for _ in range(n_b)]
    return BipartiteDigraph(n_a, n_b, out_a, out_b)


@pytest.fixture
def rng():
    return random.Random(12345)
