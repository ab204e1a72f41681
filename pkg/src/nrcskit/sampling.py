"""Random machines and trees for property tests and sweeps."""

from __future__ import annotations

import random
from collections.abc import Sequence

from .nrcs import Nrcs, Reset, Transition, Tree, Update


def random_tree(rng: random.Random, labels: Sequence[str], max_nodes: int,
                max_height: int) -> Tree:
    """A random tree with between 1 and max_nodes nodes."""
    target = rng.randint(1, max_nodes)

    def build(depth: int, room: int) -> tuple[Tree, int]:
        lab = rng.choice(labels)
        used = 1
        kids = []
        while depth < max_height and used < room and rng.random() < 0.6:
            child, n = build(depth + 1, room - used)
            kids.append(child)
            used += n
        return Tree(lab, kids), used

    return build(0, target)[0]


def random_path(rng: random.Random, labels: Sequence[str], length: int) -> tuple[str, ...]:
    return tuple(rng.choice(labels) for _ in range(length))


def random_transition(rng: random.Random, labels: Sequence[str], k: int,
                      renaming_only: bool = False) -> Transition:
    if renaming_only:
        n = rng.randint(1, k + 1)
        return Update(random_path(rng, labels, n), random_path(rng, labels, n))
    if rng.random() < 0.3:
        n = rng.randint(1, k)
        return Reset(random_path(rng, labels, n), rng.choice(labels), random_path(rng, labels, n))
    return Update(random_path(rng, labels, rng.randint(1, k + 1)),
                  random_path(rng, labels, rng.randint(1, k + 1)))


def random_instance(rng: random.Random, k_max: int = 2, q_max: int = 4, t_max: int = 6,
                    node_max: int = 5, renaming_only: bool = False):
    """(machine, init, target) with the requested size limits."""
    k = rng.randint(1, k_max)
    q = rng.randint(1, q_max)
    labels = [f"q{i}" for i in range(q)]
    trans = [random_transition(rng, labels, k, renaming_only)
             for _ in range(rng.randint(1, t_max))]
    m = Nrcs(k, tuple(labels), tuple(trans))
    init = random_tree(rng, labels, node_max, k)
    target = random_tree(rng, labels, node_max, k)
    return m, init, target
