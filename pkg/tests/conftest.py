import numpy as np
import pytest

from wcce import taxonomy
from wcce.backend import available_backends

TOY_TREE = "root\tanimal\nroot\tvehicle\nanimal\tdog\nanimal\tcat\nvehicle\tcar"


@pytest.fixture
def toy_tax():
    return taxonomy.parse_taxonomy(TOY_TREE)


@pytest.fixture(params=sorted(available_backends()))
def backend_kernels(request, monkeypatch):
    """Run a test under every importable kernel backend."""
    kern = available_backends()[request.param]
    for module in ("wcce.loss", "wcce.trainer", "wcce.metrics"):
        monkeypatch.setattr(f"{module}.kernels", kern, raising=True)
    return kern


def random_tree_text(rng: np.random.Generator, n_nodes: int) -> tuple[str, dict]:
    """Random rooted tree as edge-list text plus an adjacency map for oracles."""
    names = [f"n{i}" for i in range(n_nodes)]
    adjacency = {name: set() for name in names}
    lines = []
    for i in range(1, n_nodes):
        parent = names[int(rng.integers(0, i))]
        child = names[i]
        lines.append(f"{parent}\t{child}")
        adjacency[parent].add(child)
        adjacency[child].add(parent)
    order = rng.permutation(len(lines))
    return "\n".join(lines[i] for i in order), adjacency


def bfs_all_distances(adjacency: dict, source: str) -> dict:
    """Brute-force BFS distances; the oracle for tree path lengths."""
    from collections import deque

    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for neighbor in adjacency[node]:
            if neighbor not in dist:
                dist[neighbor] = dist[node] + 1
                queue.append(neighbor)
    return dist
