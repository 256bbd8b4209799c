import numpy as np

from brownian_lab.metric_cover import FinitePseudoMetric


def random_pseudo_metric(rng, n, p_edge=0.5, p_zero=0.1, allow_inf=True):
    """Shortest-path metric of a random weighted graph.

    Zero-weight edges give distinct points at distance 0; a disconnected graph
    gives infinite distances.
    """
    W = np.full((n, n), np.inf)
    np.fill_diagonal(W, 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge or (not allow_inf and j == i + 1):
                w = 0.0 if rng.random() < p_zero else float(rng.integers(1, 10))
                W[i, j] = W[j, i] = w
    for k in range(n):
        W = np.minimum(W, W[:, k : k + 1] + W[k : k + 1, :])
    return FinitePseudoMetric(W)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
