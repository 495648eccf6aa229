"""Communication graph and the consensus matrices derived from it.

Agents are labeled 1..K. The graph is undirected and must be connected;
each neighborhood N_k contains the agent itself. The edge-splitting
construction enumerates the 2E ordered pairs (k, l) with l a neighbor of
k (l != k) and builds the block matrices A1, A2 whose q-th block rows
carry an identity in columns k and l respectively. From those:

    Mplus  = A1' + A2'        Mminus = A1' - A2'
    Lplus  = 0.5 Mplus Mplus'  Lminus = 0.5 Mminus Mminus'
    H      = 0.5 (Lplus + Lminus)   (block-diagonal degree matrix)
    Q Q    = 0.5 Lminus

All are KP x KP for feature dimension P. Lminus is the (block) graph
Laplacian: it annihilates vectors with identical per-agent blocks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraph, InvalidEdge, NumericalFailure

# 5-cycle plus one chord; a sparse connected default for 5-agent experiments.
DEFAULT_TOPOLOGY_EDGES: tuple[tuple[int, int], ...] = (
    (1, 2), (2, 3), (3, 4), (4, 5), (5, 1), (1, 3),
)


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph over agents 1..K.

    Attributes
    ----------
    num_agents : int
        Number of agents K.
    edges : tuple of (int, int)
        Unordered edges, normalized to (small, large) and deduplicated.
    neighborhoods : tuple of frozenset
        neighborhoods[k-1] is N_k, including k itself.
    """

    num_agents: int
    edges: tuple[tuple[int, int], ...]
    neighborhoods: tuple[frozenset[int], ...]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def agents(self) -> range:
        return range(1, self.num_agents + 1)

    def neighbors(self, k: int) -> frozenset[int]:
        """N_k, self included."""
        return self.neighborhoods[k - 1]

    def degree(self, k: int) -> int:
        """|N_k \\ {k}|, the graph degree."""
        return len(self.neighborhoods[k - 1]) - 1

    def directed_pairs(self) -> tuple[tuple[int, int], ...]:
        """The 2E ordered pairs (k, l), l in N_k \\ {k}, in sorted order."""
        return tuple(
            (k, l) for k in self.agents for l in sorted(self.neighbors(k)) if l != k
        )


def build_graph(num_agents: int, edges) -> Graph:
    """Validate an edge list and construct the Graph.

    Parameters
    ----------
    num_agents : int
        K >= 1.
    edges : iterable of (int, int)
        Undirected edges with endpoints in 1..K; no self-loops.

    Raises
    ------
    InvalidEdge
        On out-of-range endpoints or self-loops.
    DisconnectedGraph
        If the resulting graph is not connected.
    """
    if num_agents < 1:
        raise InvalidEdge(f"need at least one agent, got K={num_agents}")
    normalized = set()
    for edge in edges:
        k, l = int(edge[0]), int(edge[1])
        if k == l:
            raise InvalidEdge(f"self-loop ({k},{l}) not allowed")
        if not (1 <= k <= num_agents and 1 <= l <= num_agents):
            raise InvalidEdge(f"edge ({k},{l}) outside agents 1..{num_agents}")
        normalized.add((min(k, l), max(k, l)))
    edge_tuple = tuple(sorted(normalized))

    adjacency = {k: {k} for k in range(1, num_agents + 1)}
    for k, l in edge_tuple:
        adjacency[k].add(l)
        adjacency[l].add(k)

    # breadth-first reachability from agent 1
    seen = {1}
    frontier = [1]
    while frontier:
        nxt = []
        for k in frontier:
            for l in adjacency[k]:
                if l not in seen:
                    seen.add(l)
                    nxt.append(l)
        frontier = nxt
    if len(seen) != num_agents:
        missing = sorted(set(range(1, num_agents + 1)) - seen)
        raise DisconnectedGraph(f"agents {missing} unreachable from agent 1")

    neighborhoods = tuple(
        frozenset(adjacency[k]) for k in range(1, num_agents + 1)
    )
    return Graph(num_agents=num_agents, edges=edge_tuple, neighborhoods=neighborhoods)


@dataclass(frozen=True)
class ConsensusMatrices:
    """Edge-splitting matrices for a graph at feature dimension P.

    a1, a2 are 2EP x KP; the rest are KP x KP symmetric PSD. q is the
    principal square root of 0.5*lminus. The two spectral constants are
    the smallest nonzero eigenvalue of lminus and the largest eigenvalue
    of lplus.
    """

    graph: Graph
    p: int
    a1: np.ndarray
    a2: np.ndarray
    m_plus: np.ndarray
    m_minus: np.ndarray
    l_plus: np.ndarray
    l_minus: np.ndarray
    h: np.ndarray
    q: np.ndarray
    lambda_min_nonzero_lminus: float
    lambda_max_lplus: float


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix via eigendecomposition.

    Eigenvalues in (-1e-12, 0) are rounding noise and clamped to zero;
    anything more negative means the input was not PSD.
    """
    try:
        eigvals, eigvecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    if eigvals.min(initial=0.0) < -1e-12:
        raise NumericalFailure(
            f"matrix not PSD: smallest eigenvalue {eigvals.min():.3e}"
        )
    clamped = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(clamped)) @ eigvecs.T


def build_matrices(graph: Graph, p: int) -> ConsensusMatrices:
    """Construct all consensus matrices for `graph` at feature dimension `p`.

    Block rule: for the q-th ordered pair (k, l), block (q, k) of A1 and
    block (q, l) of A2 are identity; everything else is zero. H is built
    independently as the block-diagonal degree matrix, so the identity
    H = 0.5(Lplus + Lminus) is a genuine consistency check, not a
    definition.
    """
    if p < 1:
        raise InvalidEdge(f"feature dimension must be positive, got P={p}")
    pairs = graph.directed_pairs()
    k_count = graph.num_agents
    a1_blocks = np.zeros((len(pairs), k_count))
    a2_blocks = np.zeros((len(pairs), k_count))
    for row, (k, l) in enumerate(pairs):
        a1_blocks[row, k - 1] = 1.0
        a2_blocks[row, l - 1] = 1.0
    eye = np.eye(p)
    a1 = np.kron(a1_blocks, eye)
    a2 = np.kron(a2_blocks, eye)
    m_plus = (a1 + a2).T
    m_minus = (a1 - a2).T
    l_plus = 0.5 * (m_plus @ m_plus.T)
    l_minus = 0.5 * (m_minus @ m_minus.T)

    degrees = np.array([graph.degree(k) for k in graph.agents], dtype=float)
    h = np.kron(np.diag(degrees), eye)

    q = _psd_sqrt(0.5 * l_minus)
    lam_min_nz, lam_max = _spectral_constants(l_minus, l_plus)
    return ConsensusMatrices(
        graph=graph,
        p=p,
        a1=a1,
        a2=a2,
        m_plus=m_plus,
        m_minus=m_minus,
        l_plus=l_plus,
        l_minus=l_minus,
        h=h,
        q=q,
        lambda_min_nonzero_lminus=lam_min_nz,
        lambda_max_lplus=lam_max,
    )


def _spectral_constants(l_minus: np.ndarray, l_plus: np.ndarray) -> tuple[float, float]:
    try:
        minus_eigs = np.linalg.eigvalsh(l_minus)
        plus_eigs = np.linalg.eigvalsh(l_plus)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolve failed: {exc}") from exc
    tol = 1e-8 * max(1.0, float(minus_eigs.max(initial=0.0)))
    nonzero = minus_eigs[minus_eigs > tol]
    if nonzero.size == 0:
        raise NumericalFailure("Lminus has no nonzero eigenvalue (edgeless graph?)")
    return float(nonzero.min()), float(plus_eigs.max())


def spectral_constants(matrices: ConsensusMatrices) -> tuple[float, float]:
    """(smallest nonzero eigenvalue of Lminus, largest eigenvalue of Lplus)."""
    return matrices.lambda_min_nonzero_lminus, matrices.lambda_max_lplus


def export_matrices(matrices: ConsensusMatrices, directory: str) -> list[str]:
    """Write each matrix to `<directory>/<name>.csv` for debugging; returns paths."""
    os.makedirs(directory, exist_ok=True)
    written = []
    named = {
        "a1": matrices.a1,
        "a2": matrices.a2,
        "m_plus": matrices.m_plus,
        "m_minus": matrices.m_minus,
        "l_plus": matrices.l_plus,
        "l_minus": matrices.l_minus,
        "h": matrices.h,
        "q": matrices.q,
    }
    for name, mat in named.items():
        path = os.path.join(directory, f"{name}.csv")
        np.savetxt(path, mat, delimiter=",")
        written.append(path)
    return written
