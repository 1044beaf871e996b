"""Hamiltonicity analysis: path/cycle deciders, Hamiltonian-connectedness and
laceability, the Hamiltonian difference, grid/cube spanning walks, cubes of
graphs, the Nash-Williams generator basis, and quasi-Hamiltonian certificates.

Length convention: walks in this module are vertex sequences and every stated
bound counts VERTICES (a path v_1..v_n has length n).  The tsp module counts
edges; the conversion edges = vertices - 1 is applied exactly where the two
meet (hamiltonian_difference, qh certificates).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import ResourceCapError
from .graphs import FiniteGraph, cayley_ball, finite_cayley_graph, power_graph
from .groups import (
    AbelianModel,
    FiniteModel,
    FreeModel,
    GroupModel,
    Payload,
    _hermite_basis,
    _in_lattice,
    group_spec_of,
)
from . import tsp

_DP_CAP = 24
_BACKTRACK_CAP = 40
_SEARCH_NODE_CAP = 2_000_000


# ---------------------------------------------------------------------------
# Hamiltonian path decision


_layer_cache: Dict[int, List[np.ndarray]] = {}


def _mask_layers(n: int) -> List[np.ndarray]:
    """Subset masks of {0..n-1} grouped by popcount (shared across DP runs)."""
    layers = _layer_cache.get(n)
    if layers is None:
        masks = np.arange(1 << n, dtype=np.int64)
        pop = np.zeros(1 << n, dtype=np.int8)
        for j in range(n):
            pop[(masks >> j) & 1 == 1] += 1
        layers = [masks[pop == c] for c in range(n + 1)]
        if n <= 16:  # keep the cache small
            _layer_cache[n] = layers
    return layers


def _ends_dp(g: FiniteGraph, start: int) -> np.ndarray:
    """dp[mask] = bitmask of vertices where a Hamiltonian path of the induced
    visited set `mask` starting at `start` can end.  Layered over popcount."""
    n = g.n
    adj_mask = np.array(
        [sum(1 << v for v in g.adj[u]) for u in range(n)], dtype=np.int64
    )
    dp = np.zeros(1 << n, dtype=np.int64)
    dp[1 << start] = 1 << start
    layers = _mask_layers(n)
    for c in range(1, n):
        M = layers[c]
        E = dp[M]
        act = E != 0
        M, E = M[act], E[act]
        if len(M) == 0:
            continue
        for j in range(n):
            bit = 1 << j
            sel = ((M & bit) == 0) & ((E & adj_mask[j]) != 0)
            if sel.any():
                np.bitwise_or.at(dp, M[sel] | bit, bit)
    return dp


def _dp_path(g: FiniteGraph, dp: np.ndarray, start: int, end: int) -> Tuple[int, ...]:
    """Reconstruct one Hamiltonian path from the ends-DP, smallest-vertex ties."""
    n = g.n
    full = (1 << n) - 1
    mask, last = full, end
    rev = [end]
    while mask != (1 << start) or last != start:
        pm = mask ^ (1 << last)
        cand = int(dp[pm]) & sum(1 << v for v in g.adj[last])
        assert cand, "reconstruction failed"
        prev = (cand & -cand).bit_length() - 1
        rev.append(prev)
        mask, last = pm, prev
    return tuple(reversed(rev))


def hamiltonian_path(g: FiniteGraph, u: int, v: int) -> Optional[Tuple[int, ...]]:
    """A Hamiltonian u-v path, or None.  Deterministic output."""
    n = g.n
    if u == v:
        return (u,) if n == 1 else None
    if n <= _DP_CAP:
        dp = _ends_dp(g, u)
        if dp[(1 << n) - 1] & (1 << v):
            return _dp_path(g, dp, u, v)
        return None
    if n <= _BACKTRACK_CAP:
        walk = spanning_walk_min_repeats(g, u, v, max_repeats=0)
        return walk
    raise ResourceCapError(f"hamiltonian_path size cap {_BACKTRACK_CAP} exceeded ({n})")


@dataclass(frozen=True)
class HamiltonicityReport:
    has_hamiltonian_cycle: bool
    hamiltonian_connected: bool
    bipartite: bool
    hamiltonian_laceable: Optional[bool]
    witnesses: Dict[Tuple[int, int], Tuple[int, ...]] = field(repr=False, default_factory=dict)


def analyze(g: FiniteGraph) -> HamiltonicityReport:
    """All-pairs Hamiltonian path decisions with witnesses."""
    n = g.n
    if n > _DP_CAP:
        raise ResourceCapError(f"analyze size cap {_DP_CAP} exceeded ({n})")
    parts = g.bipartition()
    bipartite = parts is not None
    if n == 1:
        return HamiltonicityReport(True, True, True, True, {(0, 0): (0,)})
    full = (1 << n) - 1
    witnesses: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    exists = [[False] * n for _ in range(n)]
    for u in range(n):
        dp = _ends_dp(g, u)
        ends = int(dp[full])
        for v in range(n):
            if v != u and ends & (1 << v):
                exists[u][v] = True
                witnesses[(u, v)] = _dp_path(g, dp, u, v)
    ham_connected = all(exists[u][v] for u in range(n) for v in range(n) if u != v)
    has_cycle = n >= 3 and any(
        exists[u][v] for u in range(n) for v in g.adj[u] if u < v
    )
    laceable: Optional[bool] = None
    if bipartite:
        side0, side1 = parts
        laceable = all(exists[u][v] for u in side0 for v in side1)
    return HamiltonicityReport(has_cycle, ham_connected, bipartite, laceable, witnesses)


# ---------------------------------------------------------------------------
# Hamiltonian difference


def hamiltonian_difference(model: FiniteModel) -> int:
    """H(G, S_G) = max_{g != e} TS(e->g;G) - TS(e->e;G) on the Cayley graph."""
    return hamiltonian_difference_detail(model)[0]


def hamiltonian_difference_detail(model: FiniteModel) -> Tuple[int, int, int, List[int]]:
    """Returns (H, TS(e->e;G), argmax vertex, all TS(e->v;G) values)."""
    table = model.table
    if table.order < 2:
        raise ValueError("Hamiltonian difference needs |G| >= 2")
    if table.order > _DP_CAP:
        raise ResourceCapError(f"group order {table.order} exceeds cap {_DP_CAP}")
    graph = finite_cayley_graph(model)
    lengths = tsp.solve_all_ends(graph, table.identity, set(range(table.order)))
    closed = lengths[table.identity]
    best_v = max(
        (v for v in range(table.order) if v != table.identity),
        key=lambda v: (lengths[v], -v),
    )
    return lengths[best_v] - closed, closed, best_v, lengths


# ---------------------------------------------------------------------------
# spanning walks with few repeats (grids and small graphs)


def spanning_walk_min_repeats(
    g: FiniteGraph, s: int, t: int, max_repeats: int
) -> Optional[Tuple[int, ...]]:
    """Spanning walk s..t revisiting at most max_repeats vertex slots, with the
    fewest repeats possible; None if none exists within the budget.

    Budget 0 is a plain Hamiltonian-path search.  Pruning: walks that strand
    more unvisited components than the remaining repeat budget can bridge are
    cut, which keeps grid instances fast.
    """
    n = g.n
    for budget in range(max_repeats + 1):
        found = _spanning_walk_exact_repeats(g, s, t, budget)
        if found is not None:
            return found
    return None


def _bipartite_infeasible(g: FiniteGraph, s: int, t: int, budget: int) -> bool:
    """Parity prechecks: walks in bipartite graphs alternate sides, which
    forces both the total length parity and per-side coverage counts.

    Assumes exactly `budget` repeats; walks with fewer repeats are callers'
    smaller-budget iterations, so nothing feasible is lost."""
    parts = g.bipartition()
    if parts is None:
        return False
    side = [0] * g.n
    for v in parts[1]:
        side[v] = 1
    slots = g.n + budget
    if (slots - 1) % 2 != (side[s] ^ side[t]):
        return True
    c_start = (slots + 1) // 2
    c_other = slots // 2
    need_start = sum(1 for v in range(g.n) if side[v] == side[s])
    need_other = g.n - need_start
    return c_start < need_start or c_other < need_other


def _spanning_walk_exact_repeats(g: FiniteGraph, s: int, t: int, budget: int):
    n = g.n
    if _bipartite_infeasible(g, s, t, budget):
        return None
    visited = [False] * n
    visited[s] = True
    walk = [s]
    nodes = 0

    def components_exceed(limit: int) -> bool:
        # bridging between unvisited components costs one repeat per jump
        comp_seen = [False] * n
        comps = 0
        for v in range(n):
            if visited[v] or comp_seen[v]:
                continue
            comps += 1
            if comps > limit:
                return True
            stack = [v]
            comp_seen[v] = True
            while stack:
                x = stack.pop()
                for y in g.adj[x]:
                    if not visited[y] and not comp_seen[y]:
                        comp_seen[y] = True
                        stack.append(y)
        return False

    def dfs(cur: int, unvisited: int, repeats: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > _SEARCH_NODE_CAP:
            raise ResourceCapError("spanning-walk search node cap exceeded")
        if unvisited == 0 and cur == t:
            return True
        remaining_slots = (n + budget) - len(walk)
        if unvisited > remaining_slots or remaining_slots <= 0:
            return False
        if components_exceed(repeats + 1):
            return False
        fresh = [w for w in g.adj[cur] if not visited[w]]
        fresh.sort(key=lambda w: (sum(1 for z in g.adj[w] if not visited[z]), w))
        for w in fresh:
            visited[w] = True
            walk.append(w)
            if dfs(w, unvisited - 1, repeats):
                return True
            walk.pop()
            visited[w] = False
        if repeats > 0:
            for w in g.adj[cur]:
                if visited[w]:
                    walk.append(w)
                    if dfs(w, unvisited, repeats - 1):
                        return True
                    walk.pop()
        return False

    try:
        if dfs(s, n - 1, budget):
            return tuple(walk)
    except ResourceCapError:
        return None
    return None


# ---------------------------------------------------------------------------
# grid and cube spanning paths


def grid_spanning_path(
    m1: int, m2: int, s: Tuple[int, int], t: Tuple[int, int]
) -> Tuple[Tuple[int, int], ...]:
    """Spanning walk of Cube(m1, m2) from s to t of at most m1*m2 + 2 vertex
    slots; Hamiltonian whenever one exists.

    Coordinates are 1-based.  Small grids get an exhaustive repeat-minimal
    search.  Large grids first try a Hamiltonian path, then a Hamiltonian
    path into a neighbor of the endpoint (in both orientations), then a
    distance-2 tail; the grid Hamiltonian-path characterization guarantees a
    hit within the +2 bound.
    """
    if m1 < 2 or m2 < 2:
        raise ValueError("grid dimensions must be at least 2")
    g = _grid_graph(m1, m2)
    si, ti = _grid_index(m1, m2, s), _grid_index(m1, m2, t)
    if g.n <= 20:
        walk = spanning_walk_min_repeats(g, si, ti, max_repeats=2)
    else:
        walk = _large_grid_walk(g, si, ti)
    if walk is None:
        raise AssertionError("no spanning walk within two repeats; bound violated")
    return tuple(g.labels[v] for v in walk)


def _large_grid_walk(g: FiniteGraph, s: int, t: int) -> Optional[Tuple[int, ...]]:
    ham = _spanning_walk_exact_repeats(g, s, t, 0)
    if ham is not None:
        return ham
    for a, b, flip in ((s, t, False), (t, s, True)):
        for b2 in g.adj[b]:
            if b2 == a:
                continue
            ham = _spanning_walk_exact_repeats(g, a, b2, 0)
            if ham is not None:
                walk = ham + (b,)
                return tuple(reversed(walk)) if flip else walk
    dist_t = g.distances_from(t)
    dist_s = g.distances_from(s)
    for a, b, dist_b, flip in ((s, t, dist_t, False), (t, s, dist_s, True)):
        for u in sorted(v for v in range(g.n) if dist_b[v] == 2):
            ham = _spanning_walk_exact_repeats(g, a, u, 0)
            if ham is not None:
                mid = min(w for w in g.adj[u] if dist_b[w] == 1)
                walk = ham + (mid, b)
                return tuple(reversed(walk)) if flip else walk
    # both-ends repeat: s and t re-entered from adjacent Hamiltonian endpoints
    for u1 in g.adj[s]:
        for u2 in g.adj[t]:
            if u1 == u2:
                continue
            ham = _spanning_walk_exact_repeats(g, u1, u2, 0)
            if ham is not None:
                return (s,) + ham + (t,)
    return None


def _grid_graph(m1: int, m2: int) -> FiniteGraph:
    from .graphs import cube_graph

    return cube_graph([m1, m2])


def _grid_index(m1: int, m2: int, p: Tuple[int, int]) -> int:
    i, j = p
    if not (1 <= i <= m1 and 1 <= j <= m2):
        raise ValueError(f"vertex {p} outside Cube({m1},{m2})")
    return (i - 1) * m2 + (j - 1)


def _snake_order(m1: int, m2: int) -> List[Tuple[int, int]]:
    """Boustrophedon Hamiltonian path of Cube(m1, m2) starting at (1, 1)."""
    out = []
    for j in range(1, m2 + 1):
        row = range(1, m1 + 1) if j % 2 == 1 else range(m1, 0, -1)
        for i in row:
            out.append((i, j))
    return out


def cube_spanning_path(
    dims: Sequence[int], s: Tuple[int, ...], t: Tuple[int, ...]
) -> Tuple[Tuple[int, ...], ...]:
    """Spanning walk of Cube(dims) from s to t within |V| + 2 vertex slots.

    Trailing dimension pairs are folded along snake Hamiltonian paths onto one
    interval until a 2-dimensional grid remains; the grid walk is then lifted
    back through the folds.  Dimensions equal to 1 are dropped; a single
    surviving interval is rejected (the line (Z, {+-1}) is excluded).
    """
    dims = list(dims)
    if any(m < 1 for m in dims):
        raise ValueError("dims must be positive")
    if len(s) != len(dims) or len(t) != len(dims):
        raise ValueError("endpoint arity mismatch")
    for p in (s, t):
        if any(not 1 <= c <= m for c, m in zip(p, dims)):
            raise ValueError(f"vertex {p} outside Cube{tuple(dims)}")

    keep = [i for i, m in enumerate(dims) if m > 1]
    if len(keep) < 2:
        raise ValueError(
            "degenerate cube (a path graph); the line (Z,{+-1}) case is excluded"
        )
    small = [dims[i] for i in keep]
    s_small = tuple(s[i] for i in keep)
    t_small = tuple(t[i] for i in keep)

    walk_small = _cube_walk(small, s_small, t_small)

    def lift(p: Tuple[int, ...]) -> Tuple[int, ...]:
        full = [1] * len(dims)
        for c, i in zip(p, keep):
            full[i] = c
        return tuple(full)

    return tuple(lift(p) for p in walk_small)


def _cube_walk(dims: List[int], s: Tuple[int, ...], t: Tuple[int, ...]):
    if len(dims) == 2:
        return grid_spanning_path(dims[0], dims[1], s, t)
    m1, m2 = dims[-2], dims[-1]
    snake = _snake_order(m1, m2)
    pos = {p: idx + 1 for idx, p in enumerate(snake)}
    folded_dims = dims[:-2] + [m1 * m2]
    fold = lambda p: p[:-2] + (pos[p[-2:]],)
    walk = _cube_walk(folded_dims, fold(s), fold(t))
    return tuple(p[:-1] + snake[p[-1] - 1] for p in walk)


# ---------------------------------------------------------------------------
# cube of a graph: constructive Hamiltonian connectivity


def cube3_hamiltonian_path(g: FiniteGraph, u: int, v: int) -> Tuple[int, ...]:
    """Hamiltonian u-v path in the cube g^3, built along a spanning tree.

    Each recursion splits the tree at the first edge of the u-v path and
    joins the two sub-paths with a hop of tree distance at most 3.
    """
    if u == v:
        raise ValueError("cube3_hamiltonian_path needs distinct endpoints")
    if not g.is_connected():
        raise ValueError("graph must be connected")
    tree = _bfs_tree(g, min(u, v))
    path = _ham3(tree, frozenset(range(g.n)), u, v)
    assert sorted(path) == list(range(g.n))
    return tuple(path)


def _bfs_tree(g: FiniteGraph, root: int) -> List[List[int]]:
    seen = [False] * g.n
    seen[root] = True
    tree: List[List[int]] = [[] for _ in range(g.n)]
    frontier = [root]
    while frontier:
        nxt = []
        for x in frontier:
            for y in g.adj[x]:
                if not seen[y]:
                    seen[y] = True
                    tree[x].append(y)
                    tree[y].append(x)
                    nxt.append(y)
        frontier = nxt
    return tree


def _tree_path(tree: List[List[int]], comp: FrozenSet[int], a: int, b: int) -> List[int]:
    prev = {a: a}
    frontier = [a]
    while frontier:
        nxt = []
        for x in frontier:
            for y in tree[x]:
                if y in comp and y not in prev:
                    prev[y] = x
                    nxt.append(y)
        if b in prev:
            break
        frontier = nxt
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def _component(tree, comp: FrozenSet[int], seed: int, banned_edge) -> FrozenSet[int]:
    x0, y0 = banned_edge
    out = {seed}
    stack = [seed]
    while stack:
        x = stack.pop()
        for y in tree[x]:
            if y in comp and y not in out and {x, y} != {x0, y0}:
                out.add(y)
                stack.append(y)
    return frozenset(out)


def _ham3(tree, comp: FrozenSet[int], u: int, v: int) -> List[int]:
    if len(comp) == 1:
        return [u]
    if len(comp) == 2:
        return [u, v]
    path = _tree_path(tree, comp, u, v)
    x, y = path[0], path[1]
    A = _component(tree, comp, x, (x, y))
    B = _component(tree, comp, y, (x, y))
    if len(A) == 1:
        pa = [u]
    else:
        a_star = min(w for w in tree[u] if w in A)
        pa = _ham3(tree, A, u, a_star)
    if len(B) == 1:
        pb = [v]
    else:
        b_star = y if y != v else min(w for w in tree[v] if w in B)
        pb = _ham3(tree, B, b_star, v)
    return pa + pb


# ---------------------------------------------------------------------------
# Nash-Williams generator basis for infinite abelian groups


@dataclass(frozen=True)
class NashWilliamsBasis:
    """Relabeling of the generators: g = sum p_i a_i + sum q_j b_j uniquely,
    with 0 <= q_j < m_j.  `degenerate` marks the (Z, {+-1})-like line case."""

    a: Tuple[Tuple[int, ...], ...]
    b: Tuple[Tuple[int, ...], ...]
    m: Tuple[int, ...]
    degenerate: bool


def nash_williams_basis(model: AbelianModel) -> NashWilliamsBasis:
    """Relabel the generators so group elements decompose uniquely into free
    and bounded coordinates; validated empirically on a box.

    Non-degenerate labelings (usable as grid embeddings) are preferred; only
    the cyclically generated line admits none."""
    if model.rank < 1:
        raise ValueError("Nash-Williams basis needs an infinite abelian group")
    reps = _generator_classes(model)
    if len(reps) > 8:
        raise ResourceCapError("too many generator classes for basis search")
    r = model.rank
    candidates = []
    for a_combo in itertools.combinations(reps, r):
        rest = [g for g in reps if g not in a_combo]
        combo = _try_basis(model, list(a_combo), rest)
        if combo is not None:
            candidates.append(combo)
    if not candidates:
        raise RuntimeError("no valid Nash-Williams labeling found (internal error)")
    for cand in candidates:
        if not cand.degenerate:
            return cand
    return candidates[0]


def _generator_classes(model: AbelianModel) -> List[Tuple[int, ...]]:
    reps = []
    for g in model.gens.elements:
        rep = max(g, model.inv_payload(g))
        if rep not in reps:
            reps.append(rep)

    def key(v):
        lead = next((i for i, c in enumerate(v) if c != 0), len(v))
        return (lead, tuple(abs(c) for c in v), v)

    return sorted(reps, key=key)


def _try_basis(model: AbelianModel, a_list, b_list) -> Optional[NashWilliamsBasis]:
    dim = model.rank + len(model.moduli)
    relation_rows = []
    for j, mod in enumerate(model.moduli):
        row = [0] * dim
        row[model.rank + j] = mod
        relation_rows.append(row)

    ms: List[int] = []
    span = [list(v) for v in a_list] + relation_rows
    mod_bound = 1
    for mod in model.moduli:
        mod_bound *= mod
    bound = 64 * max(1, mod_bound)
    for b in b_list:
        basis = _hermite_basis([row[:] for row in span], dim)
        m = next(
            (m for m in range(1, bound + 1)
             if _in_lattice(basis, [m * c for c in b], dim)),
            None,
        )
        if m is None:
            return None
        ms.append(m)
        span.append(list(b))
    if not _validate_basis(model, a_list, b_list, ms):
        return None
    degenerate = model.rank == 1 and all(m == 1 for m in ms)
    return NashWilliamsBasis(tuple(a_list), tuple(b_list), tuple(ms), degenerate)


def _validate_basis(model: AbelianModel, a_list, b_list, ms) -> bool:
    """Empirical uniqueness and coverage of the representation on a box."""
    side = sum(ms) + 10
    P = 4 * side + 40
    image: Dict[Payload, Tuple] = {}
    q_ranges = [range(m) for m in ms]
    p_ranges = [range(-P, P + 1)] * len(a_list)
    count = 0
    for ps in itertools.product(*p_ranges):
        base = model.identity_payload()
        for p, a in zip(ps, a_list):
            base = model.mul_payload(base, tuple(p * c for c in a))
        for qs in itertools.product(*q_ranges):
            g = base
            for q, b in zip(qs, b_list):
                g = model.mul_payload(g, tuple(q * c for c in b))
            if g in image:
                return False
            image[g] = (ps, qs)
            count += 1
    for coords in itertools.product(range(-side, side + 1), repeat=model.rank):
        fin = [range(m) for m in model.moduli]
        for tail in itertools.product(*fin):
            g = model.normalize_payload(tuple(coords) + tuple(tail))
            if g not in image:
                return False
    return True


def nw_decompose(model: AbelianModel, basis: NashWilliamsBasis, g: Payload) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Coordinates (p, q) of g in the basis, by bounded search.

    Unique by the basis contract; bounded because coordinates grow at most
    linearly with the coefficients of g.
    """
    g = model.normalize_payload(g)
    scale = max((abs(c) for c in g), default=0) + sum(basis.m) + 4
    for radius in range(scale, 16 * scale + 2, scale):
        for qs in itertools.product(*[range(m) for m in basis.m]):
            target = g
            for q, b in zip(qs, basis.b):
                target = model.mul_payload(target, tuple(-q * c for c in b))
            ps = _solve_free_combo(model, basis.a, target, radius)
            if ps is not None:
                return ps, qs
    raise AssertionError("decomposition not found; invalid basis?")


def _solve_free_combo(model: AbelianModel, a_list, target, radius: int):
    k = len(a_list)
    for ps in itertools.product(range(-radius, radius + 1), repeat=k):
        g = model.identity_payload()
        for p, a in zip(ps, a_list):
            g = model.mul_payload(g, tuple(p * c for c in a))
        if g == target:
            return ps
    return None


# ---------------------------------------------------------------------------
# quasi-Hamiltonian certificates and refutations


@dataclass(frozen=True)
class QhWitness:
    n: int
    set_size: int
    elements: Tuple[str, ...]
    walks: Dict[str, Tuple[str, ...]] = field(repr=False)
    max_excess: int = 0


@dataclass(frozen=True)
class QhCertificate:
    strategy: str
    M: int
    witnesses: Tuple[QhWitness, ...]
    group_spec: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "qh_certificate",
                "group": self.group_spec,
                "strategy": self.strategy,
                "M": self.M,
                "witnesses": [
                    {
                        "n": w.n,
                        "set_size": w.set_size,
                        "elements": list(w.elements),
                        "walks": {k: list(v) for k, v in sorted(w.walks.items())},
                        "max_excess": w.max_excess,
                    }
                    for w in self.witnesses
                ],
            },
            indent=1,
            sort_keys=True,
        )


@dataclass(frozen=True)
class QhRefutation:
    """Excess table: spanning-walk edge lengths minus |F| on balls, growing."""

    strategy: str
    rows: Tuple[Tuple[int, int, int, int, int, int], ...]
    group_spec: dict = field(default_factory=dict)
    # rows: (n, |F|, ts_closed_edges, excess_closed, ts_min_edges, excess_min)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "qh_refutation",
                "group": self.group_spec,
                "strategy": self.strategy,
                "columns": ["n", "F_size", "ts_closed", "excess_closed", "ts_min", "excess_min"],
                "rows": [list(r) for r in self.rows],
            },
            indent=1,
            sort_keys=True,
        )


def qh_certificate(model: GroupModel, n_max: int, M: int = 2, strategy: str = "auto"):
    """Quasi-Hamiltonian certificate (witness sets + spanning walks with
    vertex-length at most |F| + M), or a refutation-at-scale excess table.

    Strategies: abelian-box (Nash-Williams box images + folded grid walks),
    ball-exact (exact TSP on each ball), cube (S u S^2 u S^3 Hamiltonian
    connectivity of cubed balls), refute (tree closed form on balls).
    """
    if strategy == "auto":
        if isinstance(model, FreeModel):
            strategy = "refute"
        elif isinstance(model, AbelianModel):
            basis = nash_williams_basis(model)
            strategy = "refute" if basis.degenerate else "abelian-box"
        else:
            strategy = "cube"
    if strategy == "abelian-box":
        return _qh_abelian_box(model, n_max, M)
    if strategy == "ball-exact":
        return _qh_ball_exact(model, n_max, M)
    if strategy == "cube":
        return _qh_cube(model, n_max, M)
    if strategy == "refute":
        return _qh_refute(model, n_max)
    raise ValueError(f"unsupported qh strategy {strategy!r}")


def _qh_abelian_box(model: AbelianModel, n_max: int, M: int) -> QhCertificate:
    if not isinstance(model, AbelianModel) or model.rank < 1:
        raise ValueError("abelian-box strategy needs an infinite abelian model")
    basis = nash_williams_basis(model)
    if basis.degenerate:
        raise ValueError("the line (Z,{+-1}) has no quasi-Hamiltonian sequence")
    witnesses = []
    for n in range(1, n_max + 1):
        ball = cayley_ball(model, n)
        coords = {p: nw_decompose(model, basis, p) for p in ball.elements}
        N = max(
            (abs(c) for (ps, _qs) in coords.values() for c in ps), default=0
        )
        dims = [2 * N + 1] * model.rank + [m for m in basis.m]
        origin = tuple([N + 1] * model.rank + [1] * len(basis.m))

        def to_coord(ps, qs):
            return tuple(p + N + 1 for p in ps) + tuple(q + 1 for q in qs)

        def to_payload(coord) -> Payload:
            g = model.identity_payload()
            for c, a in zip(coord[: model.rank], basis.a):
                g = model.mul_payload(g, tuple((c - N - 1) * k for k in a))
            for c, b in zip(coord[model.rank:], basis.b):
                g = model.mul_payload(g, tuple((c - 1) * k for k in b))
            return g

        box_coords = list(itertools.product(*[range(1, m + 1) for m in dims]))
        f_elements = [to_payload(c) for c in box_coords]
        f_set = set(f_elements)
        assert set(ball.elements) <= f_set, "ball not contained in witness box"
        walks: Dict[str, Tuple[str, ...]] = {}
        max_excess = 0
        for coord in box_coords:
            walk = cube_spanning_path(dims, origin, coord)
            payloads = [to_payload(c) for c in walk]
            _check_group_walk(model, payloads, f_set)
            excess = len(payloads) - len(f_elements)
            if excess > M:
                raise AssertionError("box walk exceeded claimed M")
            max_excess = max(max_excess, excess)
            walks[model.payload_str(to_payload(coord))] = tuple(
                model.payload_str(p) for p in payloads
            )
        witnesses.append(
            QhWitness(
                n,
                len(f_elements),
                tuple(sorted(model.payload_str(p) for p in f_elements)),
                walks,
                max_excess,
            )
        )
    return QhCertificate("abelian-box", M, tuple(witnesses), group_spec_of(model))


def _check_group_walk(model: GroupModel, payloads: Sequence[Payload], cover: Set[Payload]):
    gens = set(model.gens.elements)
    for a, b in zip(payloads, payloads[1:]):
        step = model.mul_payload(model.inv_payload(a), b)
        assert step in gens, "walk step is not a generator"
    assert cover <= set(payloads), "walk does not cover the witness set"
    assert payloads[0] == model.identity_payload()


def _qh_ball_exact(model: GroupModel, n_max: int, M: int) -> QhCertificate:
    witnesses = []
    for n in range(1, n_max + 1):
        ball = cayley_ball(model, n)
        g = ball.graph
        if g.n - 1 > tsp.MAX_REQUIRED:
            raise ResourceCapError("ball too large for exact TSP certification")
        walks: Dict[str, Tuple[str, ...]] = {}
        max_excess = 0
        for x in range(g.n):
            sol = tsp.solve_exact(tsp.TspInstance(g, 0, x, frozenset(range(g.n))))
            vertex_len = sol.length + 1
            excess = vertex_len - g.n
            if excess > M:
                raise AssertionError(
                    f"exact TS exceeds |F|+{M} at endpoint {g.labels[x]} (n={n})"
                )
            max_excess = max(max_excess, excess)
            walks[str(g.labels[x])] = tuple(str(g.labels[v]) for v in sol.walk)
        witnesses.append(
            QhWitness(n, g.n, tuple(str(l) for l in g.labels), walks, max_excess)
        )
    return QhCertificate("ball-exact", M, tuple(witnesses), group_spec_of(model))


def _qh_cube(model: GroupModel, n_max: int, M: int) -> QhCertificate:
    """Certificate for the enlarged generating set S u S^2 u S^3: the cubed
    ball is Hamiltonian-connected, so every endpoint needs at most one repeat."""
    witnesses = []
    for n in range(1, n_max + 1):
        ball = cayley_ball(model, 3 * n)
        g = ball.graph
        cubed = power_graph(g, 3)
        walks: Dict[str, Tuple[str, ...]] = {}
        max_excess = 0
        for x in range(g.n):
            if x == 0:
                z = cubed.adj[0][0]
                path = cube3_hamiltonian_path(g, z, 0)
                walk = (0,) + path
            else:
                walk = cube3_hamiltonian_path(g, 0, x)
            excess = len(walk) - g.n
            max_excess = max(max_excess, excess)
            if excess > M:
                raise AssertionError("cubed-ball walk exceeded claimed M")
            walks[str(g.labels[x])] = tuple(str(g.labels[v]) for v in walk)
        witnesses.append(
            QhWitness(n, g.n, tuple(str(l) for l in g.labels), walks, max_excess)
        )
    return QhCertificate("cube", M, tuple(witnesses), group_spec_of(model))


def _qh_refute(model: GroupModel, n_max: int) -> QhRefutation:
    """Tree bases: exact ball excesses grow, refuting the property at scale."""
    free = _as_free_tree(model)
    if free is None:
        raise ValueError("refute strategy applies to free groups and (Z,{+-1})")
    rows = []
    for n in range(1, n_max + 1):
        ball = cayley_ball(free, n)
        elems = list(ball.elements)
        size = len(elems)
        ts_closed = tsp.ts_tree((), (), elems, free)
        ts_min = min(ts_closed - free.length_payload(x) for x in elems)
        rows.append(
            (n, size, ts_closed, ts_closed - size, ts_min, ts_min - size)
        )
    return QhRefutation("refute", tuple(rows), group_spec_of(model))


def verify_qh_certificate(model: GroupModel, cert: QhCertificate) -> None:
    """Replay every walk in the certificate and re-check the defining bound.

    Steps must be single generators, except under the cube strategy where a
    step may be any word of length at most 3 (the enlarged set S u S^2 u S^3).
    """
    max_step = 3 if cert.strategy == "cube" else 1
    for wit in cert.witnesses:
        elems = {model.parse_payload(s) for s in wit.elements}
        assert model.identity_payload() in elems
        assert len(elems) == wit.set_size
        ball = cayley_ball(model, wit.n)
        assert set(ball.elements) <= elems, "witness set misses the ball"
        for endpoint, walk in wit.walks.items():
            payloads = [model.parse_payload(s) for s in walk]
            assert payloads[0] == model.identity_payload()
            assert payloads[-1] == model.parse_payload(endpoint)
            for a, b in zip(payloads, payloads[1:]):
                step = model.mul_payload(model.inv_payload(a), b)
                assert 1 <= model.length_payload(step) <= max_step, "bad walk step"
            assert elems <= set(payloads), "walk does not cover the set"
            assert len(payloads) <= wit.set_size + cert.M, "bound violated"


def _as_free_tree(model: GroupModel) -> Optional[FreeModel]:
    if isinstance(model, FreeModel):
        return model
    if isinstance(model, AbelianModel) and model.rank == 1 and not model.moduli:
        if set(model.gens.elements) == {(1,), (-1,)}:
            return FreeModel(1)
    return None
