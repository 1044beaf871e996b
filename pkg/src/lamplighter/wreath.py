"""The lamplighter layer: wreath-product elements A wr B, exact word length
via lamp costs plus a TSP term on the base Cayley graph, dead-end depth and
retreat-depth search, witness constructions, and the free-product dichotomy
verdicts.

A wreath state is (lamps, position): lamps is a sorted tuple of
(base payload, lamp payload) pairs storing only non-identity lamp values.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .errors import ResourceCapError
from .graphs import cayley_ball, cycle_graph, path_graph, product_graph
from .groups import (
    AbelianModel,
    FiniteModel,
    FreeModel,
    FreeProductModel,
    GroupModel,
    Payload,
)
from . import hamiltonian, tsp

WreathState = Tuple[Tuple[Tuple[Payload, Payload], ...], Payload]


@dataclass(frozen=True)
class MetricBackend:
    """Dispatch over the exactly solved regimes; `generic` is an upper bound."""

    strategy: str  # finite | tree | petal | box | generic
    exact: bool
    slack: int = 4


def auto_backend(model: "LamplighterModel") -> MetricBackend:
    base = model.base
    if isinstance(base, FiniteModel):
        return MetricBackend("finite", True)
    if isinstance(base, FreeModel):
        return MetricBackend("tree", True)
    if isinstance(base, FreeProductModel):
        return MetricBackend("petal", True)
    if isinstance(base, AbelianModel) and base.is_standard_gens():
        return MetricBackend("box", True)
    return MetricBackend("generic", False)


def backend_by_name(model: "LamplighterModel", name: str) -> MetricBackend:
    if name == "auto":
        return auto_backend(model)
    exact = name in ("finite", "tree", "petal", "box")
    return MetricBackend(name, exact)


class LamplighterModel:
    """A wreath product A wr B with the standard generating set S_A u S_B."""

    def __init__(self, lamps: GroupModel, base: GroupModel):
        self.lamps = lamps
        self.base = base
        self._lamp_len: Dict[Payload, int] = {}
        # pure memo keyed by (backend strategy, slack, position, support)
        self._ts_cache: Dict[tuple, int] = {}

    # -- states ------------------------------------------------------------
    def identity_state(self) -> WreathState:
        return ((), self.base.identity_payload())

    def state(self, lamps: Dict[Payload, Payload], position: Payload) -> WreathState:
        items = []
        e_a = self.lamps.identity_payload()
        for k, v in lamps.items():
            k = self.base.normalize_payload(k)
            v = self.lamps.normalize_payload(v)
            if v != e_a:
                items.append((k, v))
        return (tuple(sorted(items)), self.base.normalize_payload(position))

    def state_str(self, g: WreathState) -> str:
        lamps, pos = g
        body = "+".join(
            f"{self.lamps.payload_str(v)}@{self.base.payload_str(k)}" for k, v in lamps
        )
        return f"{body or '-'};{self.base.payload_str(pos)}"

    # -- group law ----------------------------------------------------------
    def multiply(self, g: WreathState, h: WreathState) -> WreathState:
        (f1, b1), (f2, b2) = g, h
        acc = dict(f1)
        e_a = self.lamps.identity_payload()
        for k, v in f2:
            k2 = self.base.mul_payload(b1, k)
            merged = self.lamps.mul_payload(acc.get(k2, e_a), v)
            if merged == e_a:
                acc.pop(k2, None)
            else:
                acc[k2] = merged
        return (tuple(sorted(acc.items())), self.base.mul_payload(b1, b2))

    def invert(self, g: WreathState) -> WreathState:
        lamps, b = g
        binv = self.base.inv_payload(b)
        acc = []
        for k, v in lamps:
            acc.append((self.base.mul_payload(binv, k), self.lamps.inv_payload(v)))
        return (tuple(sorted(acc)), binv)

    # -- generators and neighbors -------------------------------------------
    def generator_states(self) -> List[Tuple[str, WreathState]]:
        out = []
        e_b = self.base.identity_payload()
        for s in self.lamps.gens.elements:
            out.append((f"A:{self.lamps.payload_str(s)}", (((e_b, s),), e_b)))
        for s in self.base.gens.elements:
            out.append((f"B:{self.base.payload_str(s)}", ((), s)))
        return out

    def neighbors(self, g: WreathState) -> List[WreathState]:
        lamps, pos = g
        out: List[WreathState] = []
        seen = set()
        e_a = self.lamps.identity_payload()
        cur = dict(lamps)
        for s in self.lamps.gens.elements:
            v = self.lamps.mul_payload(cur.get(pos, e_a), s)
            items = dict(cur)
            if v == e_a:
                items.pop(pos, None)
            else:
                items[pos] = v
            st = (tuple(sorted(items.items())), pos)
            if st not in seen:
                seen.add(st)
                out.append(st)
        for s in self.base.gens.elements:
            st = (lamps, self.base.mul_payload(pos, s))
            if st not in seen:
                seen.add(st)
                out.append(st)
        return out


def wreath_multiply(model: LamplighterModel, g: WreathState, h: WreathState) -> WreathState:
    return model.multiply(g, h)


def neighbors(model: LamplighterModel, g: WreathState) -> List[WreathState]:
    return model.neighbors(g)


# ---------------------------------------------------------------------------
# word length


@dataclass(frozen=True)
class WordLength:
    value: int
    exact: bool


def word_length(model: LamplighterModel, g: WreathState, backend: MetricBackend) -> WordLength:
    """Lamp cost plus TS(e_B -> position; supp f) under the chosen backend."""
    lamps, pos = g
    cost = 0
    for _k, v in lamps:
        c = model._lamp_len.get(v)
        if c is None:
            c = model.lamps.length_payload(v)
            model._lamp_len[v] = c
        cost += c
    support = frozenset(k for k, _v in lamps)
    key = (backend.strategy, backend.slack, pos, support)
    ts = model._ts_cache.get(key)
    if ts is None:
        ts = _ts_term(model, pos, support, backend)
        model._ts_cache[key] = ts
    return WordLength(cost + ts, backend.exact)


def _ts_term(model: LamplighterModel, pos: Payload, support: FrozenSet[Payload], backend: MetricBackend) -> int:
    base = model.base
    if backend.strategy == "finite":
        return tsp.solve_exact(_finite_instance(model, pos, support)).length
    if backend.strategy == "tree":
        return tsp.ts_tree((), pos, sorted(support), base)
    if backend.strategy == "petal":
        return tsp.ts_free_product(base, (), pos, sorted(support))
    if backend.strategy == "box":
        return _box_ts(base, pos, support)
    if backend.strategy == "generic":
        return _generic_ball_ts(base, pos, support, backend.slack)
    raise ValueError(f"unknown backend {backend.strategy!r}")


def _finite_instance(model: LamplighterModel, pos: Payload, support: FrozenSet[Payload]) -> tsp.TspInstance:
    """Whole-Cayley-graph instance for finite bases (walks cannot leave it)."""
    base = model.base
    if not isinstance(base, FiniteModel):
        raise ValueError("finite backend needs a finite base group")
    graph = getattr(model, "_finite_graph", None)
    if graph is None:
        from .graphs import finite_cayley_graph

        graph = finite_cayley_graph(base)
        model._finite_graph = graph
    return tsp.TspInstance(graph, base.table.identity, pos, frozenset(support))


def _box_instance(base: AbelianModel, pos: Payload, support: FrozenSet[Payload]):
    """Bounding-box TSP instance plus the vertex -> group payload table.

    Sound for standard basis generators: clamping the free coordinates of any
    walk into the box is 1-Lipschitz and fixes endpoints and support, so the
    box-restricted optimum equals the unrestricted one.
    """
    if not isinstance(base, AbelianModel) or not base.is_standard_gens():
        raise ValueError("box backend needs an abelian base with standard generators")
    pts = set(support) | {base.identity_payload(), pos}
    r = base.rank
    lows = [min(p[i] for p in pts) for i in range(r)]
    highs = [max(p[i] for p in pts) for i in range(r)]
    axes = []
    for i in range(r):
        axes.append(path_graph(highs[i] - lows[i] + 1))
    for m in base.moduli:
        axes.append(cycle_graph(m) if m >= 3 else path_graph(m))
    graph = axes[0]
    for ax in axes[1:]:
        graph = product_graph(graph, ax)

    sizes = [h - l + 1 for l, h in zip(lows, highs)] + list(base.moduli)

    def vid(p: Payload) -> int:
        coords = [p[i] - lows[i] for i in range(r)] + [
            p[r + j] for j in range(len(base.moduli))
        ]
        out = 0
        for c, s in zip(coords, sizes):
            out = out * s + c
        return out

    payload_of = {}
    for p in itertools.product(*[range(l, h + 1) for l, h in zip(lows, highs)],
                               *[range(m) for m in base.moduli]):
        payload_of[vid(tuple(p))] = base.normalize_payload(tuple(p))
    inst = tsp.TspInstance(
        graph, vid(base.identity_payload()), vid(pos), frozenset(vid(p) for p in support)
    )
    return inst, payload_of


def _box_ts(base: AbelianModel, pos: Payload, support: FrozenSet[Payload]) -> int:
    inst, _ = _box_instance(base, pos, support)
    return tsp.solve_exact(inst).length


def ts_walk(model: LamplighterModel, pos: Payload, support: Sequence[Payload], backend: MetricBackend) -> List[Payload]:
    """A TS-optimal (or, for generic, ball-optimal) base walk e -> pos
    covering the support, as group payloads."""
    base = model.base
    support = [base.normalize_payload(p) for p in support]
    if backend.strategy == "tree":
        return tsp.ts_tree_walk((), pos, support, base)[1]
    if backend.strategy == "petal":
        return tsp.ts_free_product_walk(base, (), pos, support)[1]
    if backend.strategy == "finite":
        inst = _finite_instance(model, pos, frozenset(support))
        return list(tsp.solve_exact(inst).walk)
    if backend.strategy == "box":
        inst, payload_of = _box_instance(base, pos, frozenset(support))
        return [payload_of[v] for v in tsp.solve_exact(inst).walk]
    ball = cayley_ball(base, _generic_radius(base, pos, support, backend.slack))
    inst = tsp.TspInstance(
        ball.graph,
        ball.vertex_of(base.identity_payload()),
        ball.vertex_of(pos),
        frozenset(ball.vertex_of(p) for p in support),
    )
    return [ball.element_of(v) for v in tsp.solve_exact(inst).walk]


def _generic_radius(base: GroupModel, pos: Payload, support, slack: int) -> int:
    return max(
        [base.length_payload(pos)] + [base.length_payload(p) for p in support]
    ) + slack


def _generic_ball_ts(base: GroupModel, pos: Payload, support: FrozenSet[Payload], slack: int) -> int:
    """Upper bound: exact TSP restricted to a slack-padded ball."""
    radius = _generic_radius(base, pos, support, slack)
    ball = cayley_ball(base, radius)
    inst = tsp.TspInstance(
        ball.graph,
        ball.vertex_of(base.identity_payload()),
        ball.vertex_of(pos),
        frozenset(ball.vertex_of(p) for p in support),
    )
    return tsp.solve_exact(inst).length


# ---------------------------------------------------------------------------
# dead ends, depth, retreat depth


@dataclass(frozen=True)
class DepthReport:
    element: WreathState
    word_length: int
    depth: int
    depth_exact: bool  # False: depth is only known to be >= the stated value
    witness: Tuple[str, ...] = ()
    retreat_depth: Optional[int] = None
    retreat_exact: bool = True


def _require_exact(backend: MetricBackend) -> None:
    if not backend.exact:
        raise ValueError("depth analysis requires an exact metric backend")


def is_dead_end(model: LamplighterModel, g: WreathState, backend: MetricBackend) -> bool:
    """True iff no single generator extends g to a longer element."""
    _require_exact(backend)
    L = word_length(model, g, backend).value
    return all(
        word_length(model, h, backend).value <= L for h in model.neighbors(g)
    )


def depth(model: LamplighterModel, g: WreathState, k_max: int, backend: MetricBackend) -> DepthReport:
    """Largest n <= k_max with ||gh|| <= ||g|| for every ||h|| <= n, by BFS
    over multiplier words with normal-form dedup."""
    _require_exact(backend)
    L = word_length(model, g, backend).value
    seen: Set[WreathState] = {g}
    frontier: List[Tuple[WreathState, Tuple[str, ...]]] = [(g, ())]
    gen_list = model.generator_states()
    for n in range(1, k_max + 1):
        nxt: List[Tuple[WreathState, Tuple[str, ...]]] = []
        for state, word in frontier:
            for label, gen_state in gen_list:
                h = model.multiply(state, gen_state)
                if h in seen:
                    continue
                seen.add(h)
                if word_length(model, h, backend).value > L:
                    return DepthReport(g, L, n - 1, True, word + (label,))
                nxt.append((h, word + (label,)))
        frontier = nxt
    return DepthReport(g, L, k_max, False)


def retreat_depth(
    model: LamplighterModel,
    g: WreathState,
    k_max: int,
    backend: MetricBackend,
    frontier_cap: int = 500_000,
) -> Tuple[int, bool]:
    """Minimal k such that the sphere ||g||+1 is reachable from g through
    elements of word length >= ||g|| - k.  Returns (k_max + 1, False) when
    every k <= k_max fails."""
    _require_exact(backend)
    if not is_dead_end(model, g, backend):
        raise ValueError("retreat depth is defined for dead ends only")
    L = word_length(model, g, backend).value
    for k in range(0, k_max + 1):
        seen: Set[WreathState] = {g}
        frontier = [g]
        visited = 1
        while frontier:
            nxt = []
            for state in frontier:
                for h in model.neighbors(state):
                    if h in seen:
                        continue
                    lh = word_length(model, h, backend).value
                    if lh == L + 1:
                        return k, True
                    if lh >= L - k:
                        seen.add(h)
                        nxt.append(h)
                        visited += 1
                        if visited > frontier_cap:
                            raise ResourceCapError(
                                f"retreat search cap exceeded; retreat depth >= {k}"
                            )
            frontier = nxt
    return k_max + 1, False


# ---------------------------------------------------------------------------
# witnesses


def deep_lamp_element(lamps: GroupModel) -> Payload:
    """A word-length-maximizing lamp value (infinite depth in a finite group);
    ties broken by element index."""
    if not isinstance(lamps, FiniteModel):
        raise ValueError("designated deep element needs a finite lamps group")
    order = lamps.table.order
    return max(range(order), key=lambda i: (lamps.length_payload(i), -i))


def cleary_taback_witness(
    model: LamplighterModel, n: int, witness_set: Optional[Sequence[Payload]] = None
) -> WreathState:
    """(f, e) with f equal to the deep lamp element on a ball (or given set)."""
    a = deep_lamp_element(model.lamps)
    if witness_set is None:
        ball = cayley_ball(model.base, n)
        keys = list(ball.elements)
    else:
        keys = [model.base.normalize_payload(p) for p in witness_set]
    return model.state({k: a for k in keys}, model.base.identity_payload())


# ---------------------------------------------------------------------------
# Theorem-B verdicts over free products


@dataclass(frozen=True)
class VerdictReport:
    h_first: int
    h_second: int
    total: int
    uniformly_bounded: bool


def theorem_b_verdict(H: FiniteModel, K: FiniteModel) -> VerdictReport:
    """Uniformly bounded depth iff the Hamiltonian differences sum to >= 1."""
    h1 = hamiltonian.hamiltonian_difference(H)
    h2 = hamiltonian.hamiltonian_difference(K)
    return VerdictReport(h1, h2, h1 + h2, h1 + h2 >= 1)


def bounded_depth_constant(H: FiniteModel, K: FiniteModel) -> int:
    """Uniform depth bound for a bounded-verdict lamplighter over H * K.

    When some lamp within base distance 2(|H|+|K|) is unlit, lighting it and
    returning takes at most 4(|H|+|K|)+1 generators; the all-lit case needs
    at most 2|H|+|K| moves.  Valid only when theorem_b_verdict says bounded.
    """
    oH, oK = H.table.order, K.table.order
    return max(4 * (oH + oK) + 1, 2 * oH + oK)


def classify_abelian_free_product(H: FiniteModel, K: FiniteModel) -> Tuple[str, bool]:
    """Case label of the abelian free-product classification plus verdict
    (True = uniformly bounded).  Dispatch is by graph shape; it must agree
    with theorem_b_verdict on every abelian input."""
    from .graphs import finite_cayley_graph

    for M in (H, K):
        if not M.table.is_abelian():
            raise ValueError("classification needs abelian factors")
    oH, oK = H.table.order, K.table.order
    if oH == 1 or oK == 1:
        return "1", False
    gH = finite_cayley_graph(H)
    gK = finite_cayley_graph(K)
    if oH <= 3 or oK <= 3:
        other = gK if oH <= 3 else gH
        if other.is_cycle_graph() and other.n >= 8:
            return "2a", True
        return "2b", False
    cH, cK = gH.is_cycle_graph(), gK.is_cycle_graph()
    if not cH and not cK:
        return "3", False
    if cH:
        prefix, cyc, other, other_n = "4", gH, gK, oK
    else:
        prefix, cyc, other, other_n = "5", gK, gH, oH
    if cyc.n in (4, 5):
        bounded = other.is_cycle_graph() and other_n >= 6
        return prefix + "a", bounded
    if cyc.n in (6, 7):
        bounded = other.is_cycle_graph() or other.bipartition() is not None
        return prefix + "b", bounded
    return prefix + "c", True


# ---------------------------------------------------------------------------
# depth profiles


@dataclass(frozen=True)
class ProfileRow:
    element_id: str
    word_length: int
    depth: int
    depth_exact: bool


@dataclass(frozen=True)
class DepthProfile:
    radius: int
    k_max: int
    rows: Tuple[ProfileRow, ...]
    complete: bool

    def max_depth_per_shell(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for row in self.rows:
            out[row.word_length] = max(out.get(row.word_length, -1), row.depth)
        return dict(sorted(out.items()))

    def max_depth(self) -> int:
        return max(row.depth for row in self.rows)


def _frontier_cap() -> int:
    return int(os.environ.get("LAMPLIGHTER_CAP", 2_000_000))


def enumerate_ball(
    model: LamplighterModel, radius: int, cap: Optional[int] = None, partial_ok: bool = False
) -> Tuple[Dict[WreathState, int], bool]:
    """All wreath elements of word length <= radius with their BFS distances.

    Returns (distances, complete).  When the cap is hit, either raises or,
    with partial_ok, stops after the last fully enumerated shell."""
    cap = _frontier_cap() if cap is None else cap
    e = model.identity_state()
    dist: Dict[WreathState, int] = {e: 0}
    frontier = [e]
    for d in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for h in model.neighbors(g):
                if h not in dist:
                    dist[h] = d
                    nxt.append(h)
        if len(dist) > cap:
            if not partial_ok:
                raise ResourceCapError(f"wreath ball cap {cap} exceeded")
            for h in nxt:
                del dist[h]
            return dist, False
        frontier = nxt
    return dist, True


def depth_profile(
    model: LamplighterModel,
    radius: int,
    k_max: int,
    backend: Optional[MetricBackend] = None,
    cap: Optional[int] = None,
    partial_ok: bool = False,
) -> DepthProfile:
    """Depth of every element of word length <= radius.

    Elements with a strictly longer neighbor inside the enumerated ball are
    depth 0 by table lookup; only dead-end candidates trigger a search.
    """
    backend = backend or auto_backend(model)
    _require_exact(backend)
    dist, complete = enumerate_ball(model, radius, cap=cap, partial_ok=partial_ok)
    reached = max(dist.values(), default=0)
    rows: List[ProfileRow] = []
    for g, L in dist.items():
        fast_zero = False
        if L < reached:
            for h in model.neighbors(g):
                if dist.get(h, -1) > L:
                    fast_zero = True
                    break
        if fast_zero:
            rows.append(ProfileRow(model.state_str(g), L, 0, True))
            continue
        rep = depth(model, g, k_max, backend)
        assert rep.word_length == L, "formula disagrees with BFS distance"
        rows.append(ProfileRow(model.state_str(g), L, rep.depth, rep.depth_exact))
    rows.sort(key=lambda r: (r.word_length, r.element_id))
    return DepthProfile(radius, k_max, tuple(rows), complete)
