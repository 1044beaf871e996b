"""Computable group models: finite tables, f.g. abelian groups, free groups,
and free products of two finite groups, with canonical normal forms.

Element payloads are plain hashable tuples/ints; `GroupElement` is a thin
wrapper tying a payload to its model.  All models are immutable after
construction and all operations are pure, so values can be shared freely.

Payload encodings
-----------------
- finite:       element index into the multiplication table
- abelian:      integer vector of length rank+len(moduli), residues reduced
- free:         reduced word as a tuple of nonzero signed letter numbers
- free product: alternating tuple of (factor, index) letters, no identities
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ResourceCapError

Payload = object  # per-variant encoding, always hashable and orderable


# ---------------------------------------------------------------------------
# finite multiplication tables


@dataclass(frozen=True)
class FiniteGroupTable:
    """A finite group given by its full multiplication table."""

    order: int
    mul: Tuple[Tuple[int, ...], ...]
    identity: int
    inv: Tuple[int, ...]
    name: str = "G"
    elem_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.elem_names:
            names = tuple("e" if i == self.identity else f"g{i}" for i in range(self.order))
            object.__setattr__(self, "elem_names", names)
        self.validate()

    def validate(self) -> None:
        n = self.order
        if n < 1 or len(self.mul) != n or any(len(row) != n for row in self.mul):
            raise ValueError("malformed multiplication table")
        for row in self.mul:
            if sorted(row) != list(range(n)):
                raise ValueError("mul is not a Latin square (row)")
        for c in range(n):
            if sorted(self.mul[r][c] for r in range(n)) != list(range(n)):
                raise ValueError("mul is not a Latin square (column)")
        e = self.identity
        for x in range(n):
            if self.mul[e][x] != x or self.mul[x][e] != x:
                raise ValueError("identity law fails")
            if self.mul[x][self.inv[x]] != e:
                raise ValueError("inverse law fails")
        triples = (
            itertools.product(range(n), repeat=3)
            if n <= 64
            else itertools.islice(
                zip(
                    itertools.cycle(range(n)),
                    itertools.cycle(range(0, n, 3)),
                    itertools.cycle(range(0, n, 7)),
                ),
                4096,
            )
        )
        for a, b, c in triples:
            if self.mul[self.mul[a][b]][c] != self.mul[a][self.mul[b][c]]:
                raise ValueError("associativity fails")

    def is_abelian(self) -> bool:
        return all(
            self.mul[a][b] == self.mul[b][a]
            for a in range(self.order)
            for b in range(a + 1, self.order)
        )


def cyclic_table(n: int, letter: str = "b") -> FiniteGroupTable:
    """Multiplication table of Z/nZ with elements named e, b, b2, ..."""
    if n < 1:
        raise ValueError("order must be positive")
    mul = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    inv = tuple((-i) % n for i in range(n))
    names = tuple("e" if i == 0 else (letter if i == 1 else f"{letter}{i}") for i in range(n))
    return FiniteGroupTable(n, mul, 0, inv, name=f"Z/{n}Z", elem_names=names)


def direct_product_table(t1: FiniteGroupTable, t2: FiniteGroupTable) -> FiniteGroupTable:
    """Table of the direct product t1 x t2, index (i, j) -> i*|t2| + j."""
    n1, n2 = t1.order, t2.order
    n = n1 * n2

    def idx(i: int, j: int) -> int:
        return i * n2 + j

    mul = tuple(
        tuple(idx(t1.mul[a1][b1], t2.mul[a2][b2]) for b1 in range(n1) for b2 in range(n2))
        for a1 in range(n1)
        for a2 in range(n2)
    )
    inv = tuple(idx(t1.inv[i], t2.inv[j]) for i in range(n1) for j in range(n2))
    names = tuple(
        f"({t1.elem_names[i]},{t2.elem_names[j]})" for i in range(n1) for j in range(n2)
    )
    return FiniteGroupTable(n, mul, idx(t1.identity, t2.identity), inv,
                            name=f"{t1.name}x{t2.name}", elem_names=names)


def abelian_table(moduli: Sequence[int]) -> FiniteGroupTable:
    """Table of the finite abelian group Z/m1 x ... x Z/mk."""
    if not moduli:
        raise ValueError("need at least one modulus")
    table = cyclic_table(moduli[0])
    for m in moduli[1:]:
        table = direct_product_table(table, cyclic_table(m))
    return table


# ---------------------------------------------------------------------------
# generating sets


@dataclass(frozen=True)
class GeneratingSet:
    """Symmetrized generating set; `elements` excludes the identity."""

    elements: Tuple[Payload, ...]
    symmetric: bool = True


# ---------------------------------------------------------------------------
# group models


class GroupModel:
    """Base for the four group variants.  Instances compare by identity."""

    variant: str = "?"
    gens: GeneratingSet

    # payload-level group operations -------------------------------------
    def identity_payload(self) -> Payload:
        raise NotImplementedError

    def mul_payload(self, a: Payload, b: Payload) -> Payload:
        raise NotImplementedError

    def inv_payload(self, a: Payload) -> Payload:
        raise NotImplementedError

    def normalize_payload(self, a: Payload) -> Payload:
        return a

    def length_payload(self, a: Payload) -> int:
        raise NotImplementedError

    def payload_str(self, a: Payload) -> str:
        raise NotImplementedError

    def parse_payload(self, s: str) -> Payload:
        raise NotImplementedError

    # element-level conveniences ------------------------------------------
    @property
    def identity(self) -> "GroupElement":
        return GroupElement(self, self.identity_payload())

    def element(self, payload: Payload) -> "GroupElement":
        return GroupElement(self, self.normalize_payload(payload))

    def generators(self) -> List["GroupElement"]:
        return [GroupElement(self, p) for p in self.gens.elements]


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A group element in normal form; equality requires the same model."""

    model: GroupModel
    payload: Payload

    def __post_init__(self):
        object.__setattr__(self, "payload", self.model.normalize_payload(self.payload))

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and self.model is other.model
            and self.payload == other.payload
        )

    def __hash__(self):
        return hash((id(self.model), self.payload))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return invert(self)

    def __repr__(self):
        return f"<{self.model.payload_str(self.payload)}>"


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    """Product ab in normal form; both factors must share one model."""
    if a.model is not b.model:
        raise ValueError("cannot multiply elements of different group models")
    return GroupElement(a.model, a.model.mul_payload(a.payload, b.payload))


def invert(a: GroupElement) -> GroupElement:
    return GroupElement(a.model, a.model.inv_payload(a.payload))


def word_length_in_group(g: GroupElement) -> int:
    """Word length ||g||_S in the Cayley graph of g's model."""
    return g.model.length_payload(g.payload)


# ---------------------------------------------------------------------------
# finite model


class FiniteModel(GroupModel):
    variant = "finite"

    def __init__(self, table: FiniteGroupTable, gen_indices: Sequence[int]):
        gens = _symmetrize_finite(table, gen_indices)
        if not _finite_generates(table, gens):
            raise ValueError(f"{sorted(set(gen_indices))} does not generate {table.name}")
        self.table = table
        self.gens = GeneratingSet(tuple(gens))
        self._dist: Optional[Dict[int, int]] = None

    def identity_payload(self) -> int:
        return self.table.identity

    def mul_payload(self, a: int, b: int) -> int:
        return self.table.mul[a][b]

    def inv_payload(self, a: int) -> int:
        return self.table.inv[a]

    def normalize_payload(self, a: int) -> int:
        if not 0 <= a < self.table.order:
            raise ValueError("element index out of range")
        return a

    def length_payload(self, a: int) -> int:
        if self._dist is None:
            self._dist = _bfs_lengths_finite(self.table, self.gens.elements)
        return self._dist[a]

    def payload_str(self, a: int) -> str:
        return self.table.elem_names[a]

    def parse_payload(self, s: str) -> int:
        try:
            return self.table.elem_names.index(s)
        except ValueError:
            return int(s)


def _symmetrize_finite(table: FiniteGroupTable, gen_indices: Sequence[int]) -> List[int]:
    seen: List[int] = []
    for g in gen_indices:
        g = int(g)
        if not 0 <= g < table.order:
            raise ValueError("generator index out of range")
        for h in (g, table.inv[g]):
            if h == table.identity:
                raise ValueError("identity is not allowed as a generator")
            if h not in seen:
                seen.append(h)
    return seen


def _finite_generates(table: FiniteGroupTable, gens: Sequence[int]) -> bool:
    reached = {table.identity}
    frontier = [table.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = table.mul[x][s]
                if y not in reached:
                    reached.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(reached) == table.order


def _bfs_lengths_finite(table: FiniteGroupTable, gens: Sequence[int]) -> Dict[int, int]:
    dist = {table.identity: 0}
    frontier = [table.identity]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for x in frontier:
            for s in gens:
                y = table.mul[x][s]
                if y not in dist:
                    dist[y] = d
                    nxt.append(y)
        frontier = nxt
    return dist


def make_cyclic(n: int, gen_residues: Sequence[int], letter: str = "b") -> FiniteModel:
    """Z/nZ with the given generating residues (symmetrized automatically)."""
    if n < 1:
        raise ValueError("n must be positive")
    table = cyclic_table(n, letter=letter)
    gens = [r % n for r in gen_residues]
    if any(r == 0 for r in gens):
        raise ValueError("generators must be nonzero mod n")
    return FiniteModel(table, gens)


# ---------------------------------------------------------------------------
# abelian model


class AbelianModel(GroupModel):
    variant = "abelian"

    def __init__(self, rank: int, moduli: Sequence[int], gen_vectors: Sequence[Sequence[int]]):
        if rank < 0 or any(m < 1 for m in moduli):
            raise ValueError("bad rank or moduli")
        if rank + len(moduli) < 1:
            raise ValueError("group must have at least one coordinate")
        self.rank = rank
        self.moduli = tuple(int(m) for m in moduli)
        dim = rank + len(self.moduli)
        vecs = []
        for v in gen_vectors:
            v = tuple(int(c) for c in v)
            if len(v) != dim:
                raise ValueError("generator vector has wrong length")
            vecs.append(self._reduce(v))
        gens: List[Tuple[int, ...]] = []
        for v in vecs:
            for w in (v, self._neg(v)):
                if all(c == 0 for c in w):
                    raise ValueError("identity is not allowed as a generator")
                if w not in gens:
                    gens.append(w)
        witness = _abelian_nongeneration_witness(self.rank, self.moduli, vecs)
        if witness is not None:
            raise ValueError(
                f"generators do not generate: coset of {witness} is not reached"
            )
        self.gens = GeneratingSet(tuple(gens))

    def _reduce(self, v: Sequence[int]) -> Tuple[int, ...]:
        r = self.rank
        return tuple(v[:r]) + tuple(c % m for c, m in zip(v[r:], self.moduli))

    def _neg(self, v: Sequence[int]) -> Tuple[int, ...]:
        return self._reduce(tuple(-c for c in v))

    def identity_payload(self) -> Tuple[int, ...]:
        return (0,) * (self.rank + len(self.moduli))

    def mul_payload(self, a, b) -> Tuple[int, ...]:
        return self._reduce(tuple(x + y for x, y in zip(a, b)))

    def inv_payload(self, a) -> Tuple[int, ...]:
        return self._neg(a)

    def normalize_payload(self, a) -> Tuple[int, ...]:
        return self._reduce(tuple(int(c) for c in a))

    def is_standard_gens(self) -> bool:
        """True when the generators are exactly the +-unit vectors."""
        dim = self.rank + len(self.moduli)
        units = set()
        for i in range(dim):
            u = [0] * dim
            u[i] = 1
            units.add(self._reduce(tuple(u)))
            units.add(self._neg(tuple(u)))
        return set(self.gens.elements) == units

    def length_payload(self, a) -> int:
        if self.is_standard_gens():
            r = self.rank
            free = sum(abs(c) for c in a[:r])
            fin = sum(min(q, m - q) for q, m in zip(a[r:], self.moduli))
            return free + fin
        return _bfs_length_infinite(self, a)

    def payload_str(self, a) -> str:
        r = self.rank
        head = ",".join(str(c) for c in a[:r])
        tail = ",".join(str(c) for c in a[r:])
        if not self.moduli:
            return head or "0"
        if r == 0:
            return ";" + tail
        return f"{head};{tail}"

    def parse_payload(self, s: str) -> Tuple[int, ...]:
        if ";" in s:
            head, tail = s.split(";")
        else:
            head, tail = s, ""
        parts = [int(c) for c in head.split(",") if c.strip() != ""]
        parts += [int(c) for c in tail.split(",") if c.strip() != ""]
        return self.normalize_payload(tuple(parts))


def _abelian_nongeneration_witness(rank, moduli, vecs) -> Optional[Tuple[int, ...]]:
    """Return a coset witness if the vectors fail to generate, else None.

    The subgroup generated equals Z^{rank} x prod Z/m_j iff the lattice
    spanned by the vectors plus the relation rows m_j * e_{rank+j} is all of
    Z^dim, which is checked by Hermite-style row reduction.
    """
    dim = rank + len(moduli)
    rows = [list(v) for v in vecs]
    for j, m in enumerate(moduli):
        row = [0] * dim
        row[rank + j] = m
        rows.append(row)
    basis = _hermite_basis(rows, dim)
    for c in range(dim):
        unit = [0] * dim
        unit[c] = 1
        if not _in_lattice(basis, unit, dim):
            return tuple(unit)
    return None


def _hermite_basis(rows: List[List[int]], dim: int) -> List[List[int]]:
    """Row-echelon integer basis (Hermite style) of the lattice spanned by rows."""
    rows = [r[:] for r in rows if any(r)]
    basis: List[List[int]] = []
    col = 0
    while col < dim and rows:
        pivots = [r for r in rows if r[col] != 0]
        if not pivots:
            col += 1
            continue
        while True:
            pivots.sort(key=lambda r: abs(r[col]))
            p = pivots[0]
            done = True
            for r in pivots[1:]:
                q = r[col] // p[col]
                if q:
                    for k in range(dim):
                        r[k] -= q * p[k]
                if r[col] != 0:
                    done = False
            pivots = [p] + [r for r in pivots[1:] if r[col] != 0]
            if done or len(pivots) == 1:
                break
        if p[col] < 0:
            p = [-x for x in p]
        basis.append(p)
        rows = [r for r in rows if r is not p and (any(r))]
        for r in rows:
            if r[col] != 0:
                q = r[col] // p[col]
                for k in range(dim):
                    r[k] -= q * p[k]
        rows = [r for r in rows if any(r)]
        col += 1
    return basis


def _in_lattice(basis: List[List[int]], v: Sequence[int], dim: int) -> bool:
    v = list(v)
    for row in basis:
        lead = next((c for c in range(dim) if row[c] != 0), None)
        if lead is None:
            continue
        if v[lead] % row[lead] == 0:
            q = v[lead] // row[lead]
            for k in range(dim):
                v[k] -= q * row[k]
    return not any(v)


def _bfs_length_infinite(model: GroupModel, target: Payload, cap: int = 2_000_000) -> int:
    """Graph distance from the identity by layered BFS over payloads."""
    target = model.normalize_payload(target)
    e = model.identity_payload()
    if target == e:
        return 0
    dist = {e: 0}
    frontier = [e]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for x in frontier:
            for s in model.gens.elements:
                y = model.mul_payload(x, s)
                if y not in dist:
                    if y == target:
                        return d
                    dist[y] = d
                    nxt.append(y)
        if len(dist) > cap:
            raise ResourceCapError(f"BFS ball exceeded cap {cap} while measuring length")
        frontier = nxt
    raise ResourceCapError("target not reached; generators do not generate?")


def make_abelian(rank: int, moduli: Sequence[int], gen_vectors: Sequence[Sequence[int]]) -> AbelianModel:
    """Z^rank x prod Z/m_j with the given generating vectors (symmetrized)."""
    return AbelianModel(rank, moduli, gen_vectors)


# ---------------------------------------------------------------------------
# free model


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class FreeModel(GroupModel):
    variant = "free"

    def __init__(self, rank: int, letters: str = _LETTERS):
        if not 1 <= rank <= 26 or len(letters) < rank:
            raise ValueError("free rank must be in 1..26 with enough letters")
        self.rank = rank
        self.letters = letters[:rank] if rank < len(letters) else letters
        gens = []
        for i in range(1, rank + 1):
            gens.append((i,))
            gens.append((-i,))
        self.gens = GeneratingSet(tuple(gens))

    def identity_payload(self) -> Tuple[int, ...]:
        return ()

    def mul_payload(self, a, b) -> Tuple[int, ...]:
        out = list(a)
        for x in b:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def inv_payload(self, a) -> Tuple[int, ...]:
        return tuple(-x for x in reversed(a))

    def normalize_payload(self, a) -> Tuple[int, ...]:
        out: List[int] = []
        for x in a:
            x = int(x)
            if x == 0 or abs(x) > self.rank:
                raise ValueError("letter out of range")
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def length_payload(self, a) -> int:
        return len(a)

    def payload_str(self, a) -> str:
        if not a:
            return "e"
        return "".join(
            self.letters[x - 1] if x > 0 else self.letters[-x - 1].upper() for x in a
        )

    def parse_payload(self, s: str) -> Tuple[int, ...]:
        if s == "e":
            return ()
        out = []
        for ch in s:
            if ch.islower():
                out.append(self.letters.index(ch) + 1)
            else:
                out.append(-(self.letters.index(ch.lower()) + 1))
        return self.normalize_payload(tuple(out))


def make_free(rank: int, letters: str = _LETTERS) -> FreeModel:
    return FreeModel(rank, letters)


# ---------------------------------------------------------------------------
# free product model


class FreeProductModel(GroupModel):
    """H * K for finite H, K; elements are alternating normal-form words.

    Letters are (factor, index) with factor 0 = H, 1 = K; no letter is a
    factor identity and adjacent letters come from different factors.
    """

    variant = "free_product"

    def __init__(self, H: FiniteModel, K: FiniteModel):
        if H.table.order < 2 or K.table.order < 2:
            raise ValueError("both free-product factors must be nontrivial")
        self.factors: Tuple[FiniteModel, FiniteModel] = (H, K)
        gens: List[Tuple[Tuple[int, int], ...]] = []
        for f, model in enumerate(self.factors):
            for s in model.gens.elements:
                gens.append(((f, s),))
        self.gens = GeneratingSet(tuple(gens))
        self._letter_names = self._build_letter_names()

    def _build_letter_names(self) -> Dict[Tuple[int, int], str]:
        names: Dict[Tuple[int, int], str] = {}
        used = set()
        for f, model in enumerate(self.factors):
            for i in range(model.table.order):
                if i == model.table.identity:
                    continue
                nm = model.table.elem_names[i]
                if nm in used:
                    nm = f"{'hk'[f]}{i}"
                used.add(nm)
                names[(f, i)] = nm
        return names

    def identity_payload(self) -> Tuple[Tuple[int, int], ...]:
        return ()

    def mul_payload(self, a, b):
        out = list(a)
        for letter in b:
            self._push(out, letter)
        return tuple(out)

    def _push(self, out: List[Tuple[int, int]], letter: Tuple[int, int]) -> None:
        f, x = letter
        model = self.factors[f]
        if x == model.table.identity:
            return
        if out and out[-1][0] == f:
            y = model.table.mul[out[-1][1]][x]
            out.pop()
            if y != model.table.identity:
                out.append((f, y))
        else:
            out.append((f, x))

    def inv_payload(self, a):
        out = []
        for f, x in reversed(a):
            out.append((f, self.factors[f].table.inv[x]))
        return tuple(out)

    def normalize_payload(self, a):
        out: List[Tuple[int, int]] = []
        for letter in a:
            f, x = int(letter[0]), int(letter[1])
            if f not in (0, 1) or not 0 <= x < self.factors[f].table.order:
                raise ValueError("bad free-product letter")
            self._push(out, (f, x))
        return tuple(out)

    def length_payload(self, a) -> int:
        return sum(self.factors[f].length_payload(x) for f, x in a)

    def payload_str(self, a) -> str:
        if not a:
            return "e"
        return ".".join(self._letter_names[l] for l in a)

    def parse_payload(self, s: str):
        if s == "e":
            return ()
        by_name = {v: k for k, v in self._letter_names.items()}
        letters = []
        for tok in s.split("."):
            if tok not in by_name:
                raise ValueError(f"unknown free-product letter {tok!r}")
            letters.append(by_name[tok])
        return self.normalize_payload(tuple(letters))


def make_free_product(H: FiniteModel, K: FiniteModel) -> FreeProductModel:
    """Free product of two nontrivial finite groups, gens = S_H u S_K."""
    return FreeProductModel(H, K)


# ---------------------------------------------------------------------------
# JSON group specs (consumed by the CLI)


def group_spec_of(model: GroupModel) -> dict:
    """Canonical JSON spec describing a model (inverse of parse_group_spec
    up to generator symmetrization)."""
    if isinstance(model, FiniteModel):
        return {
            "variant": "finite",
            "name": model.table.name,
            "order": model.table.order,
            "gens": [model.payload_str(s) for s in model.gens.elements],
        }
    if isinstance(model, AbelianModel):
        return {
            "variant": "abelian",
            "rank": model.rank,
            "moduli": list(model.moduli),
            "gens": [list(v) for v in model.gens.elements],
        }
    if isinstance(model, FreeModel):
        return {"variant": "free", "rank": model.rank, "letters": model.letters}
    if isinstance(model, FreeProductModel):
        return {
            "variant": "free_product",
            "H": group_spec_of(model.factors[0]),
            "K": group_spec_of(model.factors[1]),
        }
    raise ValueError(f"unknown model {model!r}")


def parse_group_spec(spec: dict) -> GroupModel:
    """Build a model from the JSON group-spec schema.

    {"variant":"cyclic","n":8,"gens":[1]}
    {"variant":"abelian","rank":2,"moduli":[],"gens":[[1,0],[0,1]]}
    {"variant":"free","rank":2}
    {"variant":"free_product","H":{...},"K":{...}}
    """
    variant = spec.get("variant")
    if variant == "cyclic":
        return make_cyclic(spec["n"], spec["gens"], letter=spec.get("letter", "b"))
    if variant == "abelian":
        return make_abelian(spec["rank"], spec.get("moduli", []), spec["gens"])
    if variant == "free":
        return make_free(spec["rank"])
    if variant == "free_product":
        H = parse_group_spec(spec["H"])
        K = parse_group_spec(spec["K"])
        if not isinstance(H, FiniteModel) or not isinstance(K, FiniteModel):
            raise ValueError("free_product factors must be finite group specs")
        return make_free_product(H, K)
    raise ValueError(f"unknown group variant {variant!r}")
