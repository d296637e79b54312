"""Z-string polynomials and the MAX K-CUT cost and penalty Hamiltonians.

Qubit ``j*m + l`` is encoding bit ``l`` (weight ``2**l``) of vertex ``j``,
and qubit ``q`` is bit ``q`` of a computational-basis index.  A Z-string is
stored as the bitmask of its support, so ``Z_S Z_T = Z_{S xor T}`` and the
basis-state eigenvalue of ``Z_S`` on index ``i`` is
``(-1)**popcount(S & i)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import reduce
from types import MappingProxyType

import numpy as np

from mbqaoa import kernels
from mbqaoa.graph import Assignment, Graph, InstanceTooLarge

DROP_TOL = 1e-15
DENSE_QUBIT_LIMIT = 24
MATRIX_QUBIT_LIMIT = 12


class PauliZPolynomial:
    """Real linear combination of Z-strings on ``qubit_count`` qubits.

    Coefficients sharing a support are combined with :func:`math.fsum`, so the
    canonical term map does not depend on the order terms were supplied in.
    Terms with ``|coeff| <= 1e-15`` are dropped and supports are kept sorted.
    """

    __slots__ = ("_n", "_terms")

    def __init__(
        self,
        qubit_count: int,
        terms: Mapping[int, float] | Iterable[tuple[int, float]] = (),
    ):
        if qubit_count < 0:
            raise ValueError("qubit_count must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        limit = 1 << qubit_count
        groups: dict[int, list[float]] = defaultdict(list)
        for mask, coeff in items:
            mask = int(mask)
            if not 0 <= mask < limit:
                raise ValueError(f"support {mask:#b} outside {qubit_count} qubits")
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            groups[mask].append(coeff)
        canon = {}
        for mask in sorted(groups):
            total = math.fsum(groups[mask])
            if abs(total) > DROP_TOL:
                canon[mask] = total
        self._n = qubit_count
        self._terms = canon

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, qubit_count: int) -> PauliZPolynomial:
        return cls(qubit_count)

    @classmethod
    def identity(cls, qubit_count: int, coeff: float = 1.0) -> PauliZPolynomial:
        return cls(qubit_count, {0: coeff})

    @classmethod
    def z(cls, qubit_count: int, *qubits: int, coeff: float = 1.0) -> PauliZPolynomial:
        mask = 0
        for q in qubits:
            mask ^= 1 << q
        return cls(qubit_count, {mask: coeff})

    # -- accessors ----------------------------------------------------
    @property
    def qubit_count(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[int, float]:
        return MappingProxyType(self._terms)

    def coeff(self, mask: int) -> float:
        return self._terms.get(mask, 0.0)

    @property
    def identity_coefficient(self) -> float:
        return self._terms.get(0, 0.0)

    def nonidentity_terms(self) -> dict[int, float]:
        return {m: c for m, c in self._terms.items() if m}

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    # -- algebra ------------------------------------------------------
    def _check(self, other: PauliZPolynomial) -> None:
        if other._n != self._n:
            raise ValueError(f"qubit counts differ: {self._n} vs {other._n}")

    def __add__(self, other: PauliZPolynomial) -> PauliZPolynomial:
        self._check(other)
        return PauliZPolynomial(
            self._n, [*self._terms.items(), *other._terms.items()]
        )

    def __neg__(self) -> PauliZPolynomial:
        return PauliZPolynomial(self._n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other: PauliZPolynomial) -> PauliZPolynomial:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PauliZPolynomial):
            self._check(other)
            return PauliZPolynomial(
                self._n,
                [
                    (m1 ^ m2, c1 * c2)
                    for m1, c1 in self._terms.items()
                    for m2, c2 in other._terms.items()
                ],
            )
        if isinstance(other, (int, float)):
            return PauliZPolynomial(self._n, {m: c * other for m, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliZPolynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, tuple(self._terms.items())))

    def allclose(self, other: PauliZPolynomial, atol: float = 1e-12) -> bool:
        if self._n != other._n:
            return False
        keys = self._terms.keys() | other._terms.keys()
        return all(abs(self.coeff(k) - other.coeff(k)) <= atol for k in keys)

    def lift(self, qubit_count: int, offset: int) -> PauliZPolynomial:
        """Embed on a ``qubit_count`` register with qubit 0 mapped to ``offset``."""
        if offset < 0 or offset + self._n > qubit_count:
            raise ValueError("lifted support does not fit the target register")
        return PauliZPolynomial(qubit_count, {m << offset: c for m, c in self._terms.items()})

    def tensor(self, high: PauliZPolynomial) -> PauliZPolynomial:
        """``self`` on the low qubits, ``high`` on the next ``high.qubit_count``."""
        n = self._n + high._n
        return self.lift(n, 0) * high.lift(n, self._n)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*Z[{m:#b}]" for m, c in self._terms.items()) or "0"
        return f"PauliZPolynomial({self._n}, {body})"

    # -- evaluation ---------------------------------------------------
    def masks_coeffs(self) -> tuple[np.ndarray, np.ndarray]:
        masks = np.fromiter(self._terms.keys(), dtype=np.uint64, count=len(self._terms))
        coeffs = np.fromiter(self._terms.values(), dtype=np.float64, count=len(self._terms))
        return masks, coeffs

    def value_at(self, index: int) -> float:
        """Diagonal entry at one basis index."""
        return math.fsum(
            -c if (m & index).bit_count() & 1 else c for m, c in self._terms.items()
        )

    def to_dense(self) -> np.ndarray:
        """Dense matrix built from Kronecker products of I and Z.

        Deliberately independent of the bitmask evaluation path.
        """
        if self._n > MATRIX_QUBIT_LIMIT:
            raise InstanceTooLarge(f"dense matrix for {self._n} qubits")
        eye = np.eye(2)
        pz = np.diag([1.0, -1.0])
        dim = 1 << self._n
        out = np.zeros((dim, dim))
        for mask, c in self._terms.items():
            # kron puts its first factor on the most significant bit
            factors = [pz if (mask >> q) & 1 else eye for q in reversed(range(self._n))]
            out += c * reduce(np.kron, factors, np.eye(1))
        return out

    # -- serialisation ------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "qubit_count": self._n,
            "terms": [{"support_bits": m, "coeff": c} for m, c in self._terms.items()],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> PauliZPolynomial:
        doc = json.loads(text)
        return cls(
            doc["qubit_count"], [(t["support_bits"], t["coeff"]) for t in doc["terms"]]
        )


@dataclass(frozen=True)
class EncodingParams:
    """Binary encoding of ``K`` classes on ``m = ceil(log2 K)`` qubits per vertex."""

    K: int
    vertex_count: int
    m: int = field(init=False)
    total_qubits: int = field(init=False)

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2")
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        m = (self.K - 1).bit_length()
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "total_qubits", m * self.vertex_count)

    @classmethod
    def for_graph(cls, g: Graph, K: int) -> EncodingParams:
        return cls(K, g.vertex_count)

    @property
    def labels(self) -> int:
        return 1 << self.m

    @property
    def is_power_of_two(self) -> bool:
        return self.K == self.labels

    def qubit(self, vertex: int, bit: int) -> int:
        return vertex * self.m + bit


def encode_assignment(a: Assignment, enc: EncodingParams) -> int:
    if len(a) != enc.vertex_count:
        raise ValueError(f"assignment has {len(a)} labels for {enc.vertex_count} vertices")
    index = 0
    for j, label in enumerate(a):
        if not 0 <= label < enc.labels:
            raise ValueError(f"label {label} of vertex {j} outside [0, {enc.labels})")
        index |= int(label) << (j * enc.m)
    return index


def decode_index(index: int, enc: EncodingParams) -> Assignment:
    if not 0 <= index < (1 << enc.total_qubits):
        raise ValueError(f"basis index {index} outside the register")
    low = enc.labels - 1
    return tuple((index >> (j * enc.m)) & low for j in range(enc.vertex_count))


def edge_summand_masks(u: int, v: int, m: int) -> list[int]:
    """Supports of ``Z^l_u (x) Z^l_v`` for ``l = 1 .. 2**m - 1``."""
    return [(ell << (u * m)) | (ell << (v * m)) for ell in range(1, 1 << m)]


def build_edge_term(e: tuple[int, int] | tuple[int, int, float], enc: EncodingParams) -> PauliZPolynomial:
    """Unweighted edge operator: 0 when both endpoints share a label, 1 otherwise."""
    u, v = int(e[0]), int(e[1])
    if u == v:
        raise ValueError("edge endpoints must differ")
    scale = 1.0 / enc.labels
    terms = [(0, (enc.labels - 1) * scale)]
    terms += [(mask, -scale) for mask in edge_summand_masks(u, v, enc.m)]
    return PauliZPolynomial(enc.total_qubits, terms)


def build_target(g: Graph, enc: EncodingParams) -> PauliZPolynomial:
    scale = 1.0 / enc.labels
    terms = []
    for u, v, w in g.edges:
        terms.append((0, w * (enc.labels - 1) * scale))
        terms += [(mask, -w * scale) for mask in edge_summand_masks(u, v, enc.m)]
    return PauliZPolynomial(enc.total_qubits, terms)


def _ket0(n: int = 1) -> PauliZPolynomial:
    return PauliZPolynomial(n, {0: 0.5, 1 << (n - 1): 0.5})


def _ket1(n: int = 1) -> PauliZPolynomial:
    return PauliZPolynomial(n, {0: 0.5, 1 << (n - 1): -0.5})


def build_projector(M: int, m: int) -> PauliZPolynomial:
    """Projector onto the first ``M`` basis states of ``m`` qubits, as Z-strings.

    Recursive halving on the top qubit: the ``|0>`` half is taken whole when
    ``M`` exceeds it and the remainder is solved one qubit down inside the
    ``|1>`` half.  A power-of-two count ``2**l`` closes the recursion as
    ``Id^l (x) |0><0|^(m-l)``.
    """
    if m < 0 or not 1 <= M <= (1 << m):
        raise ValueError(f"need 1 <= M <= 2**m, got M={M}, m={m}")
    if M & (M - 1) == 0:
        ell = M.bit_length() - 1
        out = PauliZPolynomial.identity(ell)
        for _ in range(m - ell):
            out = out.tensor(_ket0())
        return out
    half = 1 << (m - 1)
    if M < half:
        return build_projector(M, m - 1).tensor(_ket0())
    lower = PauliZPolynomial.identity(m - 1).tensor(_ket0())
    upper = build_projector(M - half, m - 1).tensor(_ket1())
    return lower + upper


def build_vertex_penalty(enc: EncodingParams) -> PauliZPolynomial:
    """Indicator of the surplus labels ``K .. 2**m - 1`` on one vertex's ``m`` qubits."""
    return PauliZPolynomial.identity(enc.m) - build_projector(enc.K, enc.m)


def vertex_penalty_expansion(enc: EncodingParams, labels: Iterable[int] | None = None) -> PauliZPolynomial:
    """Unsimplified form ``(2^m - |J|)/2^m Id - 2^-m sum_{j in J} Zcal_j``.

    ``Zcal_j`` is the sum over non-empty supports ``S`` of
    ``(-1)**popcount(j & S) Z_S``.  ``labels`` is the kept set ``J``
    (default ``range(K)``).
    """
    kept = list(range(enc.K) if labels is None else labels)
    n = enc.labels
    terms = [(0, (n - len(kept)) / n)]
    for j in kept:
        for s in range(1, n):
            sign = -1.0 if (j & s).bit_count() & 1 else 1.0
            terms.append((s, -sign / n))
    return PauliZPolynomial(enc.m, terms)


def build_penalty(g: Graph, enc: EncodingParams) -> PauliZPolynomial:
    """Per edge, its weight when at least one endpoint has a surplus label."""
    n = enc.total_qubits
    hv = build_vertex_penalty(enc)
    if hv.is_zero():
        return PauliZPolynomial.zero(n)
    lifted = [hv.lift(n, j * enc.m) for j in range(enc.vertex_count)]
    terms: list[tuple[int, float]] = []
    for u, v, w in g.edges:
        edge = lifted[u] + lifted[v] - lifted[u] * lifted[v]
        terms += [(mask, w * c) for mask, c in edge.terms.items()]
    return PauliZPolynomial(n, terms)


def build_penalized_target(g: Graph, enc: EncodingParams) -> PauliZPolynomial:
    return build_target(g, enc) - build_penalty(g, enc)


def evaluate_diagonal(h: PauliZPolynomial, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    if h.qubit_count > max_qubits:
        raise InstanceTooLarge(f"{h.qubit_count} qubits exceed the dense guard of {max_qubits}")
    masks, coeffs = h.masks_coeffs()
    return kernels.z_diagonal(masks, coeffs, h.qubit_count)


@dataclass(frozen=True)
class Level:
    energy: float
    degeneracy: int
    representatives: tuple[Assignment, ...]


@dataclass(frozen=True)
class SpectrumReport:
    """Distinct diagonal values, ascending, with multiplicities."""

    levels: tuple[Level, ...]

    @property
    def top(self) -> Level:
        return self.levels[-1]

    @property
    def bottom(self) -> Level:
        return self.levels[0]

    def level_of(self, energy: float, tol: float = 1e-9) -> Level:
        for lvl in self.levels:
            if abs(lvl.energy - energy) <= tol:
                return lvl
        raise KeyError(energy)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["energy", "degeneracy", "representative"])
        for lvl in reversed(self.levels):
            rep = "-".join(map(str, lvl.representatives[0])) if lvl.representatives else ""
            writer.writerow([repr(lvl.energy), lvl.degeneracy, rep])
        return buf.getvalue()


def spectrum(
    h: PauliZPolynomial,
    enc: EncodingParams,
    *,
    tol: float = 1e-9,
    max_representatives: int = 8,
    max_qubits: int = DENSE_QUBIT_LIMIT,
) -> SpectrumReport:
    """Group the diagonal into levels after rounding energies to ``tol``.

    Representatives are the lowest basis indices of each level, decoded.
    """
    if h.qubit_count != enc.total_qubits:
        raise ValueError("polynomial and encoding disagree on the register size")
    diag = evaluate_diagonal(h, max_qubits)
    keys = np.rint(diag / tol).astype(np.int64)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    ends = np.r_[starts[1:], len(order)]
    levels = []
    for s, e in zip(starts, ends):
        members = order[s:e]
        reps = tuple(decode_index(int(i), enc) for i in members[:max_representatives])
        energy = round(float(diag[members[0]]), 9) + 0.0
        levels.append(Level(energy, int(e - s), reps))
    return SpectrumReport(tuple(levels))


def check_edge_term_theorem(m: int, atol: float = 1e-12) -> bool:
    """Dense check that the edge operator on ``2m`` qubits is ``1 - delta(w, u)``.

    Applies the Kronecker-built matrix to every ``|w> (x) |u>`` and compares
    against the basis vector (``w != u``) or zero (``w == u``).
    """
    if not 1 <= m <= 4:
        raise ValueError("theorem check supports 1 <= m <= 4")
    enc = EncodingParams(1 << m, 2)
    mat = build_edge_term((0, 1), enc).to_dense()
    dim = 1 << (2 * m)
    for w in range(1 << m):
        for u in range(1 << m):
            col = mat[:, w | (u << m)]
            expected = np.zeros(dim)
            if w != u:
                expected[w | (u << m)] = 1.0
            if np.max(np.abs(col - expected)) > atol:
                return False
    return True
