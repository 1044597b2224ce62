"""Exact algebra of weighted Pauli strings.

Operators are sparse sums of Pauli strings: each term maps qubit indices to
an axis in {X, Y, Z} (identity on absent indices) with a complex weight.
This representation stays polynomial-sized at any qubit count, so operator
objects for systems far beyond statevector reach are still cheap; only the
statevector kernels (see :mod:`qrs.kernels`) pay the exponential cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

AXES = ("X", "Y", "Z")

#: coefficients below this magnitude are dropped during canonicalization
DROP_TOL = 1e-12

#: tolerance on the imaginary residue of a Hermitian expectation value
IMAG_TOL = 1e-10

# single-qubit products: (a, b) -> (phase, axis or None for identity)
_PRODUCT: dict[tuple[str, str], tuple[complex, str | None]] = {
    ("X", "X"): (1, None),
    ("Y", "Y"): (1, None),
    ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string: ``coefficient * prod_q axis_q``.

    ``factors`` maps qubit index to axis; absent indices act as identity.
    An empty factor map is a scaled identity. Instances are treated as
    immutable; ``factors`` must not be mutated after construction.
    """

    coefficient: complex
    factors: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for q, ax in self.factors.items():
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if ax not in AXES:
                raise ValueError(f"unknown Pauli axis {ax!r} on qubit {q}")

    def key(self) -> tuple[tuple[int, str], ...]:
        """Canonical identity of the string, ignoring the coefficient."""
        return tuple(sorted(self.factors.items()))

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return len(self.factors)

    def is_identity(self) -> bool:
        return not self.factors

    def support(self) -> set[int]:
        return set(self.factors)

    def max_qubit(self) -> int:
        """Largest touched index, or -1 for the identity."""
        return max(self.factors) if self.factors else -1

    def unit(self) -> tuple[complex, "PauliTerm"]:
        """Split into (coefficient, same string with coefficient 1)."""
        return self.coefficient, PauliTerm(1.0, dict(self.factors))

    def scaled(self, factor: complex) -> "PauliTerm":
        return PauliTerm(self.coefficient * factor, dict(self.factors))

    def __repr__(self) -> str:
        if not self.factors:
            body = "I"
        else:
            body = " ".join(f"{ax}{q}" for q, ax in sorted(self.factors.items()))
        return f"{self.coefficient} * {body}"


def term_multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product of two Pauli strings with the phase folded into the coefficient.

    Site-wise single-qubit products (ZX = iY and cyclic) are applied on the
    overlap; identical axes cancel to identity and are removed.
    """
    coeff = a.coefficient * b.coefficient
    factors = dict(a.factors)
    for q, ax_b in b.factors.items():
        ax_a = factors.pop(q, None)
        if ax_a is None:
            factors[q] = ax_b
            continue
        phase, ax = _PRODUCT[(ax_a, ax_b)]
        coeff *= phase
        if ax is not None:
            factors[q] = ax
    return PauliTerm(coeff, factors)


def terms_commute(a: PauliTerm, b: PauliTerm) -> bool:
    """Two Pauli strings commute iff they differ on an even number of shared sites."""
    clashes = sum(1 for q, ax in a.factors.items() if q in b.factors and b.factors[q] != ax)
    return clashes % 2 == 0


class PauliSum:
    """Canonicalized weighted sum of Pauli strings.

    Terms are merged by string, sorted by (weight, factor list), and terms
    with |coefficient| <= DROP_TOL are removed, so a given operator has one
    unique representation no matter how it was assembled. Instances are
    immutable after construction and safe to share across threads.
    """

    __slots__ = ("terms", "_compiled")

    def __init__(self, terms: Iterable[PauliTerm] = ()):
        merged: dict[tuple, complex] = {}
        for t in terms:
            k = t.key()
            merged[k] = merged.get(k, 0.0) + complex(t.coefficient)
        kept = [
            PauliTerm(c, dict(k))
            for k, c in merged.items()
            if abs(c) > DROP_TOL
        ]
        kept.sort(key=lambda t: (t.weight, t.key()))
        self.terms = tuple(kept)
        self._compiled: dict = {}  # per-qubit-count kernel cache

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "PauliSum":
        return PauliSum(())

    @staticmethod
    def identity(coefficient: complex = 1.0) -> "PauliSum":
        return PauliSum((PauliTerm(coefficient, {}),))

    @staticmethod
    def single(coefficient: complex, factors: Mapping[int, str]) -> "PauliSum":
        return PauliSum((PauliTerm(coefficient, dict(factors)),))

    # -- basic queries -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def max_qubit(self) -> int:
        return max((t.max_qubit() for t in self.terms), default=-1)

    def support(self) -> set[int]:
        s: set[int] = set()
        for t in self.terms:
            s |= t.support()
        return s

    @property
    def is_hermitian(self) -> bool:
        """True when every canonical coefficient is real (to DROP_TOL)."""
        return all(abs(t.coefficient.imag) <= DROP_TOL for t in self.terms)

    def is_diagonal(self) -> bool:
        """True when only Z factors appear (operator is diagonal in the Z basis)."""
        return all(ax == "Z" for t in self.terms for ax in t.factors.values())

    def restrict(self, qubit_count: int) -> tuple["PauliSum", "PauliSum"]:
        """Split into (terms supported on qubits < qubit_count, dropped rest)."""
        kept, dropped = [], []
        for t in self.terms:
            (kept if t.max_qubit() < qubit_count else dropped).append(t)
        return PauliSum(kept), PauliSum(dropped)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + tuple(t.scaled(-1) for t in other.terms))

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(t.scaled(scalar) for t in self.terms)

    __rmul__ = __mul__

    def __neg__(self) -> "PauliSum":
        return self * -1

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(
            term_multiply(a, b) for a in self.terms for b in other.terms
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple((t.key(), t.coefficient) for t in self.terms))

    def __repr__(self) -> str:
        if not self.terms:
            return "PauliSum(0)"
        return "PauliSum(" + " + ".join(repr(t) for t in self.terms) + ")"


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``a b - b a`` in canonical form, exactly empty when all pairs commute.

    Computed pairwise at the string level: commuting string pairs are
    skipped; anticommuting pairs contribute ``2 ab`` since their products
    differ only by sign.
    """
    out: list[PauliTerm] = []
    for ta in a.terms:
        for tb in b.terms:
            if terms_commute(ta, tb):
                continue
            out.append(term_multiply(ta, tb).scaled(2.0))
    return PauliSum(out)


def commutator_norm_bound(parts: list[PauliSum] | tuple[PauliSum, ...]) -> float:
    """Upper bound on ``sum_{j<k} ||[H_j, H_k]||`` via the triangle inequality.

    Each non-commuting string pair contributes a commutator of spectral norm
    exactly ``2 |a| |b|``, so summing those magnitudes never underestimates
    the true norm sum. Cost is quadratic in term count, independent of the
    qubit count.
    """
    total = 0.0
    for j in range(len(parts)):
        for k in range(j + 1, len(parts)):
            for ta in parts[j].terms:
                for tb in parts[k].terms:
                    if not terms_commute(ta, tb):
                        total += 2.0 * abs(ta.coefficient) * abs(tb.coefficient)
    return total


# -- text serialization ----------------------------------------------------
# One term per line: "coeff * A{i} A{j} ...", identity spelled "1.0 * I".


def _format_coefficient(c: complex) -> str:
    if abs(c.imag) <= DROP_TOL:
        return repr(c.real)
    return repr(c)


def to_text(op: PauliSum) -> str:
    """Serialize one operator, one canonical term per line."""
    lines = []
    for t in op.terms:
        body = "I" if t.is_identity() else " ".join(
            f"{ax}{q}" for q, ax in sorted(t.factors.items())
        )
        lines.append(f"{_format_coefficient(t.coefficient)} * {body}")
    return "\n".join(lines)


def from_text(text: str) -> PauliSum:
    """Parse the ``to_text`` format; blank lines and '#' comments are skipped."""
    terms = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "*" not in line:
            raise ValueError(f"malformed operator line (missing '*'): {raw!r}")
        coeff_s, _, body = line.partition("*")
        coeff = complex(coeff_s.strip().replace(" ", ""))
        factors: dict[int, str] = {}
        for token in body.split():
            if token == "I":
                continue
            ax, idx_s = token[0], token[1:]
            if ax not in AXES or not idx_s.isdigit():
                raise ValueError(f"malformed Pauli factor {token!r} in {raw!r}")
            q = int(idx_s)
            if q in factors:
                raise ValueError(f"duplicate qubit {q} in {raw!r}")
            factors[q] = ax
        terms.append(PauliTerm(coeff, factors))
    return PauliSum(terms)
