"""Matrix-free application of Pauli operators to statevectors.

A Pauli string acts on a computational-basis state as a bit-flip permutation
plus a sign: with qubit 0 as the least significant bit,

    P |i> = (i)^{n_Y} * (-1)^{popcount(i & zymask)} |i ^ xmask>

where ``xmask`` collects X and Y sites, ``zymask`` collects Y and Z sites
and ``n_Y`` counts Y factors. Operators are compiled once per qubit count
into flat arrays; all purely diagonal terms (Z-only strings plus identity)
are fused into a single diagonal vector so evaluation cost stays a handful
of passes over the 2^n amplitudes regardless of how many diagonal terms the
operator carries.

Two interchangeable backends implement the kernels: a numba one (default,
needed for microsecond-scale evaluations) and a pure-numpy fallback. Both
are single-threaded and bit-deterministic; the test suite cross-checks them
against each other and against dense matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum, PauliTerm

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco


#: module switch, overridable for tests: "numba" | "numpy"
BACKEND = "numba" if HAVE_NUMBA else "numpy"


@dataclass
class CompiledOperator:
    """Flat-array form of a PauliSum bound to a fixed qubit count."""

    qubit_count: int
    diag: np.ndarray          # complex128[2^n], fused diagonal part
    off_coeffs: np.ndarray    # complex128[K], coefficient * i^{n_Y} per term
    off_xmasks: np.ndarray    # int64[K]
    off_zymasks: np.ndarray   # int64[K]
    # per-term sequence over *all* terms in canonical order (for exponentials)
    seq_coeffs: np.ndarray    # complex128[T], raw coefficients
    seq_units: np.ndarray     # complex128[T], i^{n_Y}
    seq_xmasks: np.ndarray    # int64[T]
    seq_zymasks: np.ndarray   # int64[T]


def _term_masks(term: PauliTerm) -> tuple[int, int, int]:
    xmask = zymask = n_y = 0
    for q, ax in term.factors.items():
        if ax in ("X", "Y"):
            xmask |= 1 << q
        if ax in ("Y", "Z"):
            zymask |= 1 << q
        if ax == "Y":
            n_y += 1
    return xmask, zymask, n_y


def _sign_vector(zymask: int, dim: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    v = idx & np.int64(zymask)
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return 1.0 - 2.0 * (v & 1)


def compile_operator(op: PauliSum, qubit_count: int) -> CompiledOperator:
    """Compile (and cache on the operator) for a fixed qubit count."""
    cached = op._compiled.get(qubit_count)
    if cached is not None:
        return cached
    if op.max_qubit() >= qubit_count:
        raise ValueError(
            f"operator touches qubit {op.max_qubit()} but the system has "
            f"{qubit_count} qubits"
        )
    dim = 1 << qubit_count
    diag = np.zeros(dim, dtype=np.complex128)
    off: list[tuple[complex, int, int]] = []
    seq_c, seq_u, seq_x, seq_zy = [], [], [], []
    for term in op.terms:
        xmask, zymask, n_y = _term_masks(term)
        unit = 1j**n_y
        seq_c.append(complex(term.coefficient))
        seq_u.append(unit)
        seq_x.append(xmask)
        seq_zy.append(zymask)
        if xmask == 0:
            if zymask == 0:
                diag += term.coefficient
            else:
                diag += term.coefficient * _sign_vector(zymask, dim)
        else:
            off.append((complex(term.coefficient) * unit, xmask, zymask))
    compiled = CompiledOperator(
        qubit_count=qubit_count,
        diag=diag,
        off_coeffs=np.array([c for c, _, _ in off], dtype=np.complex128),
        off_xmasks=np.array([x for _, x, _ in off], dtype=np.int64),
        off_zymasks=np.array([z for _, _, z in off], dtype=np.int64),
        seq_coeffs=np.array(seq_c, dtype=np.complex128),
        seq_units=np.array(seq_u, dtype=np.complex128),
        seq_xmasks=np.array(seq_x, dtype=np.int64),
        seq_zymasks=np.array(seq_zy, dtype=np.int64),
    )
    op._compiled[qubit_count] = compiled
    return compiled


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------


@njit(cache=True)
def _nb_apply(psi, diag, coeffs, xmasks, zymasks, out):
    dim = psi.shape[0]
    for i in range(dim):
        out[i] = diag[i] * psi[i]
    for t in range(coeffs.shape[0]):
        c = coeffs[t]
        m = xmasks[t]
        zy = zymasks[t]
        if zy == 0:
            for i in range(dim):
                out[i ^ m] += c * psi[i]
        else:
            for i in range(dim):
                v = i & zy
                v ^= v >> 32
                v ^= v >> 16
                v ^= v >> 8
                v ^= v >> 4
                v ^= v >> 2
                v ^= v >> 1
                sign = 1.0 - 2.0 * (v & 1)
                out[i ^ m] += c * sign * psi[i]
    return out


@njit(cache=True)
def _nb_expectation(psi, diag, coeffs, xmasks, zymasks):
    dim = psi.shape[0]
    acc = 0.0 + 0.0j
    for i in range(dim):
        p = psi[i]
        acc += diag[i] * (p.real * p.real + p.imag * p.imag)
    for t in range(coeffs.shape[0]):
        c = coeffs[t]
        m = xmasks[t]
        zy = zymasks[t]
        s = 0.0 + 0.0j
        if zy == 0:
            for i in range(dim):
                s += np.conj(psi[i ^ m]) * psi[i]
        else:
            for i in range(dim):
                v = i & zy
                v ^= v >> 32
                v ^= v >> 16
                v ^= v >> 8
                v ^= v >> 4
                v ^= v >> 2
                v ^= v >> 1
                sign = 1.0 - 2.0 * (v & 1)
                s += np.conj(psi[i ^ m]) * (sign * psi[i])
        acc += c * s
    return acc


@njit(cache=True)
def _nb_expectation_batch(psi, diag, coeffs, xmasks, zymasks, iters):
    acc = 0.0
    for _ in range(iters):
        acc += _nb_expectation(psi, diag, coeffs, xmasks, zymasks).real
    return acc


@njit(cache=True)
def _nb_exp_term(psi, angle, unit, xmask, zymask):
    """In-place ``exp(-i angle P) psi`` for one Pauli string P."""
    dim = psi.shape[0]
    c = np.cos(angle)
    s = np.sin(angle)
    if xmask == 0:
        # diagonal string: pointwise phase
        for i in range(dim):
            v = i & zymask
            v ^= v >> 32
            v ^= v >> 16
            v ^= v >> 8
            v ^= v >> 4
            v ^= v >> 2
            v ^= v >> 1
            sign = 1.0 - 2.0 * (v & 1)
            psi[i] = (c - 1j * s * unit * sign) * psi[i]
        return psi
    for i in range(dim):
        j = i ^ xmask
        if i < j:
            vi = i & zymask
            vi ^= vi >> 32
            vi ^= vi >> 16
            vi ^= vi >> 8
            vi ^= vi >> 4
            vi ^= vi >> 2
            vi ^= vi >> 1
            sign_i = 1.0 - 2.0 * (vi & 1)
            vj = j & zymask
            vj ^= vj >> 32
            vj ^= vj >> 16
            vj ^= vj >> 8
            vj ^= vj >> 4
            vj ^= vj >> 2
            vj ^= vj >> 1
            sign_j = 1.0 - 2.0 * (vj & 1)
            a = psi[i]
            b = psi[j]
            # (P psi)[i] = unit * sign(j) * psi[j], (P psi)[j] = unit * sign(i) * psi[i]
            psi[i] = c * a - 1j * s * unit * sign_j * b
            psi[j] = c * b - 1j * s * unit * sign_i * a
    return psi


@njit(cache=True)
def _nb_exp_sequence(psi, angles, units, xmasks, zymasks):
    for t in range(angles.shape[0]):
        _nb_exp_term(psi, angles[t], units[t], xmasks[t], zymasks[t])
    return psi


@njit(cache=True)
def _nb_trotter_batch(psi, angles, units, xmasks, zymasks, iters):
    for _ in range(iters):
        _nb_exp_sequence(psi, angles, units, xmasks, zymasks)
    return psi


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _np_apply(psi, comp: CompiledOperator):
    out = comp.diag * psi
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    for c, m, zy in zip(comp.off_coeffs, comp.off_xmasks, comp.off_zymasks):
        contrib = c * psi if zy == 0 else c * _sign_vector(int(zy), dim) * psi
        out += contrib[idx ^ np.int64(m)]
    return out


def _np_expectation(psi, comp: CompiledOperator):
    return complex(np.vdot(psi, _np_apply(psi, comp)))


def _np_exp_term(psi, angle, unit, xmask, zymask):
    dim = psi.shape[0]
    c, s = np.cos(angle), np.sin(angle)
    sign = _sign_vector(int(zymask), dim) if zymask else np.ones(dim)
    if xmask == 0:
        psi *= c - 1j * s * unit * sign
        return psi
    idx = np.arange(dim, dtype=np.int64)
    perm = idx ^ np.int64(xmask)
    p_psi = (unit * sign * psi)[perm]  # (P psi)[j] = unit sign(j^m) psi[j^m]
    np.multiply(psi, c, out=psi)
    psi -= 1j * s * p_psi
    return psi


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def apply_operator(comp: CompiledOperator, psi: np.ndarray) -> np.ndarray:
    """Return ``H psi`` without materializing any dense matrix."""
    if BACKEND == "numba":
        out = np.empty_like(psi)
        return _nb_apply(psi, comp.diag, comp.off_coeffs, comp.off_xmasks,
                         comp.off_zymasks, out)
    return _np_apply(psi, comp)


def expectation_value(comp: CompiledOperator, psi: np.ndarray) -> complex:
    """Return ``<psi|H|psi>`` as a raw complex number."""
    if BACKEND == "numba":
        return complex(_nb_expectation(psi, comp.diag, comp.off_coeffs,
                                       comp.off_xmasks, comp.off_zymasks))
    return _np_expectation(psi, comp)


def apply_exp_term(psi: np.ndarray, angle: float, unit: complex,
                   xmask: int, zymask: int) -> np.ndarray:
    """In-place ``exp(-i angle P) psi`` for a single unit-coefficient string."""
    if BACKEND == "numba":
        return _nb_exp_term(psi, float(angle), complex(unit),
                            np.int64(xmask), np.int64(zymask))
    return _np_exp_term(psi, float(angle), complex(unit), xmask, zymask)


def apply_exp_sequence(psi: np.ndarray, angles: np.ndarray,
                       comp: CompiledOperator) -> np.ndarray:
    """In-place product of per-term exponentials, in canonical term order."""
    if BACKEND == "numba":
        return _nb_exp_sequence(psi, angles, comp.seq_units,
                                comp.seq_xmasks, comp.seq_zymasks)
    for t in range(angles.shape[0]):
        _np_exp_term(psi, angles[t], comp.seq_units[t],
                     int(comp.seq_xmasks[t]), int(comp.seq_zymasks[t]))
    return psi
