"""Dense 2^n statevector simulation: gates, exponentials, exact spectra.

Basis convention is little-endian throughout: qubit 0 is the least
significant bit of the basis index, so ``|q_{n-1} ... q_1 q_0>`` is stored
at index ``sum_k q_k 2^k``. Gate kernels mutate the buffer in place and
return the same object; callers needing the old state must copy first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from . import kernels
from .pauli import DROP_TOL, PauliSum, PauliTerm
from .rng import SplitMix64

#: default allocation guard: statevectors above this many bytes are refused
DEFAULT_MEMORY_LIMIT = 2 * 1024**3

#: dense eigendecomposition is refused above this qubit count
DENSE_CAP = 14

#: default cap for the matrix-free iterative eigensolver
ITERATIVE_CAP = 20


class MemoryGuardError(MemoryError):
    """Raised when an allocation would exceed the configured memory limit."""

    def __init__(self, required: int, limit: int):
        self.required = required
        self.limit = limit
        super().__init__(
            f"statevector needs {required:,} bytes "
            f"but the memory limit is {limit:,} bytes"
        )


def statevector_bytes(qubit_count: int) -> int:
    """Exact buffer size: 2^n amplitudes at 16 bytes each."""
    return (1 << qubit_count) * 16


@dataclass
class Statevector:
    """2^n complex amplitudes over the little-endian computational basis."""

    qubit_count: int
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.qubit_count

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.qubit_count, self.amplitudes.copy())

    def overlap(self, other: "Statevector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class Spectrum:
    """Eigenvalues sorted ascending, with optional overlap weights.

    ``weights[k]`` is ``|<reference|E_k>|^2`` when a reference state was
    supplied; weights sum to one. ``provenance`` records whether the
    energies come from exact diagonalization ("exact") or from a
    reconstructed density of states ("dos").
    """

    energies: np.ndarray
    weights: np.ndarray | None = None
    provenance: str = "exact"

    def ground_multiplicity(self, tol: float = 1e-9) -> int:
        return int(np.sum(self.energies <= self.energies[0] + tol))

    def gap(self) -> float:
        """Energy difference between the two lowest distinct levels."""
        e = self.energies
        for k in range(1, len(e)):
            if e[k] - e[0] > 1e-9:
                return float(e[k] - e[0])
        return 0.0


# ---------------------------------------------------------------------------
# construction and gates
# ---------------------------------------------------------------------------


def basis_state(qubit_count: int, bits: int = 0,
                memory_limit: int = DEFAULT_MEMORY_LIMIT) -> Statevector:
    """Computational basis state ``|bits>`` on ``qubit_count`` qubits."""
    if qubit_count < 1:
        raise ValueError("qubit_count must be >= 1")
    required = statevector_bytes(qubit_count)
    if required > memory_limit:
        raise MemoryGuardError(required, memory_limit)
    if not 0 <= bits < (1 << qubit_count):
        raise ValueError(f"basis index {bits} out of range for {qubit_count} qubits")
    amps = np.zeros(1 << qubit_count, dtype=np.complex128)
    amps[bits] = 1.0
    return Statevector(qubit_count, amps)


def random_state(qubit_count: int, seed: int,
                 memory_limit: int = DEFAULT_MEMORY_LIMIT) -> Statevector:
    """Normalized pseudo-random state from the deterministic stream."""
    required = statevector_bytes(qubit_count)
    if required > memory_limit:
        raise MemoryGuardError(required, memory_limit)
    rng = SplitMix64(seed)
    dim = 1 << qubit_count
    re = np.array(rng.doubles(dim)) - 0.5
    im = np.array(rng.doubles(dim)) - 0.5
    amps = re + 1j * im
    amps /= np.linalg.norm(amps)
    return Statevector(qubit_count, amps)


def _check_qubit(psi: Statevector, q: int) -> None:
    if not 0 <= q < psi.qubit_count:
        raise IndexError(f"qubit {q} out of range for {psi.qubit_count}-qubit state")


def apply_ry(psi: Statevector, q: int, theta: float) -> Statevector:
    """In-place Y-rotation ``[[cos t/2, -sin t/2], [sin t/2, cos t/2]]`` on qubit q."""
    _check_qubit(psi, q)
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    view = psi.amplitudes.reshape(1 << (psi.qubit_count - q - 1), 2, 1 << q)
    a0 = view[:, 0, :].copy()
    view[:, 0, :] *= c
    view[:, 0, :] -= s * view[:, 1, :]
    view[:, 1, :] *= c
    view[:, 1, :] += s * a0
    return psi


def apply_x(psi: Statevector, q: int) -> Statevector:
    """In-place bit flip on qubit q."""
    _check_qubit(psi, q)
    view = psi.amplitudes.reshape(1 << (psi.qubit_count - q - 1), 2, 1 << q)
    view[:, [0, 1], :] = view[:, [1, 0], :]
    return psi


_CX_CACHE: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray]] = {}


def _cx_index_pairs(n: int, control: int, target: int):
    key = (n, control, target)
    pairs = _CX_CACHE.get(key)
    if pairs is None:
        idx = np.arange(1 << n, dtype=np.int64)
        sel = (((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)
        src = idx[sel]
        pairs = (src, src | np.int64(1 << target))
        _CX_CACHE[key] = pairs
    return pairs


def apply_cx(psi: Statevector, control: int, target: int) -> Statevector:
    """In-place controlled-X: flips ``target`` where ``control`` is 1."""
    _check_qubit(psi, control)
    _check_qubit(psi, target)
    if control == target:
        raise ValueError("control and target must differ")
    src, dst = _cx_index_pairs(psi.qubit_count, control, target)
    amps = psi.amplitudes
    tmp = amps[src].copy()
    amps[src] = amps[dst]
    amps[dst] = tmp
    return psi


def apply_pauli_exponential(psi: Statevector, term: PauliTerm,
                            angle: float) -> Statevector:
    """In-place ``exp(-i angle P)`` for a unit-coefficient Pauli string.

    ``P^2 = I`` gives the two-pass closed form
    ``cos(angle) psi - i sin(angle) P psi``; no dense matrix is formed.
    The term must carry coefficient 1 (fold weights into ``angle``).
    """
    if abs(term.coefficient - 1.0) > DROP_TOL:
        raise ValueError(
            "apply_pauli_exponential expects a unit-coefficient term; "
            "fold the weight into the angle"
        )
    if term.max_qubit() >= psi.qubit_count:
        raise ValueError("term acts outside the state's qubits")
    xmask = zymask = n_y = 0
    for q, ax in term.factors.items():
        if ax in ("X", "Y"):
            xmask |= 1 << q
        if ax in ("Y", "Z"):
            zymask |= 1 << q
        if ax == "Y":
            n_y += 1
    kernels.apply_exp_term(psi.amplitudes, angle, 1j**n_y, xmask, zymask)
    return psi


# ---------------------------------------------------------------------------
# operator application and observables
# ---------------------------------------------------------------------------


def apply_to_state(op: PauliSum, psi: Statevector) -> Statevector:
    """``H |psi>`` as a new statevector, one amplitude pass per Pauli string."""
    comp = kernels.compile_operator(op, psi.qubit_count)
    return Statevector(psi.qubit_count, kernels.apply_operator(comp, psi.amplitudes))


def expectation(op: PauliSum, psi: Statevector, imag_tol: float = 1e-10) -> float:
    """``<psi|H|psi>`` as a real number.

    An imaginary residue below ``imag_tol`` is discarded; anything larger
    means the operator was not Hermitian and raises.
    """
    comp = kernels.compile_operator(op, psi.qubit_count)
    val = kernels.expectation_value(comp, psi.amplitudes)
    if abs(val.imag) > imag_tol:
        raise ValueError(
            f"expectation has imaginary residue {val.imag:.3e} "
            f"(operator not Hermitian?)"
        )
    return float(val.real)


def expectation_complex(op: PauliSum, psi: Statevector) -> complex:
    """Raw complex ``<psi|H|psi>`` (for anti-Hermitian combinations)."""
    comp = kernels.compile_operator(op, psi.qubit_count)
    return kernels.expectation_value(comp, psi.amplitudes)


def stress_probability(psi: Statevector, q: int) -> float:
    """``<(I - Z_q)/2>``: total weight of basis states with bit q set."""
    _check_qubit(psi, q)
    view = np.abs(psi.amplitudes.reshape(
        1 << (psi.qubit_count - q - 1), 2, 1 << q)) ** 2
    return float(view[:, 1, :].sum())


def stress_profile(psi: Statevector) -> np.ndarray:
    """Per-qubit stress probabilities as one array."""
    return np.array([stress_probability(psi, q) for q in range(psi.qubit_count)])


# ---------------------------------------------------------------------------
# exact spectra and iterative ground states
# ---------------------------------------------------------------------------


def dense_matrix(op: PauliSum, qubit_count: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the operator (for n <= DENSE_CAP)."""
    if qubit_count > DENSE_CAP:
        raise ValueError(
            f"dense matrix refused for n = {qubit_count} (cap {DENSE_CAP})"
        )
    comp = kernels.compile_operator(op, qubit_count)
    dim = 1 << qubit_count
    mat = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    mat[idx, idx] = comp.diag
    for t in range(comp.seq_coeffs.shape[0]):
        xm = int(comp.seq_xmasks[t])
        if xm == 0:
            continue  # already in the fused diagonal
        zym = int(comp.seq_zymasks[t])
        coeff = comp.seq_coeffs[t] * comp.seq_units[t]
        phase = np.full(dim, coeff, dtype=np.complex128)
        if zym:
            phase = phase * kernels._sign_vector(zym, dim)
        mat[idx ^ xm, idx] += phase
    return mat


def exact_spectrum(op: PauliSum, qubit_count: int,
                   reference: Statevector | None = None) -> Spectrum:
    """Full spectrum by dense Hermitian eigendecomposition (n <= 14).

    With a reference state, weights are its squared overlaps with the
    eigenvectors, aligned to the ascending energy list.
    """
    if not op.is_hermitian:
        raise ValueError("exact_spectrum requires a Hermitian operator")
    if qubit_count > DENSE_CAP:
        raise ValueError(
            f"exact diagonalization refused for n = {qubit_count} "
            f"(cap {DENSE_CAP}); use ground_state_iterative"
        )
    if op.is_diagonal():
        comp = kernels.compile_operator(op, qubit_count)
        diag = comp.diag.real
        order = np.argsort(diag, kind="stable")
        energies = diag[order]
        weights = None
        if reference is not None:
            weights = np.abs(reference.amplitudes[order]) ** 2
        return Spectrum(energies=energies, weights=weights)
    mat = dense_matrix(op, qubit_count)
    energies, vectors = np.linalg.eigh(mat)
    weights = None
    if reference is not None:
        weights = np.abs(vectors.conj().T @ reference.amplitudes) ** 2
    return Spectrum(energies=energies, weights=weights)


def exact_ground_state(op: PauliSum, qubit_count: int) -> tuple[float, Statevector, int]:
    """Ground energy, eigenvector, and multiplicity via dense diagonalization.

    Degenerate ground spaces return the deterministic first eigenvector with
    multiplicity > 1 flagged, so callers can skip state comparisons.
    """
    if qubit_count > DENSE_CAP:
        raise ValueError(f"dense ground state refused for n = {qubit_count}")
    if op.is_diagonal():
        comp = kernels.compile_operator(op, qubit_count)
        diag = comp.diag.real
        k = int(np.argmin(diag))
        e0 = float(diag[k])
        multiplicity = int(np.sum(diag <= e0 + 1e-9))
        return e0, basis_state(qubit_count, k), multiplicity
    mat = dense_matrix(op, qubit_count)
    energies, vectors = np.linalg.eigh(mat)
    e0 = float(energies[0])
    multiplicity = int(np.sum(energies <= e0 + 1e-9))
    return e0, Statevector(qubit_count, np.ascontiguousarray(vectors[:, 0])), multiplicity


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the residual target."""


def ground_state_iterative(op: PauliSum, qubit_count: int,
                           memory_limit: int = DEFAULT_MEMORY_LIMIT,
                           qubit_cap: int = ITERATIVE_CAP,
                           residual_tol: float = 1e-8,
                           max_iterations: int = 10_000) -> tuple[float, Statevector]:
    """Lowest eigenpair by matrix-free Lanczos iteration (ARPACK).

    Converged result satisfies ``||H psi - E psi|| < residual_tol``. Diagonal
    operators short-circuit to an exact basis-state minimum.
    """
    if qubit_count > qubit_cap:
        raise ValueError(
            f"iterative solver capped at {qubit_cap} qubits (asked {qubit_count}); "
            f"raise qubit_cap explicitly for high-memory runs"
        )
    required = statevector_bytes(qubit_count)
    if required > memory_limit:
        raise MemoryGuardError(required, memory_limit)
    if not op.is_hermitian:
        raise ValueError("ground_state_iterative requires a Hermitian operator")
    comp = kernels.compile_operator(op, qubit_count)
    if comp.off_coeffs.shape[0] == 0:
        diag = comp.diag.real
        k = int(np.argmin(diag))
        return float(diag[k]), basis_state(qubit_count, k)
    dim = 1 << qubit_count
    if qubit_count <= 4:
        e0, psi, _ = exact_ground_state(op, qubit_count)
        return e0, psi
    matvec = lambda v: kernels.apply_operator(comp, np.ascontiguousarray(v, dtype=np.complex128))
    operator = spla.LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    v0 = random_state(qubit_count, seed=0x1E57_0A11, memory_limit=memory_limit).amplitudes
    try:
        vals, vecs = spla.eigsh(operator, k=1, which="SA", v0=v0,
                                maxiter=max_iterations, tol=0)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"ARPACK did not converge within {max_iterations} iterations"
        ) from exc
    energy = float(vals[0])
    psi = np.ascontiguousarray(vecs[:, 0])
    residual = float(np.linalg.norm(kernels.apply_operator(comp, psi) - energy * psi))
    if residual >= residual_tol:
        raise ConvergenceError(
            f"residual {residual:.3e} above target {residual_tol:.1e}"
        )
    return energy, Statevector(qubit_count, psi)


# ---------------------------------------------------------------------------
# raw statevector dump (debug interface)
# ---------------------------------------------------------------------------


def dump_statevector(psi: Statevector, path) -> None:
    """Binary dump: u64 qubit count, then little-endian (re, im) float64 pairs."""
    with open(path, "wb") as fh:
        fh.write(np.uint64(psi.qubit_count).tobytes())
        inter = np.empty(2 * psi.dim, dtype="<f8")
        inter[0::2] = psi.amplitudes.real
        inter[1::2] = psi.amplitudes.imag
        fh.write(inter.tobytes())


def load_statevector(path) -> Statevector:
    with open(path, "rb") as fh:
        qubit_count = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
        inter = np.frombuffer(fh.read(), dtype="<f8")
    amps = inter[0::2] + 1j * inter[1::2]
    return Statevector(qubit_count, np.ascontiguousarray(amps))
