"""Multi-mode truncated Fock-space algebra.

States live on an ordered list of labelled modes, each with its own Fock
cutoff.  Basis ordering is fixed once and for all: amplitudes are stored as a
flat C-ordered array over the occupation grid, i.e. the *last listed mode
varies fastest*.  All index arithmetic goes through :class:`ModeLayout` so the
convention exists in exactly one place.

Everything here is pure: states and operators are immutable after
construction and safe to share across parallel workers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .errors import DegenerateBranchError, LayoutError, TruncationError
from .tolerances import DEFAULT_TOL

MODE_LABELS = frozenset("abcdm")


def poisson_tail(lam: float, cutoff: int) -> float:
    """P(X > cutoff) for X ~ Poisson(lam); the leakage of |alpha|^2 = lam."""
    if lam == 0.0:
        return 0.0
    # regularized lower incomplete gamma = survival function of the Poisson CDF
    return float(gammainc(cutoff + 1, lam))


def cutoff_for_leakage(lam: float, tol: float, start: int = 0) -> int:
    """Smallest cutoff whose Poisson tail at mean ``lam`` is within ``tol``."""
    n = max(start, int(lam))
    while poisson_tail(lam, n) > tol:
        n += 1
    return n


@dataclass(frozen=True)
class ModeLayout:
    """Ordered labelled modes with per-mode Fock cutoffs.

    ``modes`` is a tuple of ``(label, cutoff)`` pairs; mode dimension is
    ``cutoff + 1``.  Labels are drawn from {a, b, c, d, m} and must be unique.
    """

    modes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.modes]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate mode labels in {labels}")
        for lab, cut in self.modes:
            if lab not in MODE_LABELS:
                raise LayoutError(f"unknown mode label {lab!r} (use a,b,c,d,m)")
            if cut < 0:
                raise LayoutError(f"cutoff for mode {lab!r} must be >= 0, got {cut}")
        object.__setattr__(self, "modes", tuple((str(l), int(c)) for l, c in self.modes))

    @classmethod
    def of(cls, *modes: tuple[str, int]) -> "ModeLayout":
        return cls(tuple(modes))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.modes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(cut + 1 for _, cut in self.modes)

    @property
    def dim(self) -> int:
        d = 1
        for _, cut in self.modes:
            d *= cut + 1
        return d

    def axis(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.modes):
            if lab == label:
                return i
        raise LayoutError(f"mode {label!r} not in layout {self.labels}")

    def cutoff(self, label: str) -> int:
        return self.modes[self.axis(label)][1]

    def dim_of(self, label: str) -> int:
        return self.cutoff(label) + 1

    def without(self, label: str) -> "ModeLayout":
        ax = self.axis(label)
        return ModeLayout(self.modes[:ax] + self.modes[ax + 1:])

    def relabeled(self, mapping: dict[str, str]) -> "ModeLayout":
        return ModeLayout(tuple((mapping.get(lab, lab), cut) for lab, cut in self.modes))

    def ravel_index(self, occupation: tuple[int, ...]) -> int:
        """Flat index of a joint occupation (last mode fastest)."""
        if len(occupation) != len(self.modes):
            raise LayoutError("occupation length does not match layout")
        return int(np.ravel_multi_index(occupation, self.shape))


@dataclass(frozen=True)
class StateVector:
    """Joint ket over a :class:`ModeLayout` as a flat complex array.

    ``leakage`` is a best-effort estimate of probability weight lost to the
    Fock cutoffs while constructing the state (coherent tails, displacement
    tails); it is diagnostic metadata, not part of the amplitudes.
    """

    layout: ModeLayout
    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.dim:
            raise LayoutError(
                f"amplitude length {amps.size} != layout dimension {self.layout.dim}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def grid(self) -> np.ndarray:
        """Amplitudes reshaped to the occupation grid (one axis per mode)."""
        return self.amplitudes.reshape(self.layout.shape)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm
        if n < DEFAULT_TOL.degenerate_prob:
            raise DegenerateBranchError("cannot normalize a zero state", n)
        return StateVector(self.layout, self.amplitudes / n, self.leakage)

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def relabel(state: StateVector, mapping: dict[str, str]) -> StateVector:
    """Rename modes without touching amplitudes (e.g. {a,b} -> {c,d} at a BS)."""
    return StateVector(state.layout.relabeled(mapping), state.amplitudes, state.leakage)


@dataclass(frozen=True)
class Operator:
    """Dense operator on the modes named by its layout.

    The ``hermitian``/``unitary`` flags are only set by :meth:`of`, after a
    numerical check; constructing directly leaves them False.
    """

    layout: ModeLayout
    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != self.layout.dim:
            raise LayoutError(f"matrix shape {m.shape} != layout dimension {self.layout.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def of(cls, layout: ModeLayout, matrix: np.ndarray) -> "Operator":
        m = np.asarray(matrix, dtype=complex)
        herm = bool(np.abs(m - m.conj().T).max() < DEFAULT_TOL.hermitian_atol)
        uni = bool(np.abs(m @ m.conj().T - np.eye(m.shape[0])).max() < DEFAULT_TOL.unitary_atol)
        return cls(layout, m, hermitian=herm, unitary=uni)

    def dagger(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T, self.hermitian, self.unitary)

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.layout != self.layout:
            raise LayoutError("operator layouts differ")
        return Operator.of(self.layout, self.matrix @ other.matrix)


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix over a :class:`ModeLayout`.

    The constructor checks Hermiticity only; trace normalization is the
    caller's business because postselected (sub-normalized) branches are
    legitimate intermediate objects.
    """

    layout: ModeLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != self.layout.dim:
            raise LayoutError(f"matrix shape {m.shape} != layout dimension {self.layout.dim}")
        if np.abs(m - m.conj().T).max() >= DEFAULT_TOL.density_hermitian_atol:
            raise LayoutError("density matrix is not Hermitian within tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(state.layout, np.outer(a, a.conj()))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, tol=DEFAULT_TOL) -> None:
        """Spot-check trace, Hermiticity, positivity; raise on violation."""
        if abs(self.trace - 1.0) > tol.trace_atol:
            raise TruncationError("density matrix trace deviates from 1",
                                  abs(self.trace - 1.0))
        lo = float(np.linalg.eigvalsh(self.matrix).min())
        if lo < tol.positivity_floor:
            raise TruncationError("density matrix has a negative eigenvalue", -lo)

    def partial_trace(self, keep: tuple[str, ...]) -> "DensityMatrix":
        """Reduced density matrix over ``keep`` (in the order given)."""
        labels = self.layout.labels
        for lab in keep:
            self.layout.axis(lab)  # raises on unknown label
        shape = self.layout.shape
        n = len(labels)
        t = self.matrix.reshape(shape + shape)
        # trace out modes not kept, highest axis first so lower positions stay put
        for ax in reversed(range(n)):
            if labels[ax] not in keep:
                t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
        # reorder the kept modes to the requested order
        kept_labels = [lab for lab in labels if lab in keep]
        k = len(kept_labels)
        perm = [kept_labels.index(lab) for lab in keep]
        t = t.transpose(perm + [k + p for p in perm])
        dims = [self.layout.dim_of(lab) for lab in keep]
        d = int(np.prod(dims))
        new_layout = ModeLayout(tuple((lab, self.layout.cutoff(lab)) for lab in keep))
        return DensityMatrix(new_layout, t.reshape(d, d))


# ---------------------------------------------------------------------------
# state and operator constructors

def coherent_state(alpha: complex, cutoff: int, label: str = "a",
                   leakage_tol: float | None = None) -> StateVector:
    """Truncated coherent state; amplitudes e^{-|a|^2/2} a^n / sqrt(n!).

    Raises :class:`TruncationError` when the Poisson tail past the cutoff
    exceeds ``leakage_tol`` (default ``Tolerances.coherent_leakage``).
    """
    if cutoff < 0:
        raise LayoutError("cutoff must be >= 0")
    tol = DEFAULT_TOL.coherent_leakage if leakage_tol is None else leakage_tol
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = 1.0
    for n in range(1, cutoff + 1):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    amps *= np.exp(-abs(alpha) ** 2 / 2)
    leak = poisson_tail(abs(alpha) ** 2, cutoff)
    if leak > tol:
        raise TruncationError(
            f"coherent state |alpha|^2={abs(alpha)**2:.4g} does not fit cutoff {cutoff}", leak)
    return StateVector(ModeLayout.of((label, cutoff)), amps, leakage=leak)


def fock_state(n: int, cutoff: int, label: str = "a") -> StateVector:
    if not 0 <= n <= cutoff:
        raise LayoutError(f"occupation {n} outside [0, {cutoff}]")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return StateVector(ModeLayout.of((label, cutoff)), amps)


def vacuum_state(cutoff: int, label: str = "m") -> StateVector:
    return fock_state(0, cutoff, label)


def tensor(states: list[StateVector] | tuple[StateVector, ...]) -> StateVector:
    """Product state over the concatenated layouts (order as given)."""
    if not states:
        raise LayoutError("tensor of zero states")
    modes: list[tuple[str, int]] = []
    for s in states:
        modes.extend(s.layout.modes)
    layout = ModeLayout(tuple(modes))  # raises on duplicate labels
    amps = states[0].amplitudes
    for s in states[1:]:
        amps = np.kron(amps, s.amplitudes)
    leak = 1.0
    for s in states:
        leak *= 1.0 - s.leakage
    return StateVector(layout, amps, leakage=1.0 - leak)


def annihilation(cutoff: int, label: str = "a") -> Operator:
    """a |n> = sqrt(n) |n-1> on a single truncated mode."""
    m = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)
    return Operator.of(ModeLayout.of((label, cutoff)), m)


def creation(cutoff: int, label: str = "a") -> Operator:
    return annihilation(cutoff, label).dagger()


def number(cutoff: int, label: str = "a") -> Operator:
    m = np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex)
    return Operator.of(ModeLayout.of((label, cutoff)), m)


def identity(cutoff: int, label: str = "a") -> Operator:
    return Operator.of(ModeLayout.of((label, cutoff)), np.eye(cutoff + 1, dtype=complex))


def position(cutoff: int, sigma: float = 1.0, label: str = "m") -> Operator:
    """q = sigma (c + c^dag); sigma is the zero-point spread (1 = sigma units)."""
    c = annihilation(cutoff, label).matrix
    return Operator.of(ModeLayout.of((label, cutoff)), sigma * (c + c.conj().T))


def momentum(cutoff: int, sigma: float = 1.0, label: str = "m") -> Operator:
    """p = i (c^dag - c) / (2 sigma), canonically conjugate to `position`."""
    c = annihilation(cutoff, label).matrix
    return Operator.of(ModeLayout.of((label, cutoff)), 1j * (c.conj().T - c) / (2 * sigma))


def _expm_antihermitian(generator: np.ndarray) -> np.ndarray:
    """exp(G) for anti-Hermitian G via eigendecomposition of iG (exactly unitary)."""
    w, v = np.linalg.eigh(1j * generator)
    return (v * np.exp(-1j * w)) @ v.conj().T


def displacement(beta: complex, cutoff: int, label: str = "m") -> Operator:
    """D(beta) = exp(beta c^dag - beta* c), unitary up to floating error.

    Built by Hermitian eigendecomposition of the generator, so it is unitary
    on the truncated space by construction (no series truncation to tune).
    """
    if abs(beta) ** 2 > DEFAULT_TOL.displacement_warn_ratio * max(cutoff, 1):
        warnings.warn(
            f"displacement |beta|^2={abs(beta)**2:.3g} is not small against cutoff {cutoff}",
            stacklevel=2)
    c = annihilation(cutoff, label).matrix
    mat = _expm_antihermitian(beta * c.conj().T - np.conj(beta) * c)
    op = Operator.of(ModeLayout.of((label, cutoff)), mat)
    if not op.unitary:
        dev = float(np.abs(mat @ mat.conj().T - np.eye(cutoff + 1)).max())
        raise TruncationError("displacement operator failed the unitarity check", dev)
    return op


# ---------------------------------------------------------------------------
# applying, projecting, expecting

def _check_targets(op: Operator, layout: ModeLayout, targets: tuple[str, ...]) -> None:
    if len(targets) != len(op.layout.modes):
        raise LayoutError("target list does not match operator arity")
    for t, (lab, cut) in zip(targets, op.layout.modes):
        if layout.cutoff(t) != cut:
            raise LayoutError(
                f"cutoff mismatch on mode {t!r}: state {layout.cutoff(t)}, operator {cut}")


def apply(op: Operator, state: StateVector,
          targets: tuple[str, ...] | None = None) -> StateVector:
    """Apply ``op`` on ``targets`` (default: the operator's own labels),
    acting as identity on every other mode."""
    targets = tuple(targets) if targets is not None else op.layout.labels
    _check_targets(op, state.layout, targets)
    axes = [state.layout.axis(t) for t in targets]
    tdims = [state.layout.dim_of(t) for t in targets]
    nt = len(targets)
    op_tensor = op.matrix.reshape(tuple(tdims) + tuple(tdims))
    out = np.tensordot(op_tensor, state.grid, axes=(list(range(nt, 2 * nt)), axes))
    out = np.moveaxis(out, list(range(nt)), axes)
    return StateVector(state.layout, out.reshape(-1), state.leakage)


def project_fock(state: StateVector, label: str, n: int) -> tuple[StateVector, float]:
    """Project mode ``label`` onto Fock level ``n``.

    Returns the renormalized conditional state over the remaining modes and
    the branch probability.  Raises :class:`DegenerateBranchError` instead of
    producing a NaN state when the branch has no weight.
    """
    cut = state.layout.cutoff(label)
    if not 0 <= n <= cut:
        raise LayoutError(f"Fock level {n} outside mode {label!r} cutoff {cut}")
    ax = state.layout.axis(label)
    sl = np.take(state.grid, n, axis=ax)
    prob = float(np.sum(np.abs(sl) ** 2))
    if prob < DEFAULT_TOL.degenerate_prob:
        raise DegenerateBranchError(
            f"projection onto |{n}> of mode {label!r} has no weight", prob)
    cond = StateVector(state.layout.without(label), sl.reshape(-1) / np.sqrt(prob),
                       state.leakage)
    return cond, prob


def branch_probabilities(state: StateVector, label: str) -> np.ndarray:
    """Probabilities of every Fock outcome of one mode (sums to the norm^2)."""
    ax = state.layout.axis(label)
    g = np.abs(state.grid) ** 2
    other = tuple(i for i in range(g.ndim) if i != ax)
    return g.sum(axis=other)


def reduced_density(obj: StateVector | DensityMatrix,
                    keep: tuple[str, ...]) -> DensityMatrix:
    if isinstance(obj, StateVector):
        obj = DensityMatrix.from_state(obj)
    return obj.partial_trace(keep)


def expectation(obj: StateVector | DensityMatrix, op: Operator,
                targets: tuple[str, ...] | None = None) -> complex:
    """<op> on a state or density matrix; ``targets`` as in :func:`apply`."""
    targets = tuple(targets) if targets is not None else op.layout.labels
    _check_targets(op, obj.layout, targets)
    if isinstance(obj, StateVector):
        val = complex(np.vdot(obj.amplitudes, apply(op, obj, targets).amplitudes))
    else:
        red = obj.partial_trace(targets)
        val = complex(np.trace(red.matrix @ op.matrix))
    if op.hermitian:
        assert abs(val.imag) < 1e-10, f"Hermitian expectation imag {val.imag:.2e}"
    return val


def pointer_shift(rho_f: StateVector | DensityMatrix,
                  rho_i: StateVector | DensityMatrix,
                  op: Operator,
                  targets: tuple[str, ...] | None = None) -> float:
    """Tr(rho_f M)/Tr(rho_f) - Tr(rho_i M) for a Hermitian pointer observable.

    ``rho_f`` may be sub-normalized (a postselected branch); ``rho_i`` is
    expected to be a normalized reference state.
    """
    if not op.hermitian:
        raise LayoutError("pointer_shift needs a Hermitian observable")
    if isinstance(rho_f, StateVector):
        rho_f = DensityMatrix.from_state(rho_f)
    if isinstance(rho_i, StateVector):
        rho_i = DensityMatrix.from_state(rho_i)
    tf = rho_f.trace
    if abs(tf) < DEFAULT_TOL.degenerate_prob:
        raise DegenerateBranchError("pointer_shift on a zero-weight branch", tf)
    val = expectation(rho_f, op, targets) / tf - expectation(rho_i, op, targets)
    assert abs(val.imag) < 1e-10, f"Hermitian expectation has imag {val.imag:.2e}"
    return float(val.real)
