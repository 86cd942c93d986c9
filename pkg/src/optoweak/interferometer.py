"""The full postselected weak-measurement protocol.

Pipeline: symmetric preselection into the two arms, optomechanical
interaction in arm ``a``, imbalanced recombination onto output ports
``c`` (bright) and ``d`` (dark), Fock-resolved dark-port postselection,
conditional mirror statistics.

Sign convention: the mixing angle is ``theta = pi/4 + delta``; for real
positive drive the dark-port coherent amplitude is ``alpha sin(delta)``, so a
positive postselection parameter gives a positive single-photon enhancement
of the mirror displacement.  Locked by a regression test.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import EvolutionParams, factored_propagate
from .errors import DegenerateBranchError, LayoutError, TruncationError
from .fock import (DensityMatrix, ModeLayout, Operator, StateVector,
                   annihilation, apply, branch_probabilities, coherent_state,
                   cutoff_for_leakage, fock_state, number, position,
                   project_fock, reduced_density, relabel, tensor,
                   vacuum_state)
from .tolerances import DEFAULT_TOL

PRESELECT_LEAKAGE = 1e-9


def default_optical_cutoff(alpha2: float) -> int:
    """ceil(|alpha|^2 + 6 sqrt(max(|alpha|^2, 1))), floored so each arm's
    Poisson tail stays below half the preselection leakage budget.

    The 6-sigma rule alone undershoots for small mean photon numbers (the
    Poisson skew beats the normal approximation there), hence the floor.
    """
    rule = math.ceil(alpha2 + 6.0 * math.sqrt(max(alpha2, 1.0)))
    return cutoff_for_leakage(alpha2 / 2.0, PRESELECT_LEAKAGE / 2.0, start=rule)


@dataclass(frozen=True)
class ProtocolParams:
    """Drive amplitude, postselection parameter, evolution, cutoffs."""

    alpha: complex
    delta: float
    evolution: EvolutionParams
    optical_cutoff: int | None = None
    mirror_cutoff: int = 10
    dark_port_max_click: int = 1

    def __post_init__(self):
        if abs(self.delta) >= math.pi / 4:
            raise LayoutError("|delta| must be < pi/4")
        if self.alpha2 * self.delta ** 2 > DEFAULT_TOL.small_param_warn:
            warnings.warn(
                f"|alpha|^2 delta^2 = {self.alpha2 * self.delta**2:.3g} is not small; "
                "closed-form comparisons will degrade", stacklevel=2)

    @property
    def alpha2(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def n_opt(self) -> int:
        if self.optical_cutoff is not None:
            return self.optical_cutoff
        return default_optical_cutoff(self.alpha2)


@dataclass(frozen=True)
class ProtocolOutcome:
    """Dark-port branch probabilities and conditional mirror statistics.

    Position moments are in zero-point (sigma) units.  Degenerate branches
    (e.g. the click branch at zero drive) carry NaN moments plus a reason.
    """

    p_click: float
    p_noclick: float
    p_residual: float
    q_click: float
    q_noclick: float
    dq_click: float
    dq_noclick: float
    diff: float
    mirror_click: DensityMatrix | None
    mirror_noclick: DensityMatrix | None
    degenerate_reason: str | None = None


def preselect(params: ProtocolParams) -> StateVector:
    """|alpha/sqrt2>_a |alpha/sqrt2>_b |0>_m (truncated, leakage-checked).

    No optical phases here: those belong to the evolution step.
    """
    arm_alpha = params.alpha / math.sqrt(2.0)
    arm_a = coherent_state(arm_alpha, params.n_opt, "a", leakage_tol=PRESELECT_LEAKAGE / 2)
    arm_b = coherent_state(arm_alpha, params.n_opt, "b", leakage_tol=PRESELECT_LEAKAGE / 2)
    psi = tensor([arm_a, arm_b, vacuum_state(params.mirror_cutoff, "m")])
    if psi.leakage > PRESELECT_LEAKAGE:
        raise TruncationError("preselected state leaks past the optical cutoffs",
                              psi.leakage)
    return psi


@lru_cache(maxsize=16)
def _bs_generator_eig(d1: int, d2: int):
    """Eigendecomposition of i(a^dag b - a b^dag), cached per dimension pair."""
    a = annihilation(d1 - 1).matrix
    b = annihilation(d2 - 1).matrix
    g1 = np.kron(a.conj().T, b) - np.kron(a, b.conj().T)
    w, v = np.linalg.eigh(1j * g1)
    return w, v


def beam_splitter(theta: float, cutoff_first: int, cutoff_second: int,
                  labels: tuple[str, str] = ("a", "b")) -> Operator:
    """Two-mode mixer with outputs c = cos a + sin b, d = sin a - cos b.

    Realized as exp[theta(a^dag b - a b^dag)] followed by a pi phase flip on
    the second output (the target map has determinant -1).  Coherent inputs
    map to coherent outputs with amplitudes given by the same matrix.
    """
    d1, d2 = cutoff_first + 1, cutoff_second + 1
    w, v = _bs_generator_eig(d1, d2)
    rot = (v * np.exp(-1j * w * theta)) @ v.conj().T
    flip = np.where(np.tile(np.arange(d2), d1) % 2, -1.0, 1.0)
    mat = flip[:, None] * rot
    layout = ModeLayout.of((labels[0], cutoff_first), (labels[1], cutoff_second))
    op = Operator.of(layout, mat)
    if not op.unitary:
        dev = float(np.abs(mat @ mat.conj().T - np.eye(d1 * d2)).max())
        raise TruncationError("beam splitter failed the unitarity check", dev)
    return op


def _mirror_stats(branch: StateVector, mirror_cutoff: int):
    """Reduced mirror state plus <q>, dq (sigma units) vs the ground state."""
    rho = reduced_density(branch, ("m",))
    q = position(mirror_cutoff, 1.0, "m").matrix
    tq = float(np.trace(rho.matrix @ q).real)
    tq2 = float(np.trace(rho.matrix @ (q @ q)).real)
    return rho, tq, math.sqrt(max(tq2 - tq * tq, 0.0))


def evolve_and_recombine(params: ProtocolParams) -> StateVector:
    """Preselect, interact in arm a, recombine; returns the state on {c,d,m}."""
    psi = preselect(params).normalize()
    psi = factored_propagate(psi, params.evolution, coupled="a", mirror="m")
    bs = beam_splitter(math.pi / 4 + params.delta, params.n_opt, params.n_opt,
                       labels=("a", "b"))
    psi = apply(bs, psi)
    return relabel(psi, {"a": "c", "b": "d"})


def run_protocol(params: ProtocolParams) -> ProtocolOutcome:
    """Run the full pipeline and collect both dark-port branches.

    The bright port is never conditioned: expectations are taken on the joint
    conditional (c, m) state, which equals tracing out c.  Dark-port outcomes
    above ``dark_port_max_click`` are accumulated into a residual
    probability.
    """
    psi = evolve_and_recombine(params)
    probs = branch_probabilities(psi, "d")
    p_noclick = float(probs[0])
    p_click = float(probs[1]) if probs.size > 1 else 0.0
    p_residual = float(probs[min(params.dark_port_max_click + 1, probs.size):].sum())

    reason = None
    try:
        noclick, _ = project_fock(psi, "d", 0)
        rho_nc, q_nc, dq_nc = _mirror_stats(noclick, params.mirror_cutoff)
    except DegenerateBranchError as err:
        rho_nc, q_nc, dq_nc = None, math.nan, math.nan
        reason = f"noclick:{err}"
    try:
        click, _ = project_fock(psi, "d", 1)
        rho_c, q_c, dq_c = _mirror_stats(click, params.mirror_cutoff)
    except DegenerateBranchError as err:
        rho_c, q_c, dq_c = None, math.nan, math.nan
        reason = f"click:{err}" if reason is None else reason + f"; click:{err}"

    return ProtocolOutcome(
        p_click=p_click, p_noclick=p_noclick, p_residual=p_residual,
        q_click=q_c, q_noclick=q_nc, dq_click=dq_c, dq_noclick=dq_nc,
        diff=q_c - q_nc,
        mirror_click=rho_c, mirror_noclick=rho_nc,
        degenerate_reason=reason)


def weak_value_numeric(params: ProtocolParams) -> float:
    """<psi_f| n_a |psi_i> / <psi_f|psi_i> in the truncated space.

    ``psi_i`` is the preselected light expressed on the output ports,
    ``psi_f`` postselects one dark-port photon; the arm-a number operator is
    expanded as cos^2 n_c + cos sin (a_c^dag a_d + a_c a_d^dag) + sin^2 n_d.
    The coupling plays no role: the weak value is a light-only quantity.
    """
    theta = math.pi / 4 + params.delta
    phase = 1.0 + 0j
    if params.evolution.include_r_phase and params.evolution.r != 0.0:
        phase = np.exp(-1j * params.evolution.r * params.evolution.wm_t)
    u = params.alpha * phase * (math.cos(theta) + math.sin(theta)) / math.sqrt(2.0)
    v = params.alpha * phase * (math.sin(theta) - math.cos(theta)) / math.sqrt(2.0)
    # the bright port carries nearly all photons; size the space for it
    n_opt = cutoff_for_leakage(abs(u) ** 2, 1e-10, start=params.n_opt)
    cu = coherent_state(u, n_opt, "c").amplitudes
    cv = coherent_state(v, n_opt, "d", leakage_tol=1.0).amplitudes
    one = fock_state(1, n_opt, "d").amplitudes
    a = annihilation(n_opt).matrix
    n_op = number(n_opt).matrix

    cth, sth = math.cos(theta), math.sin(theta)
    # all brackets factorize over the two product states
    den = complex(np.vdot(cu, cu)) * complex(np.vdot(one, cv))
    if abs(den) < 1e-30:
        raise DegenerateBranchError("pre/post selection overlap vanishes", abs(den))
    num = (cth ** 2 * np.vdot(cu, n_op @ cu) * np.vdot(one, cv)
           + cth * sth * (np.vdot(cu, a.conj().T @ cu) * np.vdot(one, a @ cv)
                          + np.vdot(cu, a @ cu) * np.vdot(one, a.conj().T @ cv))
           + sth ** 2 * np.vdot(cu, cu) * np.vdot(one, n_op @ cv))
    wv = complex(num) / den
    if complex(params.alpha).imag == 0.0:
        assert abs(wv.imag) < 1e-8, f"weak value imag {wv.imag:.2e} for real drive"
    return float(wv.real)
