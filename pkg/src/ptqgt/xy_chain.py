"""Dimerized XY chain in an alternating complex field, momentum-block form.

The many-body chain reduces (Jordan-Wigner + Fourier) to independent
4x4 blocks D_k over 0 < k < pi/2. This module provides the blocks, the
closed-form dispersion, the analytic unbroken/critical structure, and
the thermodynamic-limit metric intensity as a momentum integral over
the occupied (negative-energy) levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import geometry
from .biortho import BiorthoEigensystem, HamiltonianFamily, biortho_eig
from .errors import CaseUnsupported, Degenerate, GaplessPoint, QuadratureUnconverged

__all__ = [
    "XYParams",
    "FieldPoint",
    "CriticalSet",
    "Dispersion",
    "dk_matrix",
    "dk_family",
    "dispersion",
    "unbroken_at",
    "critical_set",
    "occupied_levels",
    "metric_intensity",
]

_CASE_TOL = 1e-12


@dataclass(frozen=True)
class XYParams:
    """Coupling constants: homogeneous/staggered isotropic (J, Js) and
    anisotropic (Gamma, Gammas) strengths. All strictly positive."""

    J: float
    Js: float
    Gamma: float
    Gammas: float

    def __post_init__(self):
        if min(self.J, self.Js, self.Gamma, self.Gammas) <= 0:
            raise ValueError("all coupling constants must be strictly positive")

    @property
    def case(self) -> str:
        if abs(self.J * self.Gamma - self.Js * self.Gammas) <= _CASE_TOL:
            return "pseudo_isotropic"
        return "anisotropic"

    def check_analytic_case(self):
        """The closed-form critical structure needs either the
        pseudo-isotropic case or the balanced anisotropic one."""
        if self.case == "anisotropic":
            if abs(self.J * self.Gammas - self.Js * self.Gamma) > _CASE_TOL:
                raise CaseUnsupported(
                    "anisotropic case requires J*Gammas == Js*Gamma for the "
                    "analytic critical-field formulas"
                )
            if not (self.J > self.Gammas and self.Js > self.Gamma):
                raise CaseUnsupported("need J > Gammas and Js > Gamma")

    @property
    def eta_c(self) -> float:
        return 2.0 * min(self.J, self.Js)


@dataclass(frozen=True)
class FieldPoint:
    """Field strength (h, eta); the parameter point lambda = (h, eta)."""

    h: float
    eta: float

    @property
    def r(self) -> float:
        return float(np.hypot(self.h, self.eta))


@dataclass(frozen=True)
class CriticalSet:
    r_c1: float
    r_c2: float
    eta_c: float
    case: str
    qpt_description: str


@dataclass(frozen=True)
class Dispersion:
    lambda_plus: complex
    lambda_minus: complex
    c2: float
    c4: float


def dk_matrix(p: XYParams, f: FieldPoint, k: float) -> np.ndarray:
    """Momentum block D_k for 0 < k < pi/2.

    Anticommutes with I_2 x sigma_x, so the spectrum is symmetric about
    zero.
    """
    if not 0.0 < k < np.pi / 2:
        raise ValueError("k must lie in the open interval (0, pi/2)")
    jc = 2.0 * p.J * np.cos(k)
    gs = 2.0 * p.Gamma * np.sin(k)
    gc = 2.0 * p.Gammas * np.cos(k)
    js = 2.0 * p.Js * np.sin(k)
    h, eta = f.h, f.eta
    return np.array(
        [
            [jc + h, 1j * gs, -gc, -1j * (js + eta)],
            [-1j * gs, -jc - h, 1j * (js + eta), gc],
            [-gc, -1j * (js - eta), jc - h, 1j * gs],
            [1j * (js - eta), gc, -1j * gs, -jc + h],
        ],
        dtype=complex,
    )


_DH = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)
_DETA = np.array(
    [
        [0, 0, 0, -1j],
        [0, 0, 1j, 0],
        [0, 1j, 0, 0],
        [-1j, 0, 0, 0],
    ],
    dtype=complex,
)


def dk_family(p: XYParams, k: float) -> HamiltonianFamily:
    """D_k as a family over lambda = (h, eta), with analytic derivatives."""

    def evaluate(lam):
        return dk_matrix(p, FieldPoint(h=lam[0], eta=lam[1]), k)

    def derivative(lam, mu):
        return _DH if mu == 0 else _DETA

    return HamiltonianFamily(
        dim_hilbert=4, dim_param=2, evaluate=evaluate, derivative=derivative
    )


def _c2_c4(p: XYParams, h, eta, k):
    cos2 = np.cos(k) ** 2
    sin2 = np.sin(k) ** 2
    c2 = (
        h**2
        - eta**2
        + 4.0 * (p.J**2 + p.Gammas**2) * cos2
        + 4.0 * (p.Js**2 + p.Gamma**2) * sin2
    )
    c4 = (
        h**2
        + eta**2
        - 4.0 * (p.J**2 - p.Gammas**2) * cos2
        - 4.0 * (p.Js**2 - p.Gamma**2) * sin2
    ) ** 2 + 16.0 * (p.J * p.Gamma - p.Js * p.Gammas) ** 2 * np.sin(2.0 * k) ** 2
    return c2, c4


def dispersion(p: XYParams, f: FieldPoint, k: float) -> Dispersion:
    """Closed-form single-particle energies Lambda_+-(k).

    Real when c2 >= 0 and c2^2 >= c4 (unbroken regime); complex values
    signal PT breaking at this momentum.
    """
    if not 0.0 < k < np.pi / 2:
        raise ValueError("k must lie in the open interval (0, pi/2)")
    c2, c4 = _c2_c4(p, f.h, f.eta, k)
    root = np.sqrt(complex(c2**2 - c4))
    lp = np.sqrt(c2 + root)
    lm = np.sqrt(c2 - root)
    return Dispersion(
        lambda_plus=complex(lp), lambda_minus=complex(lm), c2=float(c2), c4=float(c4)
    )


def unbroken_at(p: XYParams, f: FieldPoint, n_grid: int = 256) -> dict:
    """PT-unbroken verdicts: analytic |eta| < eta_c and a numeric k-scan."""
    p.check_analytic_case()
    analytic = abs(f.eta) < p.eta_c
    ks = (np.arange(n_grid) + 0.5) * (np.pi / 2) / n_grid
    c2, c4 = _c2_c4(p, f.h, f.eta, ks)
    numeric = bool(np.all(c2**2 - c4 > 0) and np.all(c2 > 0))
    return {"analytic": analytic, "numeric": numeric}


def critical_set(p: XYParams) -> CriticalSet:
    """Closed-form critical fields and the locus of QPT points."""
    p.check_analytic_case()
    r_c1 = 2.0 * np.sqrt(p.J**2 - p.Gammas**2)
    r_c2 = 2.0 * np.sqrt(p.Js**2 - p.Gamma**2)
    if p.case == "anisotropic":
        desc = (
            f"QPT points on the circles r = r_c1 = {r_c1:.6g} and "
            f"r = r_c2 = {r_c2:.6g}; PT breaking at |eta| = {p.eta_c:.6g}"
        )
    else:
        lo, hi = sorted((r_c1, r_c2))
        desc = (
            f"QPT points fill the annulus {lo:.6g} <= r <= {hi:.6g}; "
            f"PT breaking at |eta| = {p.eta_c:.6g}"
        )
    return CriticalSet(
        r_c1=float(r_c1),
        r_c2=float(r_c2),
        eta_c=p.eta_c,
        case=p.case,
        qpt_description=desc,
    )


def occupied_levels(eig: BiorthoEigensystem, tol: float | None = None) -> list[int]:
    """Indices of negative-energy levels (the ground-state occupation).

    Raises GaplessPoint when a level sits at zero energy within tol.
    """
    e = eig.energies.real
    scale = max(float(np.max(np.abs(e))), 1e-300)
    if tol is None:
        tol = 1e-8 * scale
    if np.any(np.abs(e) < tol):
        raise GaplessPoint(f"level within {tol:.2e} of zero energy")
    return [int(i) for i in np.flatnonzero(e < 0)]


def _gl_nodes(n_quad: int):
    x, w = leggauss(n_quad)
    half = np.pi / 4.0
    return half * (x + 1.0), half * w


def _intensity_perturbative(p: XYParams, f: FieldPoint, n_quad: int) -> np.ndarray:
    """Vectorized sum-over-states route; one stacked eigensolve per call.

    For the 4x4 blocks the left vectors come from inverting the right
    eigenvector matrix, which is exact biorthogonality at this size.
    """
    ks, wts = _gl_nodes(n_quad)
    blocks = np.stack([dk_matrix(p, f, k) for k in ks])
    evals, vr = np.linalg.eig(blocks)
    order = np.lexsort((evals.imag, evals.real))
    evals = np.take_along_axis(evals, order, axis=1)
    vr = np.take_along_axis(vr, order[:, None, :], axis=2)
    try:
        vr_inv = np.linalg.inv(vr)  # rows are <phi_n|
    except np.linalg.LinAlgError as exc:
        raise Degenerate("eigenvector matrix singular at a quadrature node") from exc

    amp_h = vr_inv @ _DH @ vr  # [node, m, l] = <phi_m| dH/dh |psi_l>
    amp_e = vr_inv @ _DETA @ vr
    amps = (amp_h, amp_e)

    total = np.zeros((2, 2))
    e_scale = max(float(np.max(np.abs(evals.real))), 1e-300)
    for i in range(n_quad):
        e = evals[i].real
        if np.any(np.abs(evals[i].imag) > 1e-9 * e_scale):
            raise Degenerate(f"complex block spectrum at k = {ks[i]:.6f}")
        if np.any(np.abs(e) < 1e-10 * e_scale):
            raise GaplessPoint(f"gap closes at quadrature node k = {ks[i]:.6f}")
        occ = np.flatnonzero(e < 0)
        for n in occ:
            others = np.delete(np.arange(4), n)
            gaps = e[n] - e[others]
            if np.any(np.abs(gaps) < 1e-10 * e_scale):
                raise Degenerate(f"level crossing at quadrature node k = {ks[i]:.6f}")
            denom = 2.0 * gaps**2
            for mu in range(2):
                for nu in range(2):
                    num = (
                        amps[mu][i, n, others] * amps[nu][i, others, n]
                        + amps[mu][i, others, n] * amps[nu][i, n, others]
                    )
                    # factor 2: the intensity integrand is twice the
                    # per-mode metric in the 1/2-prefactor convention
                    total[mu, nu] += wts[i] * 2.0 * float(np.sum((num / denom).real))
    return total / (4.0 * np.pi)


def _intensity_fd(p: XYParams, f: FieldPoint, n_quad: int, step: float) -> np.ndarray:
    ks, wts = _gl_nodes(n_quad)
    total = np.zeros((2, 2))
    lam = np.array([f.h, f.eta])
    for k, w in zip(ks, wts):
        fam = dk_family(p, k)
        bundle = geometry.param_derivatives(fam, lam, step)
        occ = occupied_levels(bundle.eig)
        for n in occ:
            g = geometry.qgt(fam, lam, n, bundle=bundle).q.real
            total += w * 2.0 * g
    return total / (4.0 * np.pi)


def metric_intensity(
    p: XYParams,
    f: FieldPoint,
    n_quad: int = 129,
    method: str = "perturbative",
    step: float = 1e-5,
    check_convergence: bool = False,
) -> np.ndarray:
    """Thermodynamic-limit metric intensity g-bar at a field point.

    Gauss-Legendre quadrature on (0, pi/2) of the per-mode metric summed
    over occupied levels, prefactor 1/(4 pi). ``method`` selects the
    sum-over-states route ('perturbative', default: analytic dH, one
    eigensolve per node) or the finite-difference route ('fd', the
    generic geometry pipeline, used for cross-validation).

    With ``check_convergence`` the quadrature is repeated at 2*n_quad and
    QuadratureUnconverged is raised if any entry moves by more than 1e-4
    relative.
    """
    if n_quad < 2:
        raise ValueError("n_quad must be at least 2")
    if method == "perturbative":
        compute = lambda nq: _intensity_perturbative(p, f, nq)
    elif method == "fd":
        compute = lambda nq: _intensity_fd(p, f, nq, step)
    else:
        raise ValueError(f"unknown method {method!r}")
    g = compute(n_quad)
    if check_convergence:
        g2 = compute(2 * n_quad)
        denom = max(float(np.max(np.abs(g))), 1e-300)
        if float(np.max(np.abs(g2 - g))) > 1e-4 * denom:
            raise QuadratureUnconverged(
                f"quadrature not converged at n_quad = {n_quad}"
            )
        g = g2
    return g
