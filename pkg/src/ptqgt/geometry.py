"""Geometric quantities on the parameter manifold of a Hamiltonian family.

Everything here is derived from one object: the complex Hermitian tensor
``Q_{n,mu nu}`` attached to level n at a parameter point. Its imaginary
part is the (real antisymmetric) Berry curvature, its real part the
(real symmetric, possibly pseudo-Riemannian) metric tensor. Berry phases
come from a gauge-invariant overlap-product estimator; the metric also
has a perturbative (sum-over-states) route and a variance form built
from the generator operators O_mu, which serve as independent
cross-checks of the finite-difference route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .biortho import (
    BiorthoEigensystem,
    HamiltonianFamily,
    biortho_eig,
    build_W,
    gauge_fix,
)
from .errors import Degenerate, MetricSingular, OpenLoop

__all__ = [
    "GeomTensor",
    "Connection",
    "LoopSpec",
    "OperatorPair",
    "DerivativeBundle",
    "default_step",
    "param_derivatives",
    "qgt",
    "berry_curvature",
    "metric_tensor",
    "metric_perturbative",
    "connection_at",
    "berry_phase_loop",
    "curvature_flux",
    "fidelity",
    "o_operators",
    "variance_metric",
    "classify_interval",
]


@dataclass(frozen=True)
class GeomTensor:
    """Level-resolved geometric tensor Q at a parameter point."""

    level: int
    point: np.ndarray
    q: np.ndarray  # (d, d) complex Hermitian
    scheme: str = "finite_difference"  # or "perturbative"


@dataclass(frozen=True)
class Connection:
    """Connection one-form components A_{n,mu}. Gauge dependent."""

    level: int
    point: np.ndarray
    a: np.ndarray  # (d,) real


@dataclass(frozen=True)
class LoopSpec:
    """Closed polygonal loop in parameter space (first vertex == last)."""

    vertices: np.ndarray  # (M, d)
    level: int

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if v.ndim != 2 or v.shape[0] < 4:
            raise ValueError("a loop needs at least 4 vertices")

    @property
    def closed(self) -> bool:
        return bool(np.allclose(self.vertices[0], self.vertices[-1], atol=1e-12))


@dataclass(frozen=True)
class OperatorPair:
    """O_mu = O_A,mu + i O_B,mu split into physically Hermitian parts."""

    o_full: np.ndarray  # (d, N, N)
    o_a: np.ndarray
    o_b: np.ndarray


@dataclass(frozen=True)
class DerivativeBundle:
    """Gauge-fixed central-difference derivatives at a parameter point.

    ``dpsi[mu][:, n]`` approximates d Psi_n / d lambda^mu in the smooth
    gauge anchored at the centre eigensystem ``eig``.
    """

    point: np.ndarray
    step: float
    eig: BiorthoEigensystem
    w: np.ndarray  # metric W at the centre
    dpsi: np.ndarray  # (d, N, N)
    dphi: np.ndarray
    dw: np.ndarray
    dh: np.ndarray


def default_step(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    return 1e-5 * (1.0 + float(np.linalg.norm(lam)))


def param_derivatives(
    family: HamiltonianFamily, lam, step: float | None = None
) -> DerivativeBundle:
    """Central differences of the gauge-fixed eigensystem at ``lam``.

    The eigensystems at ``lam +/- step e_mu`` are gauge-fixed against the
    centre so the raw solver phases difference away smoothly. ``dh`` comes
    from ``family.derivative`` when available, otherwise from central
    differences of ``family.evaluate``.

    Propagates DefectiveMatrix / AmbiguousMatching from the eigensolver
    when ``lam`` sits too close to a critical point for the chosen step.
    """
    lam = np.asarray(lam, dtype=float)
    if step is None:
        step = default_step(lam)
    if step <= 0:
        raise ValueError("step must be positive")

    eig0 = biortho_eig(family(lam))
    w0 = build_W(eig0).matrix
    d, n = family.dim_param, family.dim_hilbert

    dpsi = np.empty((d, n, n), dtype=complex)
    dphi = np.empty((d, n, n), dtype=complex)
    dw = np.empty((d, n, n), dtype=complex)
    dh = np.empty((d, n, n), dtype=complex)
    for mu in range(d):
        e = np.zeros(d)
        e[mu] = step
        eig_p = gauge_fix(eig0, biortho_eig(family(lam + e)))
        eig_m = gauge_fix(eig0, biortho_eig(family(lam - e)))
        dpsi[mu] = (eig_p.right - eig_m.right) / (2.0 * step)
        dphi[mu] = (eig_p.left - eig_m.left) / (2.0 * step)
        dw[mu] = (build_W(eig_p).matrix - build_W(eig_m).matrix) / (2.0 * step)
        dh[mu] = family.deriv(lam, mu, step=step)

    return DerivativeBundle(
        point=lam, step=step, eig=eig0, w=w0, dpsi=dpsi, dphi=dphi, dw=dw, dh=dh
    )


def _check_gap(eig: BiorthoEigensystem, n: int, tol: float | None = None):
    e = eig.energies
    scale = max(float(np.max(np.abs(e))), 1e-300)
    if tol is None:
        tol = 1e-8 * scale
    others = np.delete(np.arange(e.shape[0]), n)
    gap = float(np.min(np.abs(e[others] - e[n]))) if others.size else np.inf
    if gap < tol:
        raise Degenerate(f"level {n} gap {gap:.3e} below tolerance {tol:.3e}")


def _qgt_from_states(psi, phi, dpsi_n, dphi_n) -> np.ndarray:
    """Assemble Q from a level's vectors and their parameter derivatives.

    ``dpsi_n[mu]`` is the derivative vector along direction mu. The
    returned matrix is exactly Hermitian by construction.
    """
    d = dpsi_n.shape[0]
    q = np.empty((d, d), dtype=complex)
    a_phi = dphi_n.conj() @ psi  # <d_mu Phi | Psi>
    a_psi = dpsi_n.conj() @ phi  # <d_mu Psi | Phi>
    b_psi = dpsi_n @ phi.conj()  # <Phi | d_nu Psi>
    b_phi = dphi_n @ psi.conj()  # <Psi | d_nu Phi>
    for mu in range(d):
        for nu in range(d):
            q[mu, nu] = 0.5 * (
                np.vdot(dphi_n[mu], dpsi_n[nu])
                - a_phi[mu] * b_psi[nu]
                + np.vdot(dpsi_n[mu], dphi_n[nu])
                - a_psi[mu] * b_phi[nu]
            )
    return q


def qgt(
    family: HamiltonianFamily,
    lam,
    n: int = 0,
    step: float | None = None,
    bundle: DerivativeBundle | None = None,
) -> GeomTensor:
    """Extended geometric tensor of level ``n`` at ``lam`` by differencing.

    A precomputed ``bundle`` may be passed to share derivatives between
    levels. Raises Degenerate when the level gap is below tolerance.
    """
    if bundle is None:
        bundle = param_derivatives(family, lam, step)
    _check_gap(bundle.eig, n)
    q = _qgt_from_states(
        bundle.eig.right[:, n],
        bundle.eig.left[:, n],
        bundle.dpsi[:, :, n],
        bundle.dphi[:, :, n],
    )
    return GeomTensor(level=n, point=bundle.point, q=q, scheme="finite_difference")


def berry_curvature(q: GeomTensor) -> np.ndarray:
    """Berry curvature Omega = Im Q; real antisymmetric."""
    return np.ascontiguousarray(q.q.imag)


def metric_tensor(q: GeomTensor) -> np.ndarray:
    """Metric tensor g = Re Q; real symmetric."""
    return np.ascontiguousarray(q.q.real)


def _metric_perturbative_level(
    eig: BiorthoEigensystem, dh: Sequence[np.ndarray], n: int, tol: float | None = None
) -> np.ndarray:
    """Sum-over-states metric for level ``n``; no eigenvector differencing."""
    _check_gap(eig, n, tol)
    d = len(dh)
    e = eig.energies
    psi, phi = eig.right, eig.left
    # amp[mu][m, l] = <Phi_m | d_mu H | Psi_l>
    amp = np.stack([phi.conj().T @ np.asarray(dh[mu]) @ psi for mu in range(d)])
    others = np.delete(np.arange(e.shape[0]), n)
    denom = 2.0 * np.abs(e[n] - e[others]) ** 2
    g = np.empty((d, d), dtype=float)
    for mu in range(d):
        for nu in range(d):
            num = (
                amp[mu, n, others] * amp[nu, others, n]
                + amp[mu, others, n] * amp[nu, n, others]
            )
            g[mu, nu] = float(np.sum((num / denom).real))
    return g


def metric_perturbative(eig: BiorthoEigensystem, dh: Sequence[np.ndarray]) -> np.ndarray:
    """Ground-state metric from the sum-over-states formula.

    ``dh[mu]`` is the analytic (or independently differenced) matrix
    derivative of H along direction mu. The ground state is the lowest
    level in the (Re E, Im E) ordering. Raises Degenerate on a vanishing
    denominator -- that singularity is the critical-point signal.
    """
    return _metric_perturbative_level(eig, dh, n=0)


def connection_at(
    family: HamiltonianFamily, lam, n: int = 0, step: float | None = None
) -> Connection:
    """Connection A_{n,mu} = Im <Phi_n|d_mu Psi_n> in the module's gauge."""
    bundle = param_derivatives(family, lam, step)
    phi = bundle.eig.left[:, n]
    a = np.array(
        [np.vdot(phi, bundle.dpsi[mu][:, n]).imag for mu in range(family.dim_param)]
    )
    return Connection(level=n, point=bundle.point, a=a)


def berry_phase_loop(family: HamiltonianFamily, loop: LoopSpec) -> float:
    """Berry phase from the discrete overlap product around a closed loop.

    gamma = -arg prod_i <Phi_n(lam_i)|Psi_n(lam_{i+1})>, cyclic over the
    vertex sequence. Exactly invariant under per-vertex gauge changes;
    converges to the line integral of the connection as the vertex
    spacing shrinks. Principal value in (-pi, pi].
    """
    if not loop.closed:
        raise OpenLoop("first and last loop vertices differ")
    verts = loop.vertices[:-1]
    eigs = []
    for v in verts:
        e = biortho_eig(family(v))
        _check_gap(e, loop.level)
        eigs.append(e)
    prod = 1.0 + 0.0j
    m = len(eigs)
    for i in range(m):
        j = (i + 1) % m
        prod *= np.vdot(eigs[i].left[:, loop.level], eigs[j].right[:, loop.level])
    if prod == 0:
        raise Degenerate("vanishing overlap along the loop")
    gamma = -float(np.angle(prod))
    if gamma <= -np.pi:  # pin the branch to (-pi, pi]
        gamma += 2.0 * np.pi
    return gamma


def curvature_flux(
    family: HamiltonianFamily,
    lam_min,
    lam_max,
    plane: tuple[int, int] = (0, 1),
    resolution: int = 32,
    n: int = 0,
    step: float | None = None,
) -> float:
    """Surface integral of the curvature two-form over an axis rectangle.

    Midpoint rule on a ``resolution x resolution`` grid in the (mu, nu)
    plane; other coordinates are held at ``lam_min``. The two-form flux
    picks up both index orders, hence the factor 2 on Omega_{mu nu}.
    Satisfies flux + boundary Berry phase -> 0 (Stokes) as the grids
    refine.
    """
    lam_min = np.asarray(lam_min, dtype=float)
    lam_max = np.asarray(lam_max, dtype=float)
    mu, nu = plane
    xs = np.linspace(lam_min[mu], lam_max[mu], resolution + 1)
    ys = np.linspace(lam_min[nu], lam_max[nu], resolution + 1)
    xc = 0.5 * (xs[:-1] + xs[1:])
    yc = 0.5 * (ys[:-1] + ys[1:])
    da = (xs[1] - xs[0]) * (ys[1] - ys[0])
    total = 0.0
    base = lam_min.copy()
    for x in xc:
        for y in yc:
            pt = base.copy()
            pt[mu] = x
            pt[nu] = y
            omega = qgt(family, pt, n, step).q.imag
            total += 2.0 * omega[mu, nu] * da
    return total


def fidelity(eig_a: BiorthoEigensystem, eig_b: BiorthoEigensystem, n: int = 0) -> float:
    """Fidelity between level-n biorthogonal density operators.

    F = sqrt(|<Phi_n(b)|Psi_n(a)><Phi_n(a)|Psi_n(b)>|); equals 1 when the
    eigensystems coincide and is invariant under gauge rescalings on
    either side.
    """
    o_ba = np.vdot(eig_b.left[:, n], eig_a.right[:, n])
    o_ab = np.vdot(eig_a.left[:, n], eig_b.right[:, n])
    return float(np.sqrt(np.abs(o_ba * o_ab)))


def o_operators(
    family: HamiltonianFamily,
    lam,
    step: float | None = None,
    bundle: DerivativeBundle | None = None,
) -> OperatorPair:
    """Generators O_mu = i sum_n |d_mu Psi_n><Phi_n| and their A/B split.

    O_B,mu = -1/2 W^{-1} d_mu W is (minus) the gauge field driving the
    inner-product drift; O_A,mu = O_mu - i O_B,mu. Both parts are
    Hermitian in the W inner product.
    """
    if bundle is None:
        bundle = param_derivatives(family, lam, step)
    d = family.dim_param
    left_h = bundle.eig.left.conj().T
    o_full = 1j * np.stack([bundle.dpsi[mu] @ left_h for mu in range(d)])
    try:
        o_b = -0.5 * np.stack(
            [np.linalg.solve(bundle.w, bundle.dw[mu]) for mu in range(d)]
        )
    except np.linalg.LinAlgError as exc:
        raise MetricSingular("metric W is numerically singular") from exc
    o_a = o_full - 1j * o_b
    return OperatorPair(o_full=o_full, o_a=o_a, o_b=o_b)


def variance_metric(
    family: HamiltonianFamily, lam, step: float | None = None
) -> np.ndarray:
    """Ground-state metric from centred anticommutators of O_A and O_B.

    g_{mu nu} = 1/2 (<{O_A,mu - <O_A,mu>, ...}> - <{O_B,mu - ..., ...}>)
    with expectations <X> = <Phi_0|X|Psi_0>. Agrees with Re Q from the
    differencing route up to the shared O(step^2) error.
    """
    bundle = param_derivatives(family, lam, step)
    _check_gap(bundle.eig, 0)
    ops = o_operators(family, lam, step, bundle=bundle)
    psi0 = bundle.eig.right[:, 0]
    phi0 = bundle.eig.left[:, 0]

    def expect(x):
        return np.vdot(phi0, x @ psi0)

    d = family.dim_param
    oa = [ops.o_a[mu] - expect(ops.o_a[mu]) * np.eye(bundle.w.shape[0]) for mu in range(d)]
    ob = [ops.o_b[mu] - expect(ops.o_b[mu]) * np.eye(bundle.w.shape[0]) for mu in range(d)]
    g = np.empty((d, d), dtype=float)
    for mu in range(d):
        for nu in range(d):
            anti_a = expect(oa[mu] @ oa[nu] + oa[nu] @ oa[mu])
            anti_b = expect(ob[mu] @ ob[nu] + ob[nu] @ ob[mu])
            g[mu, nu] = 0.5 * float((anti_a - anti_b).real)
    return g


def classify_interval(g, dlam) -> tuple[float, str]:
    """Sign-classify ds^2 = g_{mu nu} dlam^mu dlam^nu.

    Returns ``(ds2, kind)`` with kind one of 'spacelike' (> 0),
    'lightlike' (within the round-off band of 0) or 'timelike' (< 0).
    """
    g = np.asarray(g, dtype=float)
    dlam = np.asarray(dlam, dtype=float)
    ds2 = float(dlam @ g @ dlam)
    band = 1e-12 * float(np.linalg.norm(g)) * float(dlam @ dlam)
    if abs(ds2) <= band:
        return ds2, "lightlike"
    return ds2, "spacelike" if ds2 > 0 else "timelike"
