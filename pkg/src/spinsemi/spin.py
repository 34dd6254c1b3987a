"""Spin-j operators, spin coherent states, and the classical Hamiltonian.

Conventions (used everywhere downstream):
  * basis |{-j+n}> with n = 0..2j, so J3 is diagonal ascending;
  * subsystem x is the left Kronecker factor;
  * spin operators are dimensionless (angular momentum / hbar);
  * stereographic labels live in the chart excluding the |+j> pole.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, ScaleOverflow
from .numerics import kron

# two_j * log(1 + |s|^2) beyond this makes (1+|s|^2)^j overflow doubles
_LOG_RANGE_GUARD = 600.0


@dataclass(frozen=True)
class SpinSystem:
    """Two identical spin-j subsystems; j is stored exactly as two_j."""

    two_j: int
    hbar: float = 1.0

    def __post_init__(self):
        if self.two_j < 0 or int(self.two_j) != self.two_j:
            raise ValueError("two_j must be a non-negative integer")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @property
    def j(self):
        return self.two_j / 2.0

    @property
    def dim(self):
        """Dimension of one subsystem."""
        return self.two_j + 1

    @property
    def joint_dim(self):
        return self.dim * self.dim

    @property
    def hbar_j(self):
        """The semiclassical scale hbar*j kept finite in the classical limit."""
        return self.hbar * self.two_j / 2.0


@dataclass(frozen=True)
class CoherentLabel:
    """Stereographic labels of the two subsystems' coherent states."""

    sx: complex
    sy: complex

    def __post_init__(self):
        for name, s in (("sx", self.sx), ("sy", self.sy)):
            if not np.isfinite(complex(s)):
                raise ValueError(f"{name} must be finite (the |+j> pole is excluded)")

    def conj(self):
        return CoherentLabel(np.conj(self.sx), np.conj(self.sy))


class HamiltonianModel:
    """Joint-space operator plus its analytically continued classical function.

    htilde(u, v) continues the coherent-state expectation <s|H|s> to
    independent complex arguments u = (ux, uy), v = (vx, vy); grad and hess
    return its first and second partials in the order
    (d/dux, d/duy, d/dvx, d/dvy).

    The operator matrix may be supplied lazily through a factory so that
    purely classical work on large spins never materializes the joint-space
    matrix.
    """

    def __init__(self, htilde, grad, hess, label="", sys=None,
                 operator=None, operator_factory=None):
        if operator is None and operator_factory is None:
            raise ValueError("provide operator or operator_factory")
        self.htilde = htilde
        self.grad = grad
        self.hess = hess
        self.label = label
        self.sys = sys
        self._operator = None if operator is None else np.asarray(operator, dtype=complex)
        self._operator_factory = operator_factory

    @property
    def operator(self):
        if self._operator is None:
            self._operator = np.asarray(self._operator_factory(), dtype=complex)
        return self._operator


def binom_sqrt_weights(two_j):
    """sqrt(binomial(2j, n)) for n = 0..2j, by cumulative ratio products."""
    w = np.empty(two_j + 1)
    w[0] = 1.0
    for n in range(two_j):
        w[n + 1] = w[n] * math.sqrt((two_j - n) / (n + 1))
    return w


def build_spin_operators(sys):
    """Ladder and J3 matrices for one spin-j subsystem.

    Jplus[n+1, n] = sqrt((2j-n)(n+1)); J3 = diag(-j, ..., +j).
    """
    d = sys.dim
    j = sys.j
    j3 = np.diag(np.arange(d) - j).astype(complex)
    jplus = np.zeros((d, d), dtype=complex)
    for n in range(d - 1):
        jplus[n + 1, n] = math.sqrt((sys.two_j - n) * (n + 1))
    return jplus, jplus.conj().T, j3


def _range_guard(sys, s):
    if sys.two_j * math.log1p(abs(s) ** 2) > _LOG_RANGE_GUARD:
        raise ScaleOverflow(
            f"|s|={abs(s):.3e} with two_j={sys.two_j} exceeds double range"
        )


def coherent_vector(sys, s):
    """Unit vector of the spin coherent state with stereographic label s."""
    s = complex(s)
    _range_guard(sys, s)
    n = np.arange(sys.dim)
    comp = binom_sqrt_weights(sys.two_j) * s ** n
    return comp / (1.0 + abs(s) ** 2) ** sys.j


def coherent_overlap(sys, s_eta, s_mu):
    """<s_eta | s_mu> = (1 + s_eta^* s_mu)^{2j} / normalizers."""
    s_eta, s_mu = complex(s_eta), complex(s_mu)
    _range_guard(sys, s_eta)
    _range_guard(sys, s_mu)
    num = (1.0 + np.conj(s_eta) * s_mu) ** sys.two_j
    return num / ((1.0 + abs(s_eta) ** 2) ** sys.j * (1.0 + abs(s_mu) ** 2) ** sys.j)


def product_coherent(sys, label):
    """Joint product state |sx> (x) |sy> on the (2j+1)^2 space."""
    return np.kron(coherent_vector(sys, label.sx), coherent_vector(sys, label.sy))


def _component_vectors(sys, a):
    """Value, first and second derivative component vectors of the
    unnormalized polynomial ket at complex argument a.

    Component n of the ket is binom(2j,n)^{1/2} a^n; the derivative vectors
    carry the shifted powers explicitly (no division by a).
    """
    w = binom_sqrt_weights(sys.two_j)
    n = np.arange(sys.dim)
    val = w * a ** n
    d1 = np.zeros(sys.dim, dtype=complex)
    d1[1:] = w[1:] * n[1:] * a ** (n[1:] - 1)
    d2 = np.zeros(sys.dim, dtype=complex)
    if sys.dim > 2:
        d2[2:] = w[2:] * n[2:] * (n[2:] - 1) * a ** (n[2:] - 2)
    return val, d1, d2


def htilde_from_operator(sys, h_op):
    """Classical Hamiltonian from a joint-space Hermitian operator.

    htilde(u, v) = (v|H|u) / prod_k (1 + u_k v_k)^{2j}, where |u) is the
    unnormalized polynomial ket and (v| the matching bra row built from the
    v powers without conjugation. Gradients and Hessians are assembled from
    explicit derivative component vectors, exactly.
    """
    h_op = np.asarray(h_op, dtype=complex)
    if h_op.shape != (sys.joint_dim, sys.joint_dim):
        raise DimensionMismatch(
            f"operator shape {h_op.shape}, expected {(sys.joint_dim, sys.joint_dim)}"
        )
    defect = np.max(np.abs(h_op - h_op.conj().T))
    if defect > 1e-12:
        raise NotHermitian(f"max |H - H^dagger| = {defect:.3e}")
    two_j = sys.two_j

    def pieces(u, v):
        ux, uy = u
        vx, vy = v
        for a in (ux, uy, vx, vy):
            _range_guard(sys, a)
        kx = _component_vectors(sys, ux)
        ky = _component_vectors(sys, uy)
        bx = _component_vectors(sys, vx)
        by = _component_vectors(sys, vy)
        # kets by derivative order (ax, ay); bras by (cx, cy)
        kets = {
            (0, 0): np.kron(kx[0], ky[0]),
            (1, 0): np.kron(kx[1], ky[0]),
            (0, 1): np.kron(kx[0], ky[1]),
            (2, 0): np.kron(kx[2], ky[0]),
            (1, 1): np.kron(kx[1], ky[1]),
            (0, 2): np.kron(kx[0], ky[2]),
        }
        bras = {
            (0, 0): np.kron(bx[0], by[0]),
            (1, 0): np.kron(bx[1], by[0]),
            (0, 1): np.kron(bx[0], by[1]),
            (2, 0): np.kron(bx[2], by[0]),
            (1, 1): np.kron(bx[1], by[1]),
            (0, 2): np.kron(bx[0], by[2]),
        }
        hk = {key: h_op @ ket for key, ket in kets.items()}
        return bras, hk

    def log_norm_derivs(u, v):
        """First and second partials of ln prod (1+u_k v_k)^{2j}."""
        ux, uy = u
        vx, vy = v
        px, py = 1.0 + ux * vx, 1.0 + uy * vy
        l1 = np.array([two_j * vx / px, two_j * vy / py,
                       two_j * ux / px, two_j * uy / py])
        l2 = np.zeros((4, 4), dtype=complex)
        l2[0, 0] = -two_j * vx ** 2 / px ** 2
        l2[1, 1] = -two_j * vy ** 2 / py ** 2
        l2[2, 2] = -two_j * ux ** 2 / px ** 2
        l2[3, 3] = -two_j * uy ** 2 / py ** 2
        l2[0, 2] = l2[2, 0] = two_j / px ** 2
        l2[1, 3] = l2[3, 1] = two_j / py ** 2
        return l1, l2

    def norm_factor(u, v):
        return ((1.0 + u[0] * v[0]) * (1.0 + u[1] * v[1])) ** two_j

    # variable index -> (bra order, ket order) increment
    _BUMP = {0: ((0, 0), (1, 0)), 1: ((0, 0), (0, 1)),
             2: ((1, 0), (0, 0)), 3: ((0, 1), (0, 0))}

    def f_derivs(bras, hk):
        def f(bra_key, ket_key):
            return bras[bra_key] @ hk[ket_key]

        f0 = f((0, 0), (0, 0))
        f1 = np.empty(4, dtype=complex)
        for a in range(4):
            b, k = _BUMP[a]
            f1[a] = f(b, k)
        f2 = np.empty((4, 4), dtype=complex)
        for a in range(4):
            for b in range(a, 4):
                ba, ka = _BUMP[a]
                bb, kb = _BUMP[b]
                bra_key = (ba[0] + bb[0], ba[1] + bb[1])
                ket_key = (ka[0] + kb[0], ka[1] + kb[1])
                f2[a, b] = f2[b, a] = f(bra_key, ket_key)
        return f0, f1, f2

    def htilde(u, v):
        bras, hk = pieces(u, v)
        return (bras[(0, 0)] @ hk[(0, 0)]) / norm_factor(u, v)

    def grad(u, v):
        bras, hk = pieces(u, v)
        f0, f1, _ = f_derivs(bras, hk)
        l1, _ = log_norm_derivs(u, v)
        return (f1 - f0 * l1) / norm_factor(u, v)

    def hess(u, v):
        bras, hk = pieces(u, v)
        f0, f1, f2 = f_derivs(bras, hk)
        l1, l2 = log_norm_derivs(u, v)
        nrm = norm_factor(u, v)
        out = (
            f2
            - np.outer(f1, l1)
            - np.outer(l1, f1)
            - f0 * l2
            + f0 * np.outer(l1, l1)
        )
        return out / nrm

    return HamiltonianModel(
        htilde=htilde, grad=grad, hess=hess,
        label="operator", sys=sys, operator=h_op,
    )
