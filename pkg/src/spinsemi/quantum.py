"""Exact quantum engine: unitary evolution, partial traces, purity.

Evolution goes through one full spectral decomposition of the joint
Hamiltonian (desk-scale dimensions), so long-time phases are exact and a
whole purity curve reuses a single eigendecomposition.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .numerics import hermitian_eig
from .spin import product_coherent


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced density matrix with its defining sanity bounds."""

    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch("density matrix must be square")
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self):
        return self.entries.shape[0]

    def validate(self, tol=1e-10):
        rho = self.entries
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix not Hermitian within tolerance")
        if abs(np.trace(rho) - 1.0) > tol:
            raise ValueError("density matrix trace differs from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -tol:
            raise ValueError("density matrix has a negative eigenvalue")
        return self


@dataclass
class PurityCurve:
    """Aligned time series of exact and semiclassical purities plus residuals."""

    times: np.ndarray
    p_exact: np.ndarray
    p_sc: np.ndarray
    slin_exact: np.ndarray = field(default=None)
    slin_sc: np.ndarray = field(default=None)
    residual_detM: np.ndarray = field(default=None)
    residual_energy: np.ndarray = field(default=None)
    residual_im_psc: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.times)
        if self.slin_exact is None:
            self.slin_exact = 1.0 - np.asarray(self.p_exact)
        if self.slin_sc is None:
            self.slin_sc = 1.0 - np.asarray(self.p_sc)
        for name in ("p_exact", "p_sc", "slin_exact", "slin_sc",
                     "residual_detM", "residual_energy", "residual_im_psc"):
            val = getattr(self, name)
            if val is None:
                setattr(self, name, np.full(n, np.nan))
            elif len(val) != n:
                raise DimensionMismatch(f"{name} not aligned with the time grid")


class SpectralPropagator:
    """e^{-i H t / hbar} applied through the eigenbasis of H."""

    def __init__(self, h, hbar=1.0):
        self.w, self.v = hermitian_eig(h)
        self.hbar = hbar

    def apply(self, psi, t, xi=+1):
        phases = np.exp(-1j * xi * self.w * t / self.hbar)
        return self.v @ (phases * (self.v.conj().T @ psi))


def evolve_state(h, psi0, t, hbar=1.0, xi=+1):
    """Evolve psi0 under Hermitian h for time t (xi=-1 reverses time)."""
    return SpectralPropagator(h, hbar).apply(np.asarray(psi0, dtype=complex), t, xi)


def reduced_density(psi, subsystem, dim):
    """Partial trace of |psi><psi| onto one factor.

    psi lives on the joint space with x as the left Kronecker factor and
    must have length dim^2.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (dim * dim,):
        raise DimensionMismatch(f"state length {psi.shape}, expected ({dim * dim},)")
    mat = psi.reshape(dim, dim)
    if subsystem == "x":
        rho = mat @ mat.conj().T
    elif subsystem == "y":
        rho = mat.T @ mat.conj()
    else:
        raise ValueError("subsystem must be 'x' or 'y'")
    return DensityMatrix(rho)


def purity(rho):
    """Tr(rho^2), computed as the Frobenius norm squared (manifestly >= 0)."""
    return float(np.sum(np.abs(rho.entries) ** 2))


def linear_entropy(rho):
    return 1.0 - purity(rho)


def exact_purity_curve(sys, model, s0, times, subsystem="x"):
    """Reduced-state purity of the evolved product coherent state, per time."""
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(np.diff(times) <= 0) or times[0] < 0):
        raise ValueError("times must be ascending and non-negative")
    psi0 = product_coherent(sys, s0)
    prop = SpectralPropagator(model.operator, sys.hbar)
    out = np.empty(times.size)
    for i, t in enumerate(times):
        psi = prop.apply(psi0, t)
        out[i] = purity(reduced_density(psi, subsystem, sys.dim))
    return out


def exact_propagator_overlap(sys, h, s_eta, s0, t, xi=+1):
    """<s_eta | e^{-i xi H t / hbar} | s_0> on the joint space."""
    bra = product_coherent(sys, s_eta)
    ket = evolve_state(h, product_coherent(sys, s0), t, sys.hbar, xi)
    return complex(np.vdot(bra, ket))
