"""Classical structure on the complex (u, v) phase space.

Hamilton's equations here are

    du_k/dt = +(1 + u_k v_k)^2 / (2 i j hbar) * dH/dv_k,
    dv_k/dt = -(1 + u_k v_k)^2 / (2 i j hbar) * dH/du_k,

for k = x, y, with H the analytically continued classical Hamiltonian.
Trajectories start from the real point (u, v) = (s0, s0*) and, for Hermitian
models, stay real; the reality drift is measured, never enforced, so it
doubles as an integrator diagnostic. The stability matrix is co-integrated
with the trajectory in one ODE system (20 complex components), which keeps
its determinant identity accurate to integrator tolerance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ChartSingularity
from .numerics import adaptive_rk
from .spin import CoherentLabel

CHART_TOL = 1e-12

# floor on the number of samples per trajectory; the downstream action
# quadratures and branch tracking need a grid denser than the ODE error
# control alone would pick on nearly-linear stretches
_MIN_SAMPLES = 33


@dataclass(frozen=True)
class PhaseSpaceState:
    """Complex phase-space point; u and v are length-2 arrays (x, y)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex).reshape(2))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=complex).reshape(2))

    @classmethod
    def from_vector(cls, y):
        return cls(y[:2], y[2:4])

    def as_vector(self):
        return np.concatenate([self.u, self.v])

    def reality_defect(self):
        """max_k |v_k - conj(u_k)|; zero on the real submanifold."""
        return float(np.max(np.abs(self.v - np.conj(self.u))))


@dataclass(frozen=True)
class StabilityMatrix:
    """4x4 linearization in the (du_x, du_y, dv_x, dv_y) ordering."""

    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=complex).reshape(4, 4))

    @property
    def m_uu(self):
        return self.m[:2, :2]

    @property
    def m_uv(self):
        return self.m[:2, 2:]

    @property
    def m_vu(self):
        return self.m[2:, :2]

    @property
    def m_vv(self):
        return self.m[2:, 2:]

    def det(self):
        return complex(np.linalg.det(self.m))

    @classmethod
    def identity(cls):
        return cls(np.eye(4, dtype=complex))


@dataclass(frozen=True)
class Trajectory:
    """Sampled classical trajectory with its conserved-energy diagnostic."""

    ts: np.ndarray
    ys: np.ndarray          # (n, 4) rows (ux, uy, vx, vy)
    energy: np.ndarray      # H~ along the samples
    start_label: CoherentLabel

    def __post_init__(self):
        if self.ts.size > 1 and np.any(np.diff(self.ts) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self):
        return self.ts.size

    def state(self, i):
        return PhaseSpaceState.from_vector(self.ys[i])

    @property
    def initial(self):
        return self.state(0)

    @property
    def final(self):
        return self.state(-1)

    @property
    def duration(self):
        return float(self.ts[-1] - self.ts[0])

    def energy_drift(self):
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def reality_drift(self):
        return float(np.max(np.abs(self.ys[:, 2:] - np.conj(self.ys[:, :2]))))


def _chart_factors(y):
    p = 1.0 + y[:2] * y[2:4]
    if np.min(np.abs(p)) < CHART_TOL:
        raise ChartSingularity(f"|1 + u_k v_k| = {np.min(np.abs(p)):.3e} below {CHART_TOL}")
    return p


def field_vector(sys, model, y):
    """Right-hand side of Hamilton's equations at packed state y."""
    p = _chart_factors(y)
    g = model.grad(y[:2], y[2:4])
    pref = p ** 2 / (2j * sys.hbar_j)  # 2j is the imaginary literal 2i
    du = pref * g[2:4]
    dv = -pref * g[:2]
    return np.concatenate([du, dv])


def hamiltonian_field(sys, model, state):
    """Phase-space velocity at a PhaseSpaceState (chart-guarded)."""
    dy = field_vector(sys, model, state.as_vector())
    return PhaseSpaceState.from_vector(dy)


def field_jacobian(sys, model, y):
    """Exact 4x4 Jacobian of the field, assembled from grad and hess."""
    u, v = y[:2], y[2:4]
    p = _chart_factors(y)
    g = model.grad(u, v)
    hss = model.hess(u, v)
    denom = 2j * sys.hbar_j
    jac = np.empty((4, 4), dtype=complex)
    for k in range(2):
        pk2 = p[k] ** 2
        # d(udot_k)/d(u_l, v_l)
        for l in range(4):
            term = pk2 * hss[2 + k, l]
            if l == k:          # u_l touches the k-th chart factor
                term += 2.0 * v[k] * p[k] * g[2 + k]
            if l == 2 + k:      # v_l touches the k-th chart factor
                term += 2.0 * u[k] * p[k] * g[2 + k]
            jac[k, l] = term / denom
        # d(vdot_k)/d(u_l, v_l)
        for l in range(4):
            term = pk2 * hss[k, l]
            if l == k:
                term += 2.0 * v[k] * p[k] * g[k]
            if l == 2 + k:
                term += 2.0 * u[k] * p[k] * g[k]
            jac[2 + k, l] = -term / denom
    return jac


def divergence_split(sys, model, y):
    """sum_k [d(udot_k)/du_k - d(vdot_k)/dv_k], the quantum-correction integrand."""
    jac = field_jacobian(sys, model, y)
    return jac[0, 0] + jac[1, 1] - jac[2, 2] - jac[3, 3]


def _effective_cfg(cfg, t_total):
    """Cap the step so a trajectory always carries enough samples."""
    if t_total <= 0:
        return cfg
    cap = t_total / (_MIN_SAMPLES - 1)
    if cfg.max_step <= cap:
        return cfg
    return type(cfg)(
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        initial_step=min(cfg.initial_step, cap),
        max_step=cap,
    )


def integrate_trajectory(sys, model, s0, t_final, cfg, sample_times=None):
    """Real critical trajectory from (u, v) = (s0, s0*) over [0, t_final].

    With sample_times=None the samples are the integrator's accepted steps
    (step-capped so at least ~30 samples exist); otherwise exactly the
    requested times. The t = 0 start point is always included, whether or
    not it was requested: every downstream object (endpoint factor,
    stability window, action boundary terms) is anchored there.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    y0 = np.array([s0.sx, s0.sy, np.conj(s0.sx), np.conj(s0.sy)], dtype=complex)
    if sample_times is not None:
        sample_times = np.asarray(sample_times, dtype=float)
        if sample_times.size == 0 or sample_times[0] > 0.0:
            sample_times = np.concatenate([[0.0], sample_times])
    if t_final == 0:
        ts = np.array([0.0])
        ys = y0[None, :]
    else:
        eff = _effective_cfg(cfg, t_final)
        ts, ys = adaptive_rk(
            lambda t, y: field_vector(sys, model, y),
            y0, (0.0, t_final), eff, samples=sample_times,
        )
    energy = np.array([model.htilde(row[:2], row[2:4]) for row in ys])
    return Trajectory(ts=ts, ys=ys, energy=energy, start_label=s0)


def integrate_stability(sys, model, traj, cfg):
    """Stability matrices along traj, one per sample time.

    Solves dM/dt = J(t) M, M(0) = I, with (u, v) co-integrated in the same
    state vector so M sees exactly the flow it linearizes.
    """
    y0 = np.concatenate([traj.ys[0], np.eye(4, dtype=complex).ravel()])

    def rhs(t, y):
        dy = field_vector(sys, model, y[:4])
        jac = field_jacobian(sys, model, y[:4])
        dm = jac @ y[4:].reshape(4, 4)
        return np.concatenate([dy, dm.ravel()])

    if traj.duration == 0:
        return [StabilityMatrix.identity() for _ in range(len(traj))]
    eff = _effective_cfg(cfg, traj.duration)
    _, ys = adaptive_rk(rhs, y0, (traj.ts[0], traj.ts[-1]), eff, samples=traj.ts)
    return [StabilityMatrix(row[4:].reshape(4, 4)) for row in ys]
