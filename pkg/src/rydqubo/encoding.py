"""Mapping Ising models onto Rydberg hardware quantities.

The pairwise interaction is V_jk = 4 J_jk and the final detuning is
Delta_j = 2 h_j + (1/2) sum_{k != j} V_jk, with excitation number n_j
identified with the binary variable x_j.  With that choice the diagonal
Hamiltonian  -sum_j Delta_j n_j + sum_{k<j} V_kj n_k n_j  equals the Ising
energy minus a stored offset on every assignment, which is the contract the
rest of the package relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .models import IsingModel, ModelError

# hbar = 1; energies/frequencies in rad/us, lengths in um, times in us.
GHZ_TO_RAD_PER_US = 2.0 * math.pi * 1.0e3
C6_DEFAULT = 139.0 * GHZ_TO_RAD_PER_US  # 139 GHz um^6 -> 2*pi*1.39e5 rad/us um^6


class NotEncodableError(ValueError):
    """Coupling structure incompatible with purely repulsive interactions."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class FrustratedModelError(NotEncodableError):
    """No spin-flip gauge makes all couplings nonnegative."""


@dataclass(frozen=True)
class HardwareLimits:
    delta_max: float = 2.0 * math.pi * 20.0   # rad/us
    omega_max: float = 2.0 * math.pi * 5.0    # rad/us
    r_min: float = 2.0                        # um
    r_far: float = 12.0                       # um
    t_max: float = 200.0                      # us
    c6: float = C6_DEFAULT                    # rad/us * um^6
    lifetime_us: float = 234.0                # metadata only

    def __post_init__(self):
        for name in ("delta_max", "omega_max", "r_min", "r_far", "t_max",
                     "c6", "lifetime_us"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class EncodedTarget:
    """Interaction matrix, final detunings, and the affine energy bookkeeping.

    For every bit pattern x:  diagonal_energy(x) + constant == scale * E(x),
    where E is the source model energy (constant included).
    """

    n: int
    v: np.ndarray            # (n, n) symmetric, zero diagonal
    delta_final: np.ndarray  # (n,)
    constant: float
    scale: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        d = np.asarray(self.delta_final, dtype=float)
        if v.shape != (self.n, self.n) or d.shape != (self.n,):
            raise ValueError("shape mismatch in encoded target")
        if not np.allclose(v, v.T) or np.any(np.diag(v) != 0):
            raise ValueError("V must be symmetric with zero diagonal")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "delta_final", d)

    def diagonal_energies(self) -> np.ndarray:
        """-sum Delta_j x_j + sum_{j<k} V_jk x_j x_k for every bit pattern."""
        dim = 1 << self.n
        xt = ((np.arange(dim)[:, None] >> np.arange(self.n)) & 1).astype(float)
        e = -xt @ self.delta_final
        iu, ju = np.triu_indices(self.n, k=1)
        for i, j in zip(iu, ju):
            if self.v[i, j] != 0.0:
                e += self.v[i, j] * xt[:, i] * xt[:, j]
        return e

    def source_energy(self, encoded_energy: float) -> float:
        """Map an encoded (diagonal) energy back to the source model convention."""
        return (encoded_energy + self.constant) / self.scale

    @property
    def energy_scale(self) -> float:
        parts = [np.max(np.abs(self.v)) if self.n > 1 else 0.0,
                 np.max(np.abs(self.delta_final)) if self.n else 0.0]
        return max(max(parts), 1e-30)


def encode(m: IsingModel, allow_negative: bool = False) -> EncodedTarget:
    """Map an Ising model to interactions and final detunings.

    Requires antiferromagnetic couplings (J >= 0) unless ``allow_negative``
    is set, in which case the signed interactions are kept; such a target can
    be simulated in ideal mode but not realized by a van der Waals layout.
    """
    n = m.n
    v = np.zeros((n, n))
    for (i, j), coupling in m.j.items():
        if coupling < 0 and not allow_negative:
            raise NotEncodableError(
                f"negative coupling J[{i},{j}] = {coupling}; C6 > 0 requires "
                "J >= 0 (try a gauge fix or allow_negative for ideal mode)",
                pair=(i, j))
        v[i, j] = v[j, i] = 4.0 * coupling
    delta = 2.0 * np.asarray(m.h) + 0.5 * v.sum(axis=1)
    constant = m.constant + sum(m.h) + sum(m.j.values())
    return EncodedTarget(n, v, delta, constant, 1.0)


def gauge_fix(m: IsingModel, tol: float = 0.0) -> tuple[IsingModel, tuple[int, ...]]:
    """Flip a subset of spins so all couplings become nonnegative.

    Returns the gauged model and the 0/1 flip mask; a bit pattern x of the
    gauged model corresponds to x XOR flips in the original.  Raises
    ``FrustratedModelError`` when some cycle carries an odd number of
    negative couplings, which no gauge can repair.
    """
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(m.n)}
    for (i, j), coupling in m.j.items():
        if abs(coupling) <= tol:
            continue
        sign = 1 if coupling < 0 else 0
        adj[i].append((j, sign))
        adj[j].append((i, sign))
    flips = [-1] * m.n
    for root in range(m.n):
        if flips[root] != -1:
            continue
        flips[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for w, sign in adj[u]:
                want = flips[u] ^ sign
                if flips[w] == -1:
                    flips[w] = want
                    stack.append(w)
                elif flips[w] != want:
                    raise FrustratedModelError(
                        "frustrated coupling signs: no spin-flip gauge yields "
                        "all-nonnegative couplings", pair=(min(u, w), max(u, w)))
    h = tuple(hi if f == 0 else -hi for hi, f in zip(m.h, flips))
    jj = {key: (c if flips[key[0]] == flips[key[1]] else -c)
          for key, c in m.j.items()}
    return IsingModel(m.n, h, jj, m.constant), tuple(flips)


@dataclass(frozen=True)
class RescaleReport:
    scale: float
    binding: str  # "none", "delta_max", or "r_min"


def rescale(t: EncodedTarget, limits: HardwareLimits) -> tuple[EncodedTarget, RescaleReport]:
    """Uniform multiplicative shrink so detunings and distances are feasible.

    The scale factor leaves the ground set and the approximation ratio
    unchanged.  Targets already within limits are returned with scale 1.
    """
    lam = 1.0
    binding = "none"
    max_delta = float(np.max(np.abs(t.delta_final))) if t.n else 0.0
    if max_delta > limits.delta_max:
        lam = limits.delta_max / max_delta
        binding = "delta_max"
    max_v = float(np.max(t.v)) if t.n > 1 else 0.0
    v_cap = limits.c6 / limits.r_min**6
    if max_v > 0 and max_v * lam > v_cap:
        lam = v_cap / max_v
        binding = "r_min"
    if lam == 1.0:
        return t, RescaleReport(1.0, "none")
    scaled = EncodedTarget(t.n, t.v * lam, t.delta_final * lam,
                           t.constant * lam, t.scale * lam)
    return scaled, RescaleReport(lam, binding)


# --- geometry --------------------------------------------------------------

@dataclass(frozen=True)
class AtomLayout:
    positions: np.ndarray  # (n, dim) in um
    c6: float = C6_DEFAULT

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] not in (2, 3):
            raise ValueError("positions must be (n, 2) or (n, 3)")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def to_dict(self) -> dict:
        return {"dim": self.dim, "positions_um": self.positions.tolist(),
                "C6": self.c6}

    @staticmethod
    def from_dict(data: dict) -> "AtomLayout":
        return AtomLayout(np.asarray(data["positions_um"], dtype=float),
                          float(data.get("C6", C6_DEFAULT)))


def layout_interactions(layout: AtomLayout) -> np.ndarray:
    """V_jk = C6 / r_jk^6, symmetric with zero diagonal."""
    pos = layout.positions
    diff = pos[:, None, :] - pos[None, :, :]
    r = np.sqrt((diff**2).sum(axis=-1))
    n = layout.n
    off = ~np.eye(n, dtype=bool)
    if np.any(r[off] == 0.0):
        raise ValueError("coincident atoms")
    v = np.zeros((n, n))
    v[off] = layout.c6 / r[off] ** 6
    return v


@dataclass(frozen=True)
class EmbedReport:
    max_rel_error: float       # worst |C6/r^6 - V| / max(V), leakage included
    worst_pair: tuple[int, int]
    stress: float
    restarts: int


def _pair_data(t: EncodedTarget, c6: float, r_far: float):
    iu, ju = np.triu_indices(t.n, k=1)
    vt = t.v[iu, ju]
    if np.any(vt < 0):
        raise NotEncodableError("negative interactions cannot be embedded")
    pos_mask = vt > 0
    r_target = np.zeros_like(vt)
    r_target[pos_mask] = (c6 / vt[pos_mask]) ** (1.0 / 6.0)
    return iu, ju, vt, pos_mask, r_target


def _stress_and_grad(flat: np.ndarray, n: int, dim: int, iu, ju, pos_mask,
                     r_target, r_far: float):
    pos = flat.reshape(n, dim)
    d = pos[iu] - pos[ju]
    r = np.sqrt((d**2).sum(axis=1))
    r = np.maximum(r, 1e-12)
    grad = np.zeros_like(pos)
    # relative distance error on connected pairs
    rel = np.where(pos_mask, (r - r_target) / np.where(pos_mask, r_target, 1.0), 0.0)
    stress = float((rel[pos_mask] ** 2).sum())
    coeff = np.where(pos_mask, 2.0 * rel / np.where(pos_mask, r_target, 1.0), 0.0)
    # hinge on unconnected pairs closer than r_far
    hinge = np.where(~pos_mask & (r < r_far), r_far - r, 0.0)
    stress += float((hinge**2).sum())
    coeff += -2.0 * hinge
    unit = d / r[:, None]
    contrib = coeff[:, None] * unit
    np.add.at(grad, iu, contrib)
    np.add.at(grad, ju, -contrib)
    return stress, grad.ravel()


def embed_layout(t: EncodedTarget, dim: int = 2, seed: int = 0,
                 limits: HardwareLimits | None = None,
                 restarts: int = 16) -> tuple[AtomLayout, EmbedReport]:
    """Place atoms so C6/r^6 approximates V, by multi-start stress descent.

    Infeasibility (including unwanted-interaction leakage on zero pairs) is
    reported through the residual, never raised.
    """
    limits = limits or HardwareLimits()
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    n = t.n
    if n == 0:
        layout = AtomLayout(np.zeros((0, dim)), limits.c6)
        return layout, EmbedReport(0.0, (-1, -1), 0.0, 0)
    if n == 1:
        layout = AtomLayout(np.zeros((1, dim)), limits.c6)
        return layout, EmbedReport(0.0, (-1, -1), 0.0, 0)
    iu, ju, vt, pos_mask, r_target = _pair_data(t, limits.c6, limits.r_far)
    if not np.any(pos_mask):
        raise NotEncodableError("V has no positive entry to embed")
    span = max(float(np.max(r_target[pos_mask])), limits.r_far)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        x0 = rng.normal(scale=0.5 * span, size=n * dim)
        res = minimize(_stress_and_grad, x0, jac=True, method="L-BFGS-B",
                       args=(n, dim, iu, ju, pos_mask, r_target, limits.r_far),
                       options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    pos = best.x.reshape(n, dim)
    pos -= pos.mean(axis=0)
    layout = AtomLayout(pos, limits.c6)
    achieved = layout_interactions(layout)
    vmax = float(np.max(t.v))
    errs = np.abs(achieved - t.v) / vmax
    np.fill_diagonal(errs, 0.0)
    worst = np.unravel_index(np.argmax(errs), errs.shape)
    return layout, EmbedReport(float(errs[worst]), (int(min(worst)), int(max(worst))),
                               float(best.fun), restarts)


@dataclass(frozen=True)
class ValidationReport:
    max_rel_error: float
    worst_pair: tuple[int, int]
    worst_unwanted: float      # largest leakage on a zero-V pair, relative to max V
    offending_pairs: tuple[tuple[int, int], ...]
    passed: bool


def validate(t: EncodedTarget, layout: AtomLayout, tol: float = 1e-3) -> ValidationReport:
    """Per-pair relative interaction errors of a layout against a target."""
    if layout.n != t.n:
        raise ValueError("layout and target atom counts differ")
    achieved = layout_interactions(layout)
    vmax = float(np.max(t.v)) if t.n > 1 else 0.0
    if vmax <= 0:
        raise NotEncodableError("target has no positive interaction to validate")
    errs = np.abs(achieved - t.v) / vmax
    np.fill_diagonal(errs, 0.0)
    worst = np.unravel_index(np.argmax(errs), errs.shape)
    unwanted = 0.0
    offending = []
    for i in range(t.n):
        for j in range(i + 1, t.n):
            if t.v[i, j] == 0.0:
                unwanted = max(unwanted, errs[i, j])
            if errs[i, j] > tol:
                offending.append((i, j))
    return ValidationReport(float(errs[worst]),
                            (int(min(worst)), int(max(worst))),
                            float(unwanted), tuple(offending),
                            len(offending) == 0)
