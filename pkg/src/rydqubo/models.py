"""Canonical QUBO and Ising representations with exhaustive-spectrum oracles.

Bit/spin convention used throughout the package: ``s_i = 1 - 2*x_i``, so a
binary 0 maps to spin +1 (the atomic ground state) and a binary 1 maps to
spin -1 (the excited state).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

ENUMERATION_CAP = 20


class ModelError(ValueError):
    """Invalid model data or incompatible model operands."""


def _normalize_pairs(n: int, quadratic: Mapping) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for (i, j), coeff in quadratic.items():
        if i == j:
            raise ModelError(f"diagonal pair ({i}, {j}) is not allowed")
        if i > j:
            i, j = j, i
        if not (0 <= i < j < n):
            raise ModelError(f"pair ({i}, {j}) out of range for n={n}")
        out[(i, j)] = out.get((i, j), 0.0) + float(coeff)
    return dict(sorted(out.items()))


def _bit_table(n: int) -> np.ndarray:
    """All 2^n assignments as a (2^n, n) 0/1 array; bit i of index k is x_i."""
    states = np.arange(1 << n, dtype=np.int64)
    return ((states[:, None] >> np.arange(n)) & 1).astype(np.float64)


@dataclass(frozen=True)
class QuboModel:
    """Quadratic polynomial over binary variables x in {0, 1}^n."""

    n: int
    linear: tuple[float, ...]
    quadratic: dict[tuple[int, int], float]
    constant: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ModelError("n must be nonnegative")
        if len(self.linear) != self.n:
            raise ModelError("linear coefficient count must equal n")
        object.__setattr__(self, "linear", tuple(float(a) for a in self.linear))
        object.__setattr__(self, "quadratic", _normalize_pairs(self.n, self.quadratic))
        object.__setattr__(self, "constant", float(self.constant))

    def evaluate(self, x: Sequence[int]) -> float:
        if len(x) != self.n:
            raise ModelError(f"assignment length {len(x)} != n={self.n}")
        e = self.constant
        for i, a in enumerate(self.linear):
            e += a * x[i]
        for (i, j), b in self.quadratic.items():
            e += b * x[i] * x[j]
        return e

    def energies(self) -> np.ndarray:
        """Energy of every assignment, indexed by the integer bit pattern."""
        xt = _bit_table(self.n)
        e = np.full(1 << self.n, self.constant)
        e += xt @ np.asarray(self.linear)
        for (i, j), b in self.quadratic.items():
            e += b * xt[:, i] * xt[:, j]
        return e

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "linear": list(self.linear),
            "quadratic": [[i, j, c] for (i, j), c in self.quadratic.items()],
            "constant": self.constant,
            "convention": "qubo",
        }


@dataclass(frozen=True)
class IsingModel:
    """Spin model  const + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j,  s in {-1,+1}^n."""

    n: int
    h: tuple[float, ...]
    j: dict[tuple[int, int], float]
    constant: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ModelError("n must be nonnegative")
        if len(self.h) != self.n:
            raise ModelError("field count must equal n")
        object.__setattr__(self, "h", tuple(float(a) for a in self.h))
        object.__setattr__(self, "j", _normalize_pairs(self.n, self.j))
        object.__setattr__(self, "constant", float(self.constant))

    def evaluate(self, s: Sequence[int]) -> float:
        if len(s) != self.n:
            raise ModelError(f"assignment length {len(s)} != n={self.n}")
        e = self.constant
        for i, a in enumerate(self.h):
            e += a * s[i]
        for (i, j), b in self.j.items():
            e += b * s[i] * s[j]
        return e

    def evaluate_bits(self, x: Sequence[int]) -> float:
        return self.evaluate([1 - 2 * xi for xi in x])

    def energies(self) -> np.ndarray:
        """Energy of every assignment, indexed by the integer *bit* pattern x."""
        st = 1.0 - 2.0 * _bit_table(self.n)
        e = np.full(1 << self.n, self.constant)
        e += st @ np.asarray(self.h)
        for (i, j), b in self.j.items():
            e += b * st[:, i] * st[:, j]
        return e

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "linear": list(self.h),
            "quadratic": [[i, j, c] for (i, j), c in self.j.items()],
            "constant": self.constant,
            "convention": "ising",
        }


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Convert via x_i = (1 - s_i)/2; energies agree exactly on every assignment."""
    h = [0.0] * q.n
    jj: dict[tuple[int, int], float] = {}
    const = q.constant
    for i, a in enumerate(q.linear):
        const += a / 2.0
        h[i] -= a / 2.0
    for (i, j), b in q.quadratic.items():
        const += b / 4.0
        h[i] -= b / 4.0
        h[j] -= b / 4.0
        jj[(i, j)] = jj.get((i, j), 0.0) + b / 4.0
    return IsingModel(q.n, tuple(h), jj, const)


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Inverse substitution s_i = 1 - 2 x_i."""
    linear = [0.0] * m.n
    quad: dict[tuple[int, int], float] = {}
    const = m.constant
    for i, a in enumerate(m.h):
        const += a
        linear[i] -= 2.0 * a
    for (i, j), b in m.j.items():
        const += b
        linear[i] -= 2.0 * b
        linear[j] -= 2.0 * b
        quad[(i, j)] = quad.get((i, j), 0.0) + 4.0 * b
    return QuboModel(m.n, tuple(linear), quad, const)


def evaluate(model: QuboModel | IsingModel, assignment: Sequence[int]) -> float:
    return model.evaluate(assignment)


@dataclass(frozen=True)
class SpectrumEntry:
    energy: float
    states: tuple[int, ...]  # integer bit patterns; bit i of a state is x_i

    @property
    def multiplicity(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class SpectrumTable:
    n: int
    entries: tuple[SpectrumEntry, ...]

    @property
    def e_min(self) -> float:
        return self.entries[0].energy

    @property
    def e_max(self) -> float:
        return self.entries[-1].energy

    def distinct_energies(self) -> np.ndarray:
        return np.array([e.energy for e in self.entries])

    def multiplicities(self) -> np.ndarray:
        return np.array([e.multiplicity for e in self.entries])


def state_bits(state: int, n: int) -> tuple[int, ...]:
    return tuple((state >> i) & 1 for i in range(n))


def enumerate_spectrum(m: IsingModel | QuboModel, cap: int = ENUMERATION_CAP) -> SpectrumTable:
    """Exhaustive spectrum of the classical cost, grouped by exact energy equality."""
    if m.n > cap:
        raise ModelError(f"n={m.n} exceeds enumeration cap {cap}")
    e = m.energies()
    order = np.argsort(e, kind="stable")
    entries: list[SpectrumEntry] = []
    cur_e: float | None = None
    cur_states: list[int] = []
    for k in order:
        ek = float(e[k])
        if cur_e is None or ek != cur_e:
            if cur_states:
                entries.append(SpectrumEntry(cur_e, tuple(cur_states)))
            cur_e, cur_states = ek, [int(k)]
        else:
            cur_states.append(int(k))
    if cur_states:
        entries.append(SpectrumEntry(cur_e, tuple(cur_states)))
    return SpectrumTable(m.n, tuple(entries))


@dataclass(frozen=True)
class GroundSummary:
    e_opt: float
    ground_states: tuple[int, ...]
    c_opt: float
    c_max: float


def ground_summary(t: SpectrumTable) -> GroundSummary:
    if not t.entries:
        raise ModelError("empty spectrum table")
    g = t.entries[0]
    return GroundSummary(g.energy, g.states, t.e_min, t.e_max)


def model_to_json(model: QuboModel | IsingModel, path=None) -> str:
    text = json.dumps(model.to_dict(), indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def model_from_dict(data: Mapping) -> QuboModel | IsingModel:
    try:
        n = int(data["n"])
        linear = [float(a) for a in data["linear"]]
        quadratic = {(int(i), int(j)): float(c) for i, j, c in data["quadratic"]}
        constant = float(data.get("constant", 0.0))
        convention = data.get("convention", "qubo")
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model data: {exc}") from exc
    if convention == "qubo":
        return QuboModel(n, tuple(linear), quadratic, constant)
    if convention == "ising":
        return IsingModel(n, tuple(linear), quadratic, constant)
    raise ModelError(f"unknown convention {convention!r}")


def model_from_json(text_or_path: str) -> QuboModel | IsingModel:
    if "\n" not in text_or_path and not text_or_path.lstrip().startswith("{"):
        with open(text_or_path) as fh:
            data = json.load(fh)
    else:
        data = json.loads(text_or_path)
    return model_from_dict(data)


def as_ising(model: QuboModel | IsingModel) -> IsingModel:
    return model if isinstance(model, IsingModel) else qubo_to_ising(model)


def as_qubo(model: QuboModel | IsingModel) -> QuboModel:
    return model if isinstance(model, QuboModel) else ising_to_qubo(model)
