"""Expected resource cost of growing a W state of a target size.

Cost model
----------
* A Bell pair (W_2) costs 1 unit; a single photon (the FGF ancilla, or the
  photon used by the FG seed scheme) costs ``ancilla_cost`` units.
* FGF grows from Bell pairs.  FG cannot: fusing W_2 with anything of size m
  yields size m, so FG networks start from W_3 seeds made by an earlier
  scheme (``fg_seed``) and pay for them.
* A node of the build tree that targets size k fuses inputs of sizes (n, m)
  chosen by the pairing strategy, with n + m - loss = k.
* ``Discard``: any non-success loses both inputs; they are rebuilt from
  scratch.  This is the plain recursion E(k) = (E(n) + E(m) + step) / p(n, m).
* ``Reuse``: after a recycle the larger shrunken piece may be kept as the new
  left input (its partner is then chosen so a success still lands on k), or
  thrown away.  The choice is made by value iteration on expected cost units.

Each fusion attempt with FGF is charged one ancilla photon, also after a
recycle where the ancilla physically survives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..fusion import Gate
from .closed_form import p_failure, p_recycle, p_success

STRATEGIES = ("balanced-tree", "incremental")

VI_RTOL = 1e-10
VI_MAX_ITER = 200_000


class RecyclePolicy(Enum):
    DISCARD = "discard"
    REUSE = "reuse"


@dataclass(frozen=True)
class SeedScheme:
    name: str
    probability: Fraction
    bell_pairs: int
    photons: int


SEED_SCHEMES = {
    "single-photon+bell": SeedScheme("single-photon+bell", Fraction(3, 10), 1, 1),
    "two-bell-experimental": SeedScheme("two-bell-experimental", Fraction(3, 27), 2, 0),
}


@dataclass(frozen=True)
class CostModel:
    recycle_policy: RecyclePolicy = RecyclePolicy.DISCARD
    bell_pair_cost: float = 1.0
    ancilla_cost: float = 0.1
    fg_seed: str = "single-photon+bell"

    def __post_init__(self):
        object.__setattr__(self, "recycle_policy", RecyclePolicy(self.recycle_policy))
        if self.bell_pair_cost < 0 or self.ancilla_cost < 0:
            raise ValueError("primitive costs must be nonnegative")
        if self.fg_seed not in SEED_SCHEMES:
            raise ValueError(f"unknown FG seed scheme {self.fg_seed!r}; choose from {sorted(SEED_SCHEMES)}")

    @property
    def seed(self) -> SeedScheme:
        return SEED_SCHEMES[self.fg_seed]

    def units(self, bell: float, ancillas: float) -> float:
        return self.bell_pair_cost * bell + self.ancilla_cost * ancillas


@dataclass(frozen=True)
class CostResult:
    target_size: int
    strategy_name: str
    gate: Gate
    policy: RecyclePolicy
    expected_bell_pairs: float
    expected_ancillas: float
    expected_attempts: float
    expected_seed_attempts: float
    expected_cost_units: float
    reachable: bool = True
    exact: dict[str, Fraction] | None = field(default=None, compare=False)


def unit_size(gate: Gate) -> int:
    """Smallest W state the gate grows from."""
    return 2 if Gate(gate) is Gate.FGF else 3


def decompose(k: int, gate: Gate, strategy: str) -> tuple[int, int]:
    """Input sizes (n, m), n >= m, that fuse into size k under the strategy."""
    gate = Gate(gate)
    unit, loss = unit_size(gate), gate.size_loss
    if k <= unit:
        raise ValueError(f"size {k} is a base unit for {gate.value}")
    if strategy == "balanced-tree":
        n = -(-(k + loss) // 2)
    elif strategy == "incremental":
        n = k + loss - unit
    else:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    return n, k + loss - n


# Resource vectors are (bell pairs, ancilla photons, gate attempts, seed attempts).
def _base_resources(gate: Gate, model: CostModel) -> tuple[Fraction, ...]:
    if Gate(gate) is Gate.FGF:
        return (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    seed = model.seed
    inv = 1 / seed.probability
    return (seed.bell_pairs * inv, seed.photons * inv, Fraction(0), inv)


def _step(gate: Gate) -> tuple[Fraction, ...]:
    return (Fraction(0), Fraction(int(Gate(gate) is Gate.FGF)), Fraction(1), Fraction(0))


def discard_resources(k: int, gate: Gate, model: CostModel, strategy: str) -> tuple[Fraction, ...]:
    """Exact expected resources for size k under the Discard policy."""
    return _discard(k, Gate(gate), model.fg_seed, strategy)


@lru_cache(maxsize=None)
def _discard(k: int, gate: Gate, fg_seed: str, strategy: str) -> tuple[Fraction, ...]:
    model = CostModel(fg_seed=fg_seed)
    if k <= unit_size(gate):
        return _base_resources(gate, model)
    n, m = decompose(k, gate, strategy)
    p = p_success(n, m, gate)
    left, right = _discard(n, gate, fg_seed, strategy), _discard(m, gate, fg_seed, strategy)
    return tuple((a + b + s) / p for a, b, s in zip(left, right, _step(gate)))


@dataclass(frozen=True)
class ReuseNode:
    """Optimal Reuse-policy chain for one build-tree node.

    States are held left-input sizes; 0 means nothing usable is held.
    ``fuse[s]`` is True where fusing beats throwing the piece away.
    """

    target: int
    states: tuple[int, ...]
    fuse: dict[int, bool]
    partner: dict[int, int]
    recycled: dict[int, int]
    values: dict[int, float]
    iterations: int
    converged: bool


def _recycled_state(s: int, q: int, unit: int) -> int:
    keep = max(s - 1, q - 1)
    return keep if keep >= unit else 0


class ReuseSolver:
    """Value iteration for the Reuse policy, memoized over node targets."""

    def __init__(self, gate: Gate, model: CostModel, strategy: str,
                 rtol: float = VI_RTOL, max_iter: int = VI_MAX_ITER):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
        self.gate, self.model, self.strategy = Gate(gate), model, strategy
        self.rtol, self.max_iter = rtol, max_iter
        self.unit = unit_size(self.gate)
        self._resources: dict[int, np.ndarray] = {}
        self.nodes: dict[int, ReuseNode] = {}

    def cost_units(self, vec: np.ndarray) -> float:
        return self.model.units(vec[0], vec[1])

    def resources(self, k: int) -> np.ndarray:
        if k in self._resources:
            return self._resources[k]
        if k <= self.unit:
            vec = np.array([float(x) for x in _base_resources(self.gate, self.model)])
        else:
            vec = self._solve_node(k)
        self._resources[k] = vec
        return vec

    def _solve_node(self, k: int) -> np.ndarray:
        gate, unit, loss = self.gate, self.unit, self.gate.size_loss
        n, _ = decompose(k, gate, self.strategy)
        states = (0,) + tuple(range(unit, k))
        partner = {s: k + loss - s for s in states[1:] if k + loss - s >= unit}
        probs = {
            s: (float(p_success(s, q, gate)), float(p_recycle(s, q)), float(p_failure(s, q, gate)))
            for s, q in partner.items()
        }
        recycled = {s: _recycled_state(s, q, unit) for s, q in partner.items()}
        step = np.array([float(x) for x in _step(gate)])
        build_n = self.resources(n)
        fuse_base = {s: self.resources(q) + step for s, q in partner.items()}
        fuse_cost = {s: self.cost_units(v) for s, v in fuse_base.items()}
        build_cost = self.cost_units(build_n)

        values = {s: 0.0 for s in states}
        converged = False
        it = 0
        for it in range(1, self.max_iter + 1):
            new = {0: build_cost + values[n]}
            for s in states[1:]:
                if s in partner:
                    ps, pr, pf = probs[s]
                    fuse = fuse_cost[s] + pr * values[recycled[s]] + pf * values[0]
                    new[s] = min(values[0], fuse)
                else:
                    new[s] = values[0]
            delta = max(abs(new[s] - values[s]) for s in states)
            scale = max(abs(v) for v in new.values())
            values = new
            if not math.isfinite(scale):
                break
            if delta <= self.rtol * scale:
                converged = True
                break

        fuse = {s: s in partner and (fuse_cost[s] + probs[s][1] * values[recycled[s]]
                                     + probs[s][2] * values[0]) <= values[0]
                for s in states[1:]}
        node = ReuseNode(k, states, fuse, partner, recycled, values, it, converged)
        self.nodes[k] = node
        if not converged:
            return np.full(4, math.inf)

        # Policy evaluation for each resource component: x = c + P x.
        index = {s: i for i, s in enumerate(states)}
        size = len(states)
        a = np.eye(size)
        c = np.zeros((size, 4))
        a[index[0], index[n]] -= 1.0
        c[index[0]] = build_n
        for s in states[1:]:
            i = index[s]
            if fuse[s]:
                _, pr, pf = probs[s]
                a[i, index[recycled[s]]] -= pr
                a[i, index[0]] -= pf
                c[i] = fuse_base[s]
            else:
                a[i, index[0]] -= 1.0
        x = np.linalg.solve(a, c)
        return x[index[0]]


def expected_cost(target: int, gate: Gate | str = Gate.FGF, model: CostModel | None = None,
                  strategy: str = "balanced-tree") -> CostResult:
    gate = Gate(gate)
    model = model or CostModel()
    if target < 3:
        raise ValueError(f"target size must be at least 3, got {target}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")

    exact = None
    if model.recycle_policy is RecyclePolicy.DISCARD:
        res = discard_resources(target, gate, model, strategy)
        exact = dict(zip(("bell_pairs", "ancillas", "attempts", "seed_attempts"), res))
        vec = [float(x) for x in res]
        reachable = True
    else:
        solver = ReuseSolver(gate, model, strategy)
        vec = solver.resources(target).tolist()
        reachable = all(math.isfinite(v) for v in vec)

    return CostResult(
        target_size=target,
        strategy_name=strategy,
        gate=gate,
        policy=model.recycle_policy,
        expected_bell_pairs=vec[0],
        expected_ancillas=vec[1],
        expected_attempts=vec[2],
        expected_seed_attempts=vec[3],
        expected_cost_units=model.units(vec[0], vec[1]) if reachable else math.inf,
        reachable=reachable,
        exact=exact,
    )
