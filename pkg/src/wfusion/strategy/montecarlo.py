"""Monte Carlo growth of W states, as a stochastic cross-check of the cost
analysis and of the simulated branch probabilities.

Attempt outcomes are drawn with the branch probabilities of the exhaustive
fusion simulation (:func:`wfusion.fusion.branch_probabilities`), never the
closed forms.

Reproducibility: trials are split into fixed-size chunks and chunk ``i``
draws from ``PCG64(SeedSequence(seed, spawn_key=(i,)))``, so results are
bit-identical for a given seed whatever the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..fusion import Gate, branch_probabilities
from .cost import CostModel, RecyclePolicy, ReuseSolver, decompose, unit_size

CHUNK = 1 << 16
FIELDS = ("bell", "ancillas", "attempts", "seed_attempts", "successes")


@dataclass(frozen=True)
class McStats:
    trials: int
    seed: int
    success_rate: float | None  # per gate attempt; None when no attempt was made
    success_rate_stderr: float | None
    total_attempts: int
    total_successes: int
    mean_bell_pairs: float
    var_bell_pairs: float
    mean_ancillas: float
    var_ancillas: float
    mean_attempts: float
    var_attempts: float
    mean_seed_attempts: float
    mean_cost_units: float
    var_cost_units: float
    confidence_halfwidth_95: float  # on mean_cost_units

    def stderr(self, quantity: str) -> float:
        return math.sqrt(getattr(self, f"var_{quantity}") / self.trials)


@dataclass(frozen=True)
class _Chain:
    """Per-node chain tables indexed by held size (0 = nothing held)."""

    first: int
    fuse: np.ndarray
    partner: np.ndarray
    recycled: np.ndarray
    p_success: np.ndarray
    p_recycle: np.ndarray


def _negbin_total(rng: np.random.Generator, counts: np.ndarray, p: float) -> np.ndarray:
    """Attempts needed for ``counts`` successes at rate p, per trial."""
    extra = rng.negative_binomial(np.maximum(counts, 1), p)
    return counts + np.where(counts > 0, extra, 0)


class _Sampler:
    def __init__(self, target: int, gate: Gate, model: CostModel, strategy: str, method: str):
        self.gate, self.model, self.strategy = gate, model, strategy
        self.unit = unit_size(gate)
        self.method = method
        self.solver = ReuseSolver(gate, model, strategy) if model.recycle_policy is RecyclePolicy.REUSE else None
        if self.solver is not None:
            self.solver.resources(target)
        self._chains: dict[int, _Chain] = {}

    def _zeros(self, size):
        return {f: np.zeros(size, dtype=np.int64) for f in FIELDS}

    def _base(self, rng, counts):
        out = self._zeros(len(counts))
        if self.gate is Gate.FGF:
            out["bell"] += counts
            return out
        seed = self.model.seed
        tries = _negbin_total(rng, counts, float(seed.probability))
        out["bell"] += seed.bell_pairs * tries
        out["ancillas"] += seed.photons * tries
        out["seed_attempts"] += tries
        return out

    def sample(self, k: int, rng: np.random.Generator, counts: np.ndarray) -> dict[str, np.ndarray]:
        """Resources used by ``counts[i]`` independent builds of size k, per trial i."""
        if k <= self.unit:
            return self._base(rng, counts)
        if self.method == "geometric":
            return self._sample_geometric(k, rng, counts)
        return self._sample_chain(k, rng, counts)

    def _sample_geometric(self, k, rng, counts):
        n, m = decompose(k, self.gate, self.strategy)
        p = branch_probabilities(n, m, self.gate)[0]
        tries = _negbin_total(rng, counts, p)
        out = self._zeros(len(counts))
        out["attempts"] += tries
        out["successes"] += counts
        if self.gate is Gate.FGF:
            out["ancillas"] += tries
        for size in (n, m):
            sub = self.sample(size, rng, tries)
            for f in FIELDS:
                out[f] += sub[f]
        return out

    def _chain(self, k: int) -> _Chain:
        if k in self._chains:
            return self._chains[k]
        n, m = decompose(k, self.gate, self.strategy)
        fuse = np.zeros(k, dtype=bool)
        partner = np.zeros(k, dtype=np.int64)
        recycled = np.zeros(k, dtype=np.int64)
        if self.solver is None:
            fuse[n], partner[n] = True, m
        else:
            node = self.solver.nodes[k]
            for s, q in node.partner.items():
                if node.fuse[s]:
                    fuse[s], partner[s], recycled[s] = True, q, node.recycled[s]
        ps = np.zeros(k)
        pr = np.zeros(k)
        for s in np.flatnonzero(fuse):
            ps[s], pr[s], _ = branch_probabilities(int(s), int(partner[s]), self.gate)
        chain = _Chain(n, fuse, partner, recycled, ps, pr)
        self._chains[k] = chain
        return chain

    def _sample_chain(self, k, rng, counts):
        chain = self._chain(k)
        trials = len(counts)
        owner = np.repeat(np.arange(trials), counts)
        state = np.zeros(len(owner), dtype=np.int64)
        live = np.ones(len(owner), dtype=bool)
        requests = np.zeros((k, trials), dtype=np.int64)
        attempts = np.zeros(trials, dtype=np.int64)
        while live.any():
            empty = live & (state == 0)
            np.add.at(requests[chain.first], owner[empty], 1)
            state[empty] = chain.first

            drop = live & ~chain.fuse[state]
            state[drop] = 0

            go = np.flatnonzero(live & chain.fuse[state])
            s = state[go]
            np.add.at(requests, (chain.partner[s], owner[go]), 1)
            np.add.at(attempts, owner[go], 1)
            u = rng.random(len(go))
            win = u < chain.p_success[s]
            back = ~win & (u < chain.p_success[s] + chain.p_recycle[s])
            live[go[win]] = False
            state[go[back]] = chain.recycled[s[back]]
            state[go[~win & ~back]] = 0

        out = self._zeros(trials)
        out["attempts"] += attempts
        out["successes"] += counts
        if self.gate is Gate.FGF:
            out["ancillas"] += attempts
        for size in np.flatnonzero(requests.any(axis=1)):
            sub = self.sample(int(size), rng, requests[size])
            for f in FIELDS:
                out[f] += sub[f]
        return out


def _run_chunk(args):
    target, gate, model, strategy, method, seed, index, size = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    sampler = _Sampler(target, gate, model, strategy, method)
    return sampler.sample(target, rng, np.ones(size, dtype=np.int64))


def sample_growth(target: int, gate: Gate | str, model: CostModel, strategy: str, trials: int,
                  seed: int = 0, workers: int = 1, method: str = "auto") -> dict[str, np.ndarray]:
    """Per-trial resource arrays for ``trials`` independent growths to ``target``."""
    gate = Gate(gate)
    if trials < 1:
        raise ValueError("need at least one trial")
    if target < 3:
        raise ValueError(f"target size must be at least 3, got {target}")
    if method == "auto":
        method = "geometric" if model.recycle_policy is RecyclePolicy.DISCARD else "chain"
    if method not in ("geometric", "chain"):
        raise ValueError(f"unknown sampling method {method!r}")
    if method == "geometric" and model.recycle_policy is RecyclePolicy.REUSE:
        raise ValueError("the geometric sampler only covers the discard policy")
    if target > unit_size(gate):
        decompose(target, gate, strategy)  # validates the strategy name

    jobs = [
        (target, gate, model, strategy, method, seed, i, min(CHUNK, trials - start))
        for i, start in enumerate(range(0, trials, CHUNK))
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    return {f: np.concatenate([p[f] for p in parts]) for f in FIELDS}


def monte_carlo_growth(target: int, gate: Gate | str = Gate.FGF, model: CostModel | None = None,
                       strategy: str = "balanced-tree", trials: int = 100_000, seed: int = 0,
                       workers: int = 1, method: str = "auto") -> McStats:
    model = model or CostModel()
    data = sample_growth(target, gate, model, strategy, trials, seed, workers, method)
    bell = data["bell"].astype(np.float64)
    anc = data["ancillas"].astype(np.float64)
    att = data["attempts"].astype(np.float64)
    cost = model.bell_pair_cost * bell + model.ancilla_cost * anc
    total_attempts = int(data["attempts"].sum())
    total_successes = int(data["successes"].sum())
    if total_attempts:
        rate = total_successes / total_attempts
        rate_se = math.sqrt(rate * (1 - rate) / total_attempts)
    else:
        rate = rate_se = None
    var_cost = float(cost.var(ddof=1)) if trials > 1 else 0.0
    return McStats(
        trials=trials,
        seed=seed,
        success_rate=rate,
        success_rate_stderr=rate_se,
        total_attempts=total_attempts,
        total_successes=total_successes,
        mean_bell_pairs=float(bell.mean()),
        var_bell_pairs=float(bell.var(ddof=1)) if trials > 1 else 0.0,
        mean_ancillas=float(anc.mean()),
        var_ancillas=float(anc.var(ddof=1)) if trials > 1 else 0.0,
        mean_attempts=float(att.mean()),
        var_attempts=float(att.var(ddof=1)) if trials > 1 else 0.0,
        mean_seed_attempts=float(data["seed_attempts"].mean()),
        mean_cost_units=float(cost.mean()),
        var_cost_units=var_cost,
        confidence_halfwidth_95=1.96 * math.sqrt(var_cost / trials),
    )
