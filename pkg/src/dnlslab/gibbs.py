"""MCMC sampling of the mass-cutoff lattice Gibbs ensemble.

The target is Z^-1 exp(-beta H(f)) restricted to N(f) <= B n, with H in
the site-normalized convention. Each sweep performs n single-site
complex Gaussian perturbations (scale adapted during burn-in only), one
mass-transfer move between a random site pair, and one site-swap move.
The transfer move exchanges macroscopic mass chunks at fixed total
power, which is what lets a condensate exchange mass with the background
at the cutoff boundary; single-site moves alone stall there.

Nucleating a condensate from uniform initial data is a different matter:
the ensemble has a first-order transition, and the probability valley
between the uncondensed and condensed phases is exponentially small in
n, so no local sampler crosses it at equilibrium rates. Chains are
therefore started in the phase predicted stable by the closed-form
theory ("auto" initialization); melting of a wrongly seeded condensate
in the strongly subcritical regime is fast and is exercised in tests.

Replica exchange over an increasing beta grid and thermodynamic
integration of E[H] reuse the same sweeps. All chains draw from
independent seeded PCG64 streams; results are bit-reproducible for
fixed seeds and schedule.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import MixingError, NumericalError
from .lattice import LatticeConfig, Wavefunction, neighbor_indices
from .observables import ModelSpec
from .theory import condensate_fraction, critical_theta

__all__ = [
    "GibbsParams",
    "ChainState",
    "EnsembleStats",
    "ChainResult",
    "LogPartitionEstimate",
    "uniform_ball_sample",
    "run_chain",
    "tempered_sweep",
    "log_partition",
    "log_partition_zero",
    "condensation_stats",
    "gibbs_records_to_jsonl",
    "write_wave_dump",
    "read_wave_dump",
]

OBSERVABLES = ("N_per_site", "H_per_site", "M1_per_site", "M2_per_site", "mass_fraction")

_ADAPT_WINDOW = 50
_ADAPT_FACTOR = 1.15
_ACCEPT_BAND = (0.23, 0.44)
_REFRESH_EVERY = 100


@dataclass(frozen=True)
class GibbsParams:
    """Inverse temperature, per-site mass cutoff, lattice, and model."""

    beta: float
    B: float
    lattice: LatticeConfig
    model: ModelSpec

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.B <= 0:
            raise ValueError(f"mass cutoff B must be positive, got {self.B}")
        if self.model.convention != "site_normalized":
            raise ValueError("the Gibbs ensemble uses the site_normalized convention")
        if self.model.kernel.kind != "nearest_neighbor":
            raise ValueError("the Gibbs ensemble couples nearest neighbors")
        if self.model.lattice != self.lattice:
            raise ValueError("model and params lattice differ")

    @property
    def mass_budget(self) -> float:
        return self.B * self.lattice.n

    @property
    def kin_coef(self) -> float:
        lat = self.lattice
        return 2.0 * self.model.kinetic_pair_factor / (lat.n * lat.h**2)


@dataclass
class ChainState:
    """Mutable sampler state: field, cached N and H, scales, counters, rng."""

    f: Wavefunction
    N_cur: float
    H_cur: float
    proposal_sigma: float
    accept_counts: dict
    proposal_counts: dict
    rng_state: np.random.Generator


@dataclass
class EnsembleStats:
    """Batch-means summaries of the per-sweep observables."""

    means: dict
    stderrs: dict
    ess: dict
    acceptance: dict
    n_samples: int
    n_batches: int

    @property
    def min_ess(self) -> float:
        return min(self.ess.values()) if self.ess else 0.0


@dataclass
class ChainResult:
    stats: EnsembleStats
    records: dict  # arrays keyed by sweep/N/H/M1/M2/argmax
    states: list  # thinned full-state snapshots (Wavefunction)
    final: ChainState
    params: GibbsParams


@dataclass
class LogPartitionEstimate:
    value: float
    stderr: float
    log_z0: float
    beta_nodes: np.ndarray
    weights: np.ndarray
    eh_means: np.ndarray
    eh_stderrs: np.ndarray
    mixing_flag: bool


def uniform_ball_sample(rng: np.random.Generator, n: int, budget: float) -> np.ndarray:
    """Exact uniform draw from {f in C^n : sum |f_k|^2 <= budget}."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    r2 = budget * rng.random() ** (1.0 / n)
    return z * math.sqrt(r2 / float(np.sum(np.abs(z) ** 2)))


def _condensed_seed(rng: np.random.Generator, params: GibbsParams) -> np.ndarray:
    """Condensate at a random site over a Gaussian background, N just inside the cutoff."""
    n = params.lattice.n
    B, beta = params.B, params.beta
    theta = beta * B * B
    a = condensate_fraction(beta, B)[0] if theta >= 2.0 else 0.7 * B
    bg_var = max(B - a, 1e-3 * B)
    vals = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(bg_var / 2.0)
    site = int(rng.integers(n))
    vals[site] = math.sqrt(a * n)
    total = float(np.sum(np.abs(vals) ** 2))
    vals *= math.sqrt(0.999 * params.mass_budget / total)
    return vals


def _init_values(params: GibbsParams, rng: np.random.Generator, init) -> np.ndarray:
    if isinstance(init, Wavefunction):
        if init.lattice != params.lattice:
            raise ValueError("initial state lattice mismatch")
        v = init.values.copy()
        if float(np.sum(np.abs(v) ** 2)) > params.mass_budget:
            raise ValueError("initial state violates the mass cutoff")
        return v
    if init == "auto":
        theta = params.beta * params.B**2
        init = "condensed" if theta > critical_theta() else "uniform"
    if init == "uniform":
        return uniform_ball_sample(rng, params.lattice.n, params.mass_budget)
    if init == "condensed":
        return _condensed_seed(rng, params)
    raise ValueError(f"unknown init {init!r}")


class _Chain:
    """Internal lockstep-capable chain over one beta."""

    def __init__(self, params: GibbsParams, rng: np.random.Generator, init, sigma0: float):
        self.params = params
        self.rng = rng
        self.nbrs = neighbor_indices(params.lattice)
        self.vals = _init_values(params, rng, init).astype(np.complex128)
        self.n = params.lattice.n
        self.kin_coef = params.kin_coef
        self.N = float(np.sum(np.abs(self.vals) ** 2))
        self.H = float(_kernels.full_energy(self.vals, self.nbrs, self.kin_coef, self.n))
        self.sigma = sigma0
        self.acc = {"site": 0, "transfer": 0, "swap": 0}
        self.prop = {"site": 0, "transfer": 0, "swap": 0}
        self._acc_window = 0

    def sweep(self, sweep_index: int, adapting: bool, enable_transfer=True, enable_swap=True):
        p, rng, n = self.params, self.rng, self.n
        gre = rng.standard_normal(n)
        gim = rng.standard_normal(n)
        uacc = rng.random(n)
        self.N, self.H, acc = _kernels.site_sweep(
            self.vals, self.nbrs, p.beta, p.mass_budget, self.kin_coef, n,
            self.sigma, gre, gim, uacc, self.N, self.H,
        )
        self.acc["site"] += acc
        self.prop["site"] += n
        self._acc_window += acc
        if enable_transfer:
            j, k = rng.integers(n), rng.integers(n)
            ufrac, uphase, ua = rng.random(), rng.random() * 2.0 * math.pi, rng.random()
            self.H, ok = _kernels.transfer_move(
                self.vals, self.nbrs, p.beta, self.kin_coef, n,
                int(j), int(k), ufrac, uphase, ua, self.H,
            )
            self.acc["transfer"] += int(ok)
            self.prop["transfer"] += 1
        if enable_swap:
            j, k = rng.integers(n), rng.integers(n)
            ua = rng.random()
            self.H, ok = _kernels.swap_move(
                self.vals, self.nbrs, p.beta, self.kin_coef, n, int(j), int(k), ua, self.H,
            )
            self.acc["swap"] += int(ok)
            self.prop["swap"] += 1
        if adapting and (sweep_index + 1) % _ADAPT_WINDOW == 0:
            rate = self._acc_window / (_ADAPT_WINDOW * n)
            self._acc_window = 0
            if rate > _ACCEPT_BAND[1]:
                self.sigma *= _ADAPT_FACTOR
            elif rate < _ACCEPT_BAND[0]:
                self.sigma /= _ADAPT_FACTOR
        if (sweep_index + 1) % _REFRESH_EVERY == 0:
            self.refresh()

    def refresh(self):
        self.N = float(np.sum(np.abs(self.vals) ** 2))
        self.H = float(_kernels.full_energy(self.vals, self.nbrs, self.kin_coef, self.n))
        if not (math.isfinite(self.N) and math.isfinite(self.H)):
            raise NumericalError("chain state turned non-finite")

    def observe(self):
        m = np.abs(self.vals) ** 2
        k1 = int(np.argmax(m))
        M1 = float(m[k1])
        m[k1] = -1.0
        M2 = float(np.max(m)) if self.n > 1 else 0.0
        return self.N, self.H, M1, M2, k1

    def state(self) -> ChainState:
        return ChainState(
            f=Wavefunction(self.vals.copy(), self.params.lattice),
            N_cur=self.N,
            H_cur=self.H,
            proposal_sigma=self.sigma,
            accept_counts=dict(self.acc),
            proposal_counts=dict(self.prop),
            rng_state=self.rng,
        )


def _batch_stats(series: dict, acceptance: dict, n_batches: int = 20) -> EnsembleStats:
    means, stderrs, ess = {}, {}, {}
    n_samples = 0
    for name, xs in series.items():
        xs = np.asarray(xs, dtype=float)
        n_samples = xs.size
        means[name] = float(np.mean(xs))
        if xs.size >= n_batches * 2:
            batches = np.array_split(xs, n_batches)
            bm = np.array([np.mean(b) for b in batches])
            se = float(np.std(bm, ddof=1) / math.sqrt(n_batches))
            stderrs[name] = se
            var = float(np.var(xs, ddof=1))
            ess[name] = float(min(xs.size, var / se**2)) if se > 0 else float(xs.size)
        else:
            stderrs[name] = float("nan")
            ess[name] = float(xs.size)
    return EnsembleStats(
        means=means, stderrs=stderrs, ess=ess, acceptance=acceptance,
        n_samples=n_samples, n_batches=n_batches,
    )


def _collect(chain: _Chain, sweeps: int, burn_in: int, state_stride: int,
             enable_transfer=True, enable_swap=True):
    n = chain.n
    kept = sweeps - burn_in
    rec = {
        "sweep": np.empty(kept, dtype=np.int64),
        "N": np.empty(kept),
        "H": np.empty(kept),
        "M1": np.empty(kept),
        "M2": np.empty(kept),
        "argmax": np.empty(kept, dtype=np.int64),
    }
    states = []
    j = 0
    for s in range(sweeps):
        chain.sweep(s, adapting=s < burn_in, enable_transfer=enable_transfer,
                    enable_swap=enable_swap)
        if s >= burn_in:
            N, H, M1, M2, k1 = chain.observe()
            rec["sweep"][j] = s
            rec["N"][j] = N
            rec["H"][j] = H
            rec["M1"][j] = M1
            rec["M2"][j] = M2
            rec["argmax"][j] = k1
            if state_stride and (j % state_stride == 0):
                states.append(Wavefunction(chain.vals.copy(), chain.params.lattice))
            j += 1
    return rec, states


def _result_from_records(chain: _Chain, rec: dict, states: list) -> ChainResult:
    n = chain.n
    series = {
        "N_per_site": rec["N"] / n,
        "H_per_site": rec["H"] / n,
        "M1_per_site": rec["M1"] / n,
        "M2_per_site": rec["M2"] / n,
        "mass_fraction": rec["M1"] / np.maximum(rec["N"], 1e-300),
    }
    acceptance = {
        k: (chain.acc[k] / chain.prop[k] if chain.prop[k] else float("nan"))
        for k in chain.acc
    }
    stats = _batch_stats(series, acceptance)
    return ChainResult(stats=stats, records=rec, states=states, final=chain.state(),
                       params=chain.params)


def run_chain(
    params: GibbsParams,
    seed: int,
    sweeps: int,
    burn_in: int,
    init="auto",
    sigma0: float = 0.5,
    state_stride: int = 0,
    enable_transfer: bool = True,
    enable_swap: bool = True,
) -> ChainResult:
    """Metropolis sampling of the cutoff ensemble at a single beta.

    Statistics cover the post-burn-in sweeps; `state_stride` > 0 keeps a
    full field snapshot every that many retained sweeps. Reusing one
    seed across chains that are meant to be independent is the caller's
    mistake; the generator stream is owned by this chain alone.
    """
    if not sweeps > burn_in >= 0:
        raise ValueError("need sweeps > burn_in >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    chain = _Chain(params, rng, init, sigma0)
    rec, states = _collect(chain, sweeps, burn_in, state_stride,
                           enable_transfer, enable_swap)
    return _result_from_records(chain, rec, states)


def tempered_sweep(
    params_list: list[GibbsParams],
    seed: int,
    sweeps: int,
    burn_in: int,
    init="auto",
    sigma0: float = 0.5,
    state_stride: int = 0,
) -> tuple[list[ChainResult], dict]:
    """Replica exchange over an increasing beta grid.

    Adjacent chains propose a state swap after every sweep (alternating
    pairing parity), accepted with probability
    exp((beta_i - beta_j)(H_i - H_j)). Per-beta statistics are merged
    only after all chains finish; a grid of size 1 degrades to a plain
    chain.
    """
    if not params_list:
        raise ValueError("empty beta grid")
    betas = [p.beta for p in params_list]
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("beta grid must be increasing")
    base = [p for p in params_list[1:]]
    for p in base:
        if p.lattice != params_list[0].lattice or p.B != params_list[0].B:
            raise ValueError("tempered chains must share the lattice and mass cutoff")
    if len(params_list) == 1:
        return [run_chain(params_list[0], seed, sweeps, burn_in, init=init,
                          sigma0=sigma0, state_stride=state_stride)], {"swap_rate": float("nan")}

    K = len(params_list)
    seqs = np.random.SeedSequence(seed).spawn(K + 1)
    chains = [_Chain(p, np.random.default_rng(s), init, sigma0)
              for p, s in zip(params_list, seqs[:K])]
    swap_rng = np.random.default_rng(seqs[K])

    kept = sweeps - burn_in
    recs = [
        {
            "sweep": np.empty(kept, dtype=np.int64),
            "N": np.empty(kept), "H": np.empty(kept),
            "M1": np.empty(kept), "M2": np.empty(kept),
            "argmax": np.empty(kept, dtype=np.int64),
        }
        for _ in range(K)
    ]
    states: list[list] = [[] for _ in range(K)]
    swap_acc, swap_prop = 0, 0
    j = 0
    for s in range(sweeps):
        for ch in chains:
            ch.sweep(s, adapting=s < burn_in)
        start = s % 2
        for i in range(start, K - 1, 2):
            a, b = chains[i], chains[i + 1]
            log_r = (a.params.beta - b.params.beta) * (a.H - b.H)
            swap_prop += 1
            if log_r >= 0.0 or swap_rng.random() < math.exp(log_r):
                a.vals, b.vals = b.vals, a.vals
                a.N, b.N = b.N, a.N
                a.H, b.H = b.H, a.H
                swap_acc += 1
        if s >= burn_in:
            for i, ch in enumerate(chains):
                N, H, M1, M2, k1 = ch.observe()
                recs[i]["sweep"][j] = s
                recs[i]["N"][j] = N
                recs[i]["H"][j] = H
                recs[i]["M1"][j] = M1
                recs[i]["M2"][j] = M2
                recs[i]["argmax"][j] = k1
                if state_stride and (j % state_stride == 0):
                    states[i].append(Wavefunction(ch.vals.copy(), ch.params.lattice))
            j += 1
    results = [_result_from_records(ch, rec, st) for ch, rec, st in zip(chains, recs, states)]
    diag = {"swap_rate": swap_acc / swap_prop if swap_prop else float("nan")}
    return results, diag


def log_partition_zero(n: int, B: float) -> float:
    """Exact (1/n) log Z at beta = 0: the cutoff ball volume in C^n."""
    if n < 1 or B <= 0:
        raise ValueError("need n >= 1 and B > 0")
    return math.log(math.pi * B * n) - math.lgamma(n + 1) / n


def log_partition(
    params: GibbsParams,
    seed: int,
    n_nodes: int = 16,
    sweeps_per_node: int = 12500,
    burn_in: int = 2500,
    split_at_transition: bool = True,
) -> LogPartitionEstimate:
    """Thermodynamic integration of (1/n) log Z from 0 to params.beta.

    (1/n) log Z(beta) = (1/n) log Z(0) - integral_0^beta E[H]/n dbeta'.
    Nodes are Gauss-Legendre; when the path crosses the predicted
    transition the panel is split there, since E[H] has a near-jump that
    a single panel resolves poorly. Node expectations come from replica
    exchange over the node grid. A non-monotone E[H] profile beyond
    statistical error is flagged as a mixing failure.
    """
    beta = params.beta
    n = params.lattice.n
    lz0 = log_partition_zero(n, params.B)
    if beta == 0.0:
        return LogPartitionEstimate(
            value=lz0, stderr=0.0, log_z0=lz0,
            beta_nodes=np.array([]), weights=np.array([]),
            eh_means=np.array([]), eh_stderrs=np.array([]), mixing_flag=False,
        )
    beta_c = critical_theta() / params.B**2
    panels = []
    if split_at_transition and beta > beta_c:
        k1 = max(2, n_nodes // 2)
        k2 = max(2, n_nodes - k1)
        panels = [(0.0, beta_c, k1), (beta_c, beta, k2)]
    else:
        panels = [(0.0, beta, n_nodes)]
    nodes, weights = [], []
    for a, b, k in panels:
        x, w = np.polynomial.legendre.leggauss(k)
        nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)

    grid = [GibbsParams(beta=float(b), B=params.B, lattice=params.lattice, model=params.model)
            for b in nodes]
    results, _ = tempered_sweep(grid, seed, sweeps_per_node, burn_in)
    eh = np.array([r.stats.means["H_per_site"] for r in results])
    eh_se = np.array([r.stats.stderrs["H_per_site"] for r in results])

    mixing_flag = False
    for i in range(len(eh) - 1):
        tol = 4.0 * math.hypot(eh_se[i], eh_se[i + 1]) + 1e-12
        if eh[i + 1] > eh[i] + tol:  # E[H] must be non-increasing in beta
            mixing_flag = True
    value = lz0 - float(np.dot(weights, eh))
    stderr = float(np.sqrt(np.sum((weights * eh_se) ** 2)))
    return LogPartitionEstimate(
        value=value, stderr=stderr, log_z0=lz0, beta_nodes=nodes, weights=weights,
        eh_means=eh, eh_stderrs=eh_se, mixing_flag=mixing_flag,
    )


def condensation_stats(samples: list[Wavefunction], model: ModelSpec) -> EnsembleStats:
    """Ensemble means and errors of N/n, H/n, M1/n, M2/n over given states."""
    from .observables import top_two_masses

    if not samples:
        raise ValueError("empty sample ensemble")
    n = samples[0].lattice.n
    series = {k: [] for k in OBSERVABLES}
    for f in samples:
        st = top_two_masses(f, model)
        series["N_per_site"].append(st.N / n)
        series["H_per_site"].append(st.H / n)
        series["M1_per_site"].append(st.M1 / n)
        series["M2_per_site"].append(st.M2 / n)
        series["mass_fraction"].append(st.mass_fraction)
    return _batch_stats(series, acceptance={})


def gibbs_records_to_jsonl(records: dict) -> str:
    """One JSON record per retained sweep: sweep, N, H, M1, M2, argmax."""
    lines = []
    for i in range(records["sweep"].size):
        lines.append(json.dumps({
            "sweep": int(records["sweep"][i]),
            "N": float(records["N"][i]),
            "H": float(records["H"][i]),
            "M1": float(records["M1"][i]),
            "M2": float(records["M2"][i]),
            "argmax": int(records["argmax"][i]),
        }))
    return "\n".join(lines) + "\n"


_DUMP_MAGIC = b"DNLSWAVE"


def write_wave_dump(path, f: Wavefunction) -> None:
    """Binary state dump: magic, u32 n, u32 reserved, n interleaved re/im f64, all little-endian."""
    inter = np.empty(2 * f.lattice.n, dtype="<f8")
    inter[0::2] = f.values.real
    inter[1::2] = f.values.imag
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<II", f.lattice.n, 0))
        fh.write(inter.tobytes())


def read_wave_dump(path, lattice: LatticeConfig) -> Wavefunction:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _DUMP_MAGIC:
            raise ValueError(f"bad magic {magic!r} in wave dump")
        n, _reserved = struct.unpack("<II", fh.read(8))
        if n != lattice.n:
            raise ValueError(f"dump holds {n} sites, lattice has {lattice.n}")
        inter = np.frombuffer(fh.read(16 * n), dtype="<f8")
    return Wavefunction(inter[0::2] + 1j * inter[1::2], lattice)
