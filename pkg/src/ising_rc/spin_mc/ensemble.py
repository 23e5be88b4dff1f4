"""Configuration streams, replicas and binary spooling."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..lattice import LatticeGraph, graph_from_dict
from ..observables.autocorr import integrated_autocorr_time
from .chain import SAMPLERS, ChainState, ModelParams, check_configuration

SPOOL_MAGIC = b"ISRC1\n"

# pilot length for the automatic burn-in, and bounds on the result
PILOT_SWEEPS = 200
MIN_BURN_IN = 20
MAX_BURN_IN = 20_000


@dataclass(frozen=True)
class Schedule:
    """``burn_in=None`` asks for ten integrated autocorrelation times of a pilot run."""

    n_samples: int
    thinning: int = 1
    burn_in: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1 or self.thinning < 1:
            raise ValueError("n_samples and thinning must be positive")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")


@dataclass
class SampleStream:
    """``spins[k]`` is the k-th emitted configuration (int8, one row per sample)."""

    graph: LatticeGraph
    params: ModelParams
    schedule: Schedule
    sampler: str
    spins: np.ndarray
    burn_in_used: int = 0
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.spins.shape[0]

    def __iter__(self):
        return iter(self.spins)

    def header(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "params": self.params.to_dict(),
            "schedule": asdict(self.schedule),
            "sampler": self.sampler,
            "burn_in_used": self.burn_in_used,
            "n_samples": len(self),
            **self.metadata,
        }

    @classmethod
    def from_array(cls, g: LatticeGraph, spins, params: ModelParams | None = None) -> "SampleStream":
        """Wrap an externally produced configuration array (e.g. exact samples)."""
        spins = np.atleast_2d(np.asarray(spins, dtype=np.int8))
        for row in spins[:1]:
            check_configuration(row, g)
        return cls(g, params or ModelParams(0.0), Schedule(max(len(spins), 1), burn_in=0), "external",
                   spins)


def _magnetisation_series(s: ChainState, g, p, step, n) -> np.ndarray:
    m = np.empty(n)
    for k in range(n):
        step(s, g, p, 1)
        m[k] = abs(int(s.spins.sum(dtype=np.int64)))
    return m


def auto_burn_in(s: ChainState, g: LatticeGraph, p: ModelParams, sampler: str) -> int:
    """Run a pilot, estimate tau of |M| and return ten times it (pilot included)."""
    step = SAMPLERS[sampler]
    m = _magnetisation_series(s, g, p, step, PILOT_SWEEPS)
    tau = integrated_autocorr_time(m) if np.ptp(m) > 0 else 1.0
    extra = int(np.clip(np.ceil(10 * tau), MIN_BURN_IN, MAX_BURN_IN)) - PILOT_SWEEPS
    if extra > 0:
        step(s, g, p, extra)
    return PILOT_SWEEPS + max(extra, 0)


def sample_ensemble(g: LatticeGraph, p: ModelParams, schedule: Schedule,
                    sampler: str = "wolff", start: str = "random") -> SampleStream:
    """Run one chain and collect ``n_samples`` configurations.

    One unit of ``thinning`` is one sweep (for Wolff: clusters covering about
    ``V`` sites).  The stream is a deterministic function of ``schedule.seed``.
    """
    if sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {sorted(SAMPLERS)}")
    step = SAMPLERS[sampler]
    s = ChainState.new(g, np.random.SeedSequence(schedule.seed), start)
    if schedule.burn_in is None:
        burn = auto_burn_in(s, g, p, sampler)
    else:
        burn = schedule.burn_in
        if burn:
            step(s, g, p, burn)
    out = np.empty((schedule.n_samples, g.n_vertices), np.int8)
    for k in range(schedule.n_samples):
        step(s, g, p, schedule.thinning)
        out[k] = s.spins
    return SampleStream(g, p, schedule, sampler, out, burn, {"seed": schedule.seed})


def replica_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    """Child seed sequences; replica ``k`` always gets child ``k``."""
    return np.random.SeedSequence(seed).spawn(n)


def run_replicas(fn, seed, n_replicas: int, threads: int = 1) -> list:
    """Call ``fn(replica_index, seed_sequence)`` for each replica.

    Results are returned in replica order whatever the thread scheduling, so
    the output only depends on ``seed``.
    """
    seeds = replica_seeds(seed, n_replicas)
    if threads <= 1:
        return [fn(k, ss) for k, ss in enumerate(seeds)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_replicas), seeds))


# -- spool files ------------------------------------------------------------

def write_spool(stream: SampleStream, path) -> Path:
    """Magic, header length, JSON header, then one packed bit row per configuration (1 = +1)."""
    path = Path(path)
    header = json.dumps(stream.header(), sort_keys=True).encode()
    bits = np.packbits(stream.spins > 0, axis=1)
    with path.open("wb") as fh:
        fh.write(SPOOL_MAGIC)
        fh.write(len(header).to_bytes(8, "little"))
        fh.write(header)
        fh.write(bits.tobytes())
    return path


def read_spool(path) -> SampleStream:
    with Path(path).open("rb") as fh:
        if fh.read(len(SPOOL_MAGIC)) != SPOOL_MAGIC:
            raise ValueError(f"{path}: not a spool file")
        n = int.from_bytes(fh.read(8), "little")
        head = json.loads(fh.read(n))
        body = fh.read()
    g = graph_from_dict(head["graph"])
    V = g.n_vertices
    n_samples = head["n_samples"]
    bits = np.frombuffer(body, np.uint8).reshape(n_samples, -1)
    spins = np.unpackbits(bits, axis=1, count=V).astype(np.int8) * 2 - 1
    sched = Schedule(**head["schedule"])
    meta = {k: v for k, v in head.items()
            if k not in ("graph", "params", "schedule", "sampler", "burn_in_used", "n_samples")}
    return SampleStream(g, ModelParams(**head["params"]), sched, head["sampler"], spins,
                        head["burn_in_used"], meta)
