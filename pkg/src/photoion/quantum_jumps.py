"""Electron shelving in ⁴⁰Ca⁺: jump rates, telegraph traces and power inference.

A trace is a two-state process that starts bright.  Bright sojourns end with
a jump into D5/2 at the shelving rate, dark sojourns end after an
exponential time with mean τ(D5/2).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .quantities import DomainError, photon_energy

BRIGHT, DARK = "bright", "dark"


@dataclass(frozen=True)
class IonLevelScheme:
    wavelength_sp_nm: float = 393.0
    oscillator_strength: float = 0.626
    branching_d52: float = 1 / 17
    tau_d52_s: float = 1.0
    tau_p_ns: float = 7.0

    def __post_init__(self):
        if not 0 < self.branching_d52 < 1:
            raise DomainError("branching ratio must lie in (0, 1)")
        for name in ("wavelength_sp_nm", "oscillator_strength", "tau_d52_s", "tau_p_ns"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass(frozen=True)
class SpotGeometry:
    diameter_um: float = 250.0

    def __post_init__(self):
        if not self.diameter_um > 0:
            raise DomainError("spot diameter must be positive")

    @property
    def area_m2(self) -> float:
        return math.pi * (self.diameter_um * 1e-6 / 2) ** 2

    @property
    def area_mm2(self) -> float:
        return self.area_m2 * 1e6


def scattering_probability(ion: IonLevelScheme, spot: SpotGeometry) -> float:
    """p_sc = f·σ/A with the resonant cross section σ = λ²/2π."""
    lam = ion.wavelength_sp_nm * 1e-9
    return ion.oscillator_strength * lam**2 / (2 * math.pi) / spot.area_m2


def infer_resonant_power(rate_hz: float, ion: IonLevelScheme, spot: SpotGeometry) -> tuple[float, float]:
    """Resonant power (W) and intensity (W/mm²) implied by a quantum-jump rate."""
    if rate_hz < 0:
        raise DomainError("jump rate must be non-negative")
    flux = rate_hz / (scattering_probability(ion, spot) * ion.branching_d52)
    power = flux * photon_energy(ion.wavelength_sp_nm)
    return power, power / spot.area_mm2


def shelving_rate(power_w: float, ion: IonLevelScheme, spot: SpotGeometry) -> float:
    """Jump rate (Hz) into D5/2 for a resonant power ``power_w``; inverse of the above."""
    if power_w < 0:
        raise DomainError("power must be non-negative")
    flux = power_w / photon_energy(ion.wavelength_sp_nm)
    return flux * scattering_probability(ion, spot) * ion.branching_d52


@dataclass(frozen=True, eq=False)
class TelegraphTrace:
    states: tuple[str, ...]
    durations: np.ndarray
    seed: int | None
    total_duration: float
    censored_last: bool = True  # last interval cut by the end of the record

    def __post_init__(self):
        d = np.asarray(self.durations, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != d.size:
            raise ValueError("states and durations differ in length")
        if np.any(d <= 0):
            raise DomainError("interval durations must be positive")
        for a, b in zip(self.states, self.states[1:]):
            if a == b:
                raise DomainError("states must alternate")
        if self.states and self.states[0] not in (BRIGHT, DARK):
            raise DomainError(f"unknown state {self.states[0]!r}")

    def __len__(self):
        return len(self.states)

    @property
    def start_times(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.durations)[:-1])) if len(self) else np.empty(0)

    def durations_of(self, state: str, complete_only: bool = True) -> np.ndarray:
        mask = np.array([s == state for s in self.states], dtype=bool)
        if complete_only and self.censored_last and mask.size:
            mask[-1] = False
        return self.durations[mask]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t_start_s", "state", "duration_s"])
        for t, s, d in zip(self.start_times, self.states, self.durations):
            writer.writerow([repr(float(t)), s, repr(float(d))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, seed: int | None = None, censored_last: bool = True) -> "TelegraphTrace":
        rows = list(csv.DictReader(io.StringIO(text)))
        states = [r["state"] for r in rows]
        durations = np.array([float(r["duration_s"]) for r in rows])
        return cls(tuple(states), durations, seed, float(durations.sum()), censored_last)

    def binned(self, bin_width_s: float) -> np.ndarray:
        """Camera-like record: 1 for bright, 0 for dark, state at each bin center."""
        if not bin_width_s > 0:
            raise DomainError("bin width must be positive")
        n = int(math.floor(self.total_duration / bin_width_s))
        centers = (np.arange(n) + 0.5) * bin_width_s
        edges = np.cumsum(self.durations)
        idx = np.searchsorted(edges, centers, side="right")
        bright = np.array([s == BRIGHT for s in self.states] + [False])
        return bright[np.minimum(idx, len(self.states))].astype(int)


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    """Sub-seed of trial ``trial``: ``SeedSequence([master_seed, trial])``."""
    return np.random.SeedSequence([int(master_seed), int(trial)])


def simulate_telegraph(shelve_rate_hz: float, tau_dark_s: float, duration_s: float,
                       seed: int | np.random.SeedSequence | None = None) -> TelegraphTrace:
    """Alternating exponential sojourns starting bright, cut at ``duration_s``."""
    if shelve_rate_hz < 0 or tau_dark_s <= 0 or duration_s < 0:
        raise DomainError("rates must be non-negative, tau_dark and duration positive")
    seed_value = int(seed) if isinstance(seed, (int, np.integer)) else None
    rng = np.random.default_rng(seed)
    if duration_s == 0:
        return TelegraphTrace((), np.empty(0), seed_value, 0.0, censored_last=False)
    if shelve_rate_hz == 0:
        return TelegraphTrace((BRIGHT,), np.array([duration_s]), seed_value, duration_s)

    mean_bright = 1.0 / shelve_rate_hz
    # draw in blocks of (bright, dark) pairs until the record is filled
    expected_pairs = duration_s / (mean_bright + tau_dark_s)
    block = int(expected_pairs + 5 * math.sqrt(expected_pairs) + 16)
    chunks = []
    elapsed = 0.0
    while elapsed < duration_s:
        pairs = np.empty((block, 2))
        pairs[:, 0] = rng.exponential(mean_bright, block)
        pairs[:, 1] = rng.exponential(tau_dark_s, block)
        flat = pairs.ravel()
        chunks.append(flat)
        elapsed += float(flat.sum())
    flat = np.concatenate(chunks)
    ends = np.cumsum(flat)
    n = int(np.searchsorted(ends, duration_s, side="left")) + 1
    durations = flat[:n].copy()
    durations[-1] = duration_s - (ends[n - 2] if n > 1 else 0.0)
    censored = True
    if durations[-1] <= 0:  # boundary landed exactly on a jump
        durations = durations[:-1]
        censored = False
    states = tuple(BRIGHT if i % 2 == 0 else DARK for i in range(durations.size))
    return TelegraphTrace(states, durations, seed_value, duration_s, censored)


def simulate_trials(shelve_rate_hz: float, tau_dark_s: float, duration_s: float, master_seed: int,
                    n_trials: int, workers: int | None = None) -> list[TelegraphTrace]:
    """Independent traces; trial i uses ``trial_seed(master_seed, i)``."""
    def run(i):
        trace = simulate_telegraph(shelve_rate_hz, tau_dark_s, duration_s, trial_seed(master_seed, i))
        return replace(trace, seed=master_seed)

    if not workers or workers <= 1:
        return [run(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(n_trials)))


@dataclass(frozen=True)
class JumpStatistics:
    rate_qj_hz: float | None
    rate_qj_se_hz: float | None
    mean_dark_time_s: float | None
    mean_dark_time_se_s: float | None
    n_bright: int  # bright intervals ended by a jump
    n_dark: int  # dark intervals ended by a return
    bright_time_s: float
    dark_time_s: float
    flags: tuple[str, ...] = field(default=())

    @classmethod
    def from_counts(cls, jumps: int, returns: int, bright_time: float, dark_time: float) -> "JumpStatistics":
        flags = []
        rate = rate_se = mean_dark = mean_dark_se = None
        if jumps > 0 and bright_time > 0:
            rate = jumps / bright_time
            rate_se = rate / math.sqrt(jumps)
        else:
            flags.append("no_jumps_observed")
        if returns > 0:
            mean_dark = dark_time / returns
            mean_dark_se = mean_dark / math.sqrt(returns)
        else:
            flags.append("dark_statistics_unavailable")
        return cls(rate, rate_se, mean_dark, mean_dark_se, jumps, returns,
                   bright_time, dark_time, tuple(flags))

    def combine(self, other: "JumpStatistics") -> "JumpStatistics":
        return JumpStatistics.from_counts(self.n_bright + other.n_bright, self.n_dark + other.n_dark,
                                          self.bright_time_s + other.bright_time_s,
                                          self.dark_time_s + other.dark_time_s)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["flags"] = list(self.flags)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_report(self) -> str:
        units = {"rate_qj_hz": "Hz", "rate_qj_se_hz": "Hz", "mean_dark_time_s": "s",
                 "mean_dark_time_se_s": "s", "bright_time_s": "s", "dark_time_s": "s"}
        lines = []
        for key, value in self.to_dict().items():
            if key == "flags":
                value = ",".join(value) or "none"
            elif value is None:
                value = "unavailable"
            elif isinstance(value, float):
                value = f"{value:.6g}"
            unit = units.get(key)
            lines.append(f"{key}={value}" + (f" {unit}" if unit and value != "unavailable" else ""))
        return "\n".join(lines) + "\n"


def estimate_rates(trace: TelegraphTrace | Sequence[TelegraphTrace]) -> JumpStatistics:
    """Censored maximum-likelihood rates from one trace or a pool of traces.

    R_QJ = (number of bright→dark jumps) / (total bright time), and the dark
    time is total dark time over completed dark intervals.  A censored final
    interval adds exposure but no event.
    """
    traces = [trace] if isinstance(trace, TelegraphTrace) else list(trace)
    stats = None
    for tr in traces:
        jumps = len(tr.durations_of(BRIGHT))
        returns = len(tr.durations_of(DARK))
        bright = float(tr.durations_of(BRIGHT, complete_only=False).sum())
        dark = float(tr.durations_of(DARK, complete_only=False).sum())
        s = JumpStatistics.from_counts(jumps, returns, bright, dark)
        stats = s if stats is None else stats.combine(s)
    if stats is None:
        return JumpStatistics.from_counts(0, 0, 0.0, 0.0)
    return stats
