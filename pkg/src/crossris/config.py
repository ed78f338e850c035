"""Physical, protocol and solver parameters of the two-medium scenario.

By default D1 sits on a sub-6 GHz medium and D2 on a mmWave one, with a
4-antenna AP per medium and a 16-element RIS.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Invalid configuration value; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Medium:
    """One propagation medium (carrier band) and its antenna/fading figures."""

    id: int
    carrier_freq: float  # Hz
    bandwidth: float  # Hz
    antenna_gain_db: float  # total gain G_i of device, RIS and AP
    rician_k_db: float

    def __post_init__(self):
        if self.id not in (1, 2):
            raise ConfigError("id", f"medium id must be 1 or 2, got {self.id}")
        if not self.carrier_freq > 0:
            raise ConfigError("carrier_freq", "must be > 0")
        if not self.bandwidth > 0:
            raise ConfigError("bandwidth", "must be > 0")
        if math.isnan(self.rician_k_db):
            raise ConfigError("rician_k_db", "must not be NaN")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def rician_k(self) -> float:
        return db_to_linear(self.rician_k_db)


SUB6 = Medium(id=1, carrier_freq=2.4e9, bandwidth=10e6, antenna_gain_db=10.0, rician_k_db=5.0)
MMWAVE = Medium(id=2, carrier_freq=30e9, bandwidth=100e6, antenna_gain_db=20.0, rician_k_db=10.0)

Point = tuple[float, float]


@dataclass(frozen=True)
class Geometry:
    """2-D node positions in meters. Devices on the lower row, APs on the upper."""

    d1: Point = (-25.0, -25.0)
    d2: Point = (25.0, -25.0)
    ap1: Point = (-25.0, 25.0)
    ap2: Point = (25.0, 25.0)
    ris: Point = (0.0, 0.0)

    def __post_init__(self):
        for name in ("d1", "d2", "ap1", "ap2", "ris"):
            p = getattr(self, name)
            if len(p) != 2 or not all(math.isfinite(float(c)) for c in p):
                raise ConfigError(name, f"expected two finite coordinates, got {p!r}")
            object.__setattr__(self, name, (float(p[0]), float(p[1])))

    def device(self, i: int) -> Point:
        return (self.d1, self.d2)[i]

    def ap(self, i: int) -> Point:
        return (self.ap1, self.ap2)[i]

    def distance(self, a: Point, b: Point) -> float:
        return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class CircuitPower:
    """Circuit (non-radiated) power draw, in mW."""

    d1_mw: float = 10.0
    d2_mw: float = 100.0
    ap1_mw: float = 200.0
    ap2_mw: float = 2000.0
    ris_element_mw: float = 5.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value >= 0:
                raise ConfigError(name, "circuit power must be >= 0")


@dataclass(frozen=True)
class SolverSettings:
    k_max: int = 100  # time-grid resolution, step 1/k_max
    t_max: int = 100  # outer iterations
    ero: float = 1e-4  # relative stop threshold on F(t) - F(t-1)
    inner_iters: int = 5000  # projected-ascent steps per smoothing stage
    smoothing: tuple[float, ...] = (20.0, 100.0, 500.0, 2500.0)
    inner_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "smoothing", tuple(float(s) for s in self.smoothing))
        if self.k_max < 2:
            raise ConfigError("k_max", "must be >= 2")
        if self.t_max < 1:
            raise ConfigError("t_max", "must be >= 1")
        if not self.ero > 0:
            raise ConfigError("ero", "must be > 0")
        if self.inner_iters < 1:
            raise ConfigError("inner_iters", "must be >= 1")
        if not self.smoothing or any(s <= 0 for s in self.smoothing):
            raise ConfigError("smoothing", "needs at least one positive stage")
        if any(b <= a for a, b in zip(self.smoothing, self.smoothing[1:])):
            raise ConfigError("smoothing", "stages must be strictly increasing")
        if not self.inner_tol > 0:
            raise ConfigError("inner_tol", "must be > 0")


@dataclass(frozen=True)
class SystemConfig:
    media: tuple[Medium, Medium] = (SUB6, MMWAVE)
    geometry: Geometry = field(default_factory=Geometry)
    M: int = 4
    N: int = 16
    d0: float = 1.0
    eta: float = 2.2
    rho_si: float = 0.5
    li_noise_ratio: float = 1.1
    noise_psd_dbm_hz: float = -174.0
    power_dbm: float = 23.0  # P = P_1 = (B1/B2) P_2
    ap_power_dbm: float = 23.0  # P_AP1 = (B1/B2) P_AP2
    rho_e: float = 0.0
    circuit: CircuitPower = field(default_factory=CircuitPower)
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if len(self.media) != 2 or [m.id for m in self.media] != [1, 2]:
            raise ConfigError("media", "expected exactly media 1 and 2, in order")
        if self.M < 1:
            raise ConfigError("M", "must be >= 1")
        if self.N < 1:
            raise ConfigError("N", "must be >= 1")
        if not self.d0 > 0:
            raise ConfigError("d0", "must be > 0")
        if not self.eta > 0:
            raise ConfigError("eta", "must be > 0")
        if not 0 <= self.rho_si <= 1:
            raise ConfigError("rho_si", "must lie in [0, 1]")
        if not self.li_noise_ratio >= 1:
            raise ConfigError("li_noise_ratio", "must be >= 1")
        if not self.rho_e >= 0:
            raise ConfigError("rho_e", "must be >= 0")
        for name in ("noise_psd_dbm_hz", "power_dbm", "ap_power_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
