"""Large/small-scale fading and per-realization channel sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import Medium, SystemConfig, db_to_linear, dbm_to_watt


def derived_powers(config: SystemConfig) -> tuple[float, float, float, float]:
    """Return ``(P1, P2, sigma1_sq, sigma2_sq)`` in watts.

    Device powers keep the per-medium SNR equal: P1/sigma1^2 = P2/sigma2^2,
    with sigma_i^2 = B_i * N0.
    """
    b1, b2 = (m.bandwidth for m in config.media)
    n0 = dbm_to_watt(config.noise_psd_dbm_hz)
    p1 = dbm_to_watt(config.power_dbm)
    return p1, p1 * b2 / b1, b1 * n0, b2 * n0


def ap_powers(config: SystemConfig) -> tuple[float, float]:
    b1, b2 = (m.bandwidth for m in config.media)
    p1 = dbm_to_watt(config.ap_power_dbm)
    return p1, p1 * b2 / b1


def large_scale_gain_db(dist: float, medium: Medium, config: SystemConfig,
                        gain_db: float | None = None) -> float:
    """Log-distance pathloss gain in dB (negative for real links).

    ``gain_db`` overrides the medium's total antenna gain G_i.
    """
    if not dist >= config.d0:
        raise ValueError(f"distance {dist} m is below the reference distance d0={config.d0} m")
    g = medium.antenna_gain_db if gain_db is None else gain_db
    return (-20.0 * math.log10(4.0 * math.pi * config.d0 / medium.wavelength)
            - 10.0 * config.eta * math.log10(dist / config.d0) + g)


def small_scale_sample(medium: Medium, dist: float, rng: np.random.Generator, size=None):
    """Rician small-scale coefficient(s).

    LOS phase is N(0, 1) for medium 1 and the deterministic 2*pi*d/lambda for
    medium 2. The NLOS term is a real Exponential(1) draw.
    """
    shape = () if size is None else size
    if medium.id == 1:
        theta = rng.standard_normal(shape)
    else:
        theta = np.full(shape, 2.0 * math.pi * dist / medium.wavelength)
    beta = rng.exponential(1.0, shape)
    k = medium.rician_k
    if math.isinf(k):
        out = np.exp(1j * theta)
    else:
        out = math.sqrt(k / (k + 1.0)) * np.exp(1j * theta) + math.sqrt(1.0 / (k + 1.0)) * beta
    return complex(out) if size is None else out


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every channel plus the link budget it was drawn for.

    Index 0 is device/medium 1, index 1 is device/medium 2.
    """

    h_r: tuple[np.ndarray, np.ndarray]  # device -> RIS, (N,)
    H_0: tuple[np.ndarray, np.ndarray]  # RIS -> AP_i, (M, N)
    g_r: tuple[np.ndarray, np.ndarray]  # RIS -> device, (N,)
    g_ap: tuple[np.ndarray, np.ndarray]  # AP_i -> RIS, (N,); AP-based benchmark only
    h_loop: np.ndarray  # (2,) loop channel, small-scale only
    noise_up: np.ndarray  # (2,) sigma_0^2 at AP_i, W
    noise_down: np.ndarray  # (2,) LI-plus-noise sigma~_i^2 at D_i, W
    power: np.ndarray  # (2,) device transmit power, W
    ap_power: np.ndarray  # (2,) AP transmit power, W
    bandwidth: np.ndarray  # (2,) Hz
    rho_si: float
    hop_gain: dict  # linear large-scale gain per hop: {"dr": (2,), "ra": (2,)}

    @property
    def N(self) -> int:
        return self.h_r[0].shape[0]

    @property
    def M(self) -> int:
        return self.H_0[0].shape[0]


def _hop(medium, dist, config, rng, size):
    # G_i covers device, RIS and AP together, so each hop of a two-hop cascade
    # carries half of it (in dB).
    gain = db_to_linear(large_scale_gain_db(dist, medium, config, medium.antenna_gain_db / 2.0))
    return math.sqrt(gain) * small_scale_sample(medium, dist, rng, size), gain


def draw_channel_set(config: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    geo = config.geometry
    N, M = config.N, config.M
    p1, p2, s1, s2 = derived_powers(config)
    h_r, H_0, g_r, g_ap, loop = [], [], [], [], []
    dr_gain, ra_gain = [], []
    for i, medium in enumerate(config.media):
        d_dr = geo.distance(geo.device(i), geo.ris)
        d_ra = geo.distance(geo.ris, geo.ap(i))
        h, gdr = _hop(medium, d_dr, config, rng, (N,))
        H, gra = _hop(medium, d_ra, config, rng, (M, N))
        g, _ = _hop(medium, d_dr, config, rng, (N,))
        gap, _ = _hop(medium, d_ra, config, rng, (N,))
        h_r.append(h)
        H_0.append(H)
        g_r.append(g)
        g_ap.append(gap)
        loop.append(small_scale_sample(medium, config.d0, rng))
        dr_gain.append(gdr)
        ra_gain.append(gra)
    sigma = np.array([s1, s2])
    return ChannelSet(
        h_r=tuple(h_r), H_0=tuple(H_0), g_r=tuple(g_r), g_ap=tuple(g_ap),
        h_loop=np.array(loop),
        noise_up=sigma.copy(),
        noise_down=config.li_noise_ratio * sigma,
        power=np.array([p1, p2]),
        ap_power=np.array(ap_powers(config)),
        bandwidth=np.array([m.bandwidth for m in config.media]),
        rho_si=config.rho_si,
        hop_gain={"dr": np.array(dr_gain), "ra": np.array(ra_gain)},
    )


def apply_estimation_error(channels: ChannelSet, rho_e: float):
    """Fold channel-estimation error into the receiver noise.

    The optimizer keeps using the drawn channels as the estimates; the error
    term raises the uplink noise by rho_e^2 P_i alpha_U and the downlink
    LI-plus-noise by rho_e^2 (1 + rho_SI) P_i alpha_D, where alpha is the
    per-element cascade pathloss of that link.

    Returns ``(channels, (noise_up, noise_down))``.
    """
    if rho_e < 0:
        raise ValueError(f"rho_e must be >= 0, got {rho_e}")
    alpha_up = channels.hop_gain["dr"] * channels.hop_gain["ra"]
    alpha_down = channels.hop_gain["dr"] ** 2
    r2 = rho_e ** 2
    noise_up = channels.noise_up + r2 * channels.power * alpha_up
    noise_down = channels.noise_down + r2 * (1.0 + channels.rho_si) * channels.power * alpha_down
    out = replace(channels, noise_up=noise_up, noise_down=noise_down)
    return out, (noise_up, noise_down)
