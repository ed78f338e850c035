"""Cascade channels, MMSE receivers, SINR/capacity and the WMMSE surrogate.

Links are named ``"1U", "2U", "1D", "2D"``; this is also the order of every
capacity/rate vector in the package.

The downlink of device i is the RIS-as-transmitter link: D_i's own carrier
goes D_i -> RIS -> D_i. With ``ap=True`` the carrier comes from AP_i
instead (the AP-based benchmark).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet

LINKS = ("1U", "2U", "1D", "2D")
LN2 = math.log(2.0)


def _parse(link: str) -> tuple[int, str]:
    if link not in LINKS:
        raise ValueError(f"unknown link {link!r}; expected one of {LINKS}")
    return int(link[0]) - 1, link[1]


def uplink_matrix(ch: ChannelSet, i: int) -> np.ndarray:
    """sqrt(P_i) H_i0 diag(h_ir): maps phi to the (M,) uplink cascade."""
    return math.sqrt(ch.power[i]) * ch.H_0[i] * ch.h_r[i][None, :]


def downlink_vector(ch: ChannelSet, i: int, ap: bool = False) -> np.ndarray:
    """Row vector v with v @ phi equal to the scalar downlink cascade."""
    if ap:
        return math.sqrt(ch.ap_power[i]) * ch.g_ap[i] * ch.h_r[i]
    return math.sqrt(ch.power[i]) * ch.g_r[i] * ch.h_r[i]


def cascade(ch: ChannelSet, phi: np.ndarray, link: str, ap: bool = False):
    i, kind = _parse(link)
    phi = np.asarray(phi)
    if phi.shape != (ch.N,):
        raise ValueError(f"phase vector has shape {phi.shape}, expected ({ch.N},)")
    if kind == "U":
        return uplink_matrix(ch, i) @ phi
    return complex(downlink_vector(ch, i, ap) @ phi)


def mmse_receiver(h_bar, noise_var: float, si_power: float = 0.0):
    """MMSE receive filter for a single stream.

    (h h^H + (sigma^2 + si) I)^{-1} h collapses to h / (|h|^2 + si + sigma^2),
    which covers both the (M,) uplink vector and the scalar downlink.
    """
    if not noise_var > 0:
        raise ValueError("noise variance must be > 0")
    h_bar = np.asarray(h_bar)
    denom = float(np.vdot(h_bar, h_bar).real) + si_power + noise_var
    w = h_bar / denom
    return complex(w) if w.ndim == 0 else w


def beamformer_sinr(h_bar, w, noise_var: float) -> float:
    """SINR of an arbitrary uplink beamformer: |w^H h|^2 / (|w|^2 sigma^2)."""
    w = np.atleast_1d(w)
    h_bar = np.atleast_1d(h_bar)
    num = abs(np.vdot(w, h_bar)) ** 2
    den = float(np.vdot(w, w).real) * noise_var
    return num / den if den > 0 else 0.0


def _noise_down(ch: ChannelSet, i: int) -> float:
    return ch.noise_down[i]


def sinr(ch: ChannelSet, phi, link: str, ap: bool = False) -> float:
    i, kind = _parse(link)
    h = cascade(ch, phi, link, ap)
    if kind == "U":
        return float(np.vdot(h, h).real) / ch.noise_up[i]
    s = abs(h) ** 2
    return s / (ch.rho_si * s + _noise_down(ch, i))


def capacity(bandwidth: float, gamma) -> float:
    """Shannon capacity B log2(1 + gamma) in bit/s."""
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("SINR must be >= 0")
    return bandwidth * np.log1p(gamma) / LN2


def capacities(ch: ChannelSet, phi, ap: bool = False) -> np.ndarray:
    """[C1U, C2U, C1D, C2D] in bit/s."""
    return np.array([capacity(ch.bandwidth[int(l[0]) - 1], sinr(ch, phi, l, ap)) for l in LINKS])


@dataclass
class Beamformers:
    w_up: tuple[np.ndarray, np.ndarray]
    w_down: np.ndarray  # (2,) complex


@dataclass
class AuxWeights:
    mu_up: np.ndarray  # (2,)
    mu_down: np.ndarray  # (2,)

    def __post_init__(self):
        if np.any(self.mu_up <= 0) or np.any(self.mu_down <= 0):
            raise ValueError("auxiliary weights must be positive")


def beamformers(ch: ChannelSet, phi, ap: bool = False) -> Beamformers:
    w_up = tuple(mmse_receiver(cascade(ch, phi, f"{i + 1}U"), ch.noise_up[i]) for i in range(2))
    w_down = []
    for i in range(2):
        h = cascade(ch, phi, f"{i + 1}D", ap)
        w_down.append(mmse_receiver(h, _noise_down(ch, i), ch.rho_si * abs(h) ** 2))
    return Beamformers(w_up=w_up, w_down=np.array(w_down))


def _w_for(bf: Beamformers, link: str):
    i, kind = _parse(link)
    return bf.w_up[i] if kind == "U" else bf.w_down[i]


def mse(ch: ChannelSet, phi, w, link: str, ap: bool = False) -> float:
    """Decoding MSE of a given receive filter.

    Downlink adds the residual self-interference rho_SI |w|^2 |h_bar|^2.
    """
    i, kind = _parse(link)
    h = cascade(ch, phi, link, ap)
    if kind == "U":
        w = np.asarray(w)
        err = np.vdot(w, h) - 1.0
        return float(abs(err) ** 2 + np.vdot(w, w).real * ch.noise_up[i])
    w = complex(w)
    err = w.conjugate() * h - 1.0
    w2 = abs(w) ** 2
    return float(abs(err) ** 2 + w2 * _noise_down(ch, i) + ch.rho_si * w2 * abs(h) ** 2)


def mse_deficit(ch: ChannelSet, phi, w, link: str, ap: bool = False) -> float:
    """1 - mse(...), expanded so no term is subtracted from 1.

    Keeps full relative precision when the SINR is tiny and the MSE sits
    within rounding of 1.
    """
    i, kind = _parse(link)
    h = cascade(ch, phi, link, ap)
    if kind == "U":
        w = np.asarray(w)
        a = np.vdot(w, h)
        return float(2.0 * a.real - abs(a) ** 2 - np.vdot(w, w).real * ch.noise_up[i])
    w = complex(w)
    a = w.conjugate() * h
    w2 = abs(w) ** 2
    return float(2.0 * a.real - abs(a) ** 2 - w2 * _noise_down(ch, i) - ch.rho_si * w2 * abs(h) ** 2)


def optimal_weight(e: float) -> float:
    if not e > 0:
        raise ValueError(f"MSE must be > 0, got {e}")
    return 1.0 / e


def aux_weights(ch: ChannelSet, phi, bf: Beamformers, ap: bool = False) -> AuxWeights:
    mu = [optimal_weight(mse(ch, phi, _w_for(bf, l), l, ap)) for l in LINKS]
    return AuxWeights(mu_up=np.array(mu[:2]), mu_down=np.array(mu[2:]))


def surrogate_rate(bandwidth: float, mu: float, e: float, deficit: float | None = None) -> float:
    """B (log2 mu - (mu e - 1)/ln 2); equals the capacity at mu = 1/e_MMSE.

    ``deficit`` = 1 - e (see ``mse_deficit``) switches to the rearranged form
    B (log1p(mu - 1) - (mu - 1) + mu (1 - e)) / ln 2, which stays accurate
    for e near 1. Rounding in mu costs nothing there since the expression is
    stationary in mu at its optimum.
    """
    if not (mu > 0 and e > 0):
        raise ValueError("mu and e must be > 0")
    if deficit is None:
        return bandwidth * (math.log2(mu) - (mu * e - 1.0) / LN2)
    m = mu - 1.0
    return bandwidth * (math.log1p(m) - m + mu * deficit) / LN2


@dataclass
class QuadForm:
    """f(phi) = 2 Re{A phi} - phi^H B phi + C.

    ``factor`` (R, N), when set, satisfies B = factor^H factor; solvers use it
    in place of an eigendecomposition.
    """

    A: np.ndarray
    B: np.ndarray
    C: float
    label: str = ""
    factor: np.ndarray | None = None

    def value(self, phi) -> np.ndarray | float:
        phi = np.asarray(phi)
        lin = phi @ self.A
        quad = np.einsum("...i,ij,...j->...", phi.conj(), self.B, phi).real
        out = 2.0 * lin.real - quad + self.C
        return float(out) if out.ndim == 0 else out

    def gradient(self, phi) -> np.ndarray:
        """Derivative with respect to conj(phi): A^H - B phi."""
        return self.A.conj() - self.B @ np.asarray(phi)

    def scaled(self, s: float) -> "QuadForm":
        fac = None if self.factor is None else math.sqrt(s) * self.factor
        return QuadForm(s * self.A, s * self.B, s * self.C, self.label, fac)


def _slot_weights(slots) -> np.ndarray:
    if hasattr(slots, "T1"):
        return np.array([slots.T2, slots.T1, slots.T1, slots.T2], dtype=float)
    w = np.asarray(slots, dtype=float)
    if w.shape != (4,):
        raise ValueError("slot weights must be an Allocation or four per-link weights")
    return w


def quad_forms(ch: ChannelSet, bf: Beamformers, weights: AuxWeights, slots,
               ap: bool = False) -> list[QuadForm]:
    """Surrogate throughput terms [f1U, f2U, f1D, f2D] as quadratics in phi.

    Each term is slot * B_i * (log2 mu - (mu e(phi) - 1)/ln 2) with the
    receive filter and mu held fixed. ``slots`` is an Allocation (uplink of
    device 1 and downlink of device 2 weighted by T2, the rest by T1) or an
    explicit length-4 weight vector.
    """
    sw = _slot_weights(slots)
    forms = []
    for k, link in enumerate(LINKS):
        i, kind = _parse(link)
        mu = weights.mu_up[i] if kind == "U" else weights.mu_down[i]
        if kind == "U":
            w = bf.w_up[i]
            a = w.conj() @ uplink_matrix(ch, i)  # w^H Q
            b_scale = 1.0
            n0 = float(np.vdot(w, w).real) * ch.noise_up[i]
        else:
            w = bf.w_down[i]
            a = w.conjugate() * downlink_vector(ch, i, ap)
            b_scale = 1.0 + ch.rho_si  # residual SI term rides on |h_bar|^2
            n0 = abs(w) ** 2 * _noise_down(ch, i)
        coef = sw[k] * ch.bandwidth[i] / LN2
        factor = math.sqrt(coef * mu * b_scale) * a[None, :]
        B = coef * mu * b_scale * np.outer(a.conj(), a)
        forms.append(QuadForm(
            A=coef * mu * a,
            B=0.5 * (B + B.conj().T),  # exactly Hermitian
            # log mu + 1 - mu (1 + n0), arranged to stay accurate as mu -> 1
            C=float(coef * ((math.log1p(mu - 1.0) - (mu - 1.0)) - mu * n0)),
            label=f"f{link}",
            factor=factor,
        ))
    return forms
