"""Capacity and interference-power metrics.

All radar-side interference metrics share the weighted form
sum_l Tr(W_l G2 R_xl G2^H) with a nonnegative diagonal W_l:

  TIP      W_l = I             total power at the radar RX antennas
  EIP_I    W_l = Delta_l       only entries sampled by a Scheme I radar
  IP_FMFB  W_l = a_l * I       full matched filter bank output power
  EIP_II   W_l = Delta_l_xi    random matched filter bank (Scheme II)

A Monte-Carlo oracle evaluates the same expectations directly from the
signal model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .linalg import crandn, hermitize, min_eig, psd_sqrt
from .scenario import SamplingMask

PSD_TOL = 1e-9

METHOD_TIP = "TIP"
METHOD_EIP_I = "EIP_I"
METHOD_IP_FMFB = "IP_FMFB"
METHOD_EIP_II = "EIP_II"


class MetricError(ValueError):
    pass


@dataclass
class CovarianceSchedule:
    """The L per-symbol Hermitian PSD transmit covariance matrices."""

    matrices: list

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]

    @property
    def total_power(self) -> float:
        return float(sum(np.trace(R).real for R in self.matrices))

    def validate(self, tol: float = PSD_TOL):
        for R in self.matrices:
            if np.linalg.norm(R - R.conj().T) > 1e-10 * max(1.0, np.linalg.norm(R)):
                raise MetricError("covariance matrix is not Hermitian")
            if min_eig(R) < -tol * max(1.0, float(np.trace(R).real)):
                raise MetricError("covariance matrix is not PSD")

    def sqrts(self) -> list:
        return [psd_sqrt(R) for R in self.matrices]


@dataclass
class WeightSchedule:
    """Per-symbol nonnegative diagonal interference weights."""

    diagonals: np.ndarray  # L x M_rR, real nonnegative
    method: str

    def __len__(self):
        return self.diagonals.shape[0]


@dataclass
class NoiseCovSchedule:
    """Per-symbol comm receiver noise-plus-interference covariances R_wl."""

    matrices: list

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]


def noise_covariances(cfg: ScenarioConfig, G1: np.ndarray, S: np.ndarray) -> NoiseCovSchedule:
    """R_wl = rho^2 sigma_alpha^2 G1 s(l) s^H(l) G1^H + sigma_C^2 I."""
    scale = cfg.rho2 * cfg.sigma_alpha2
    eye = cfg.sigma_C2 * np.eye(cfg.M_rC)
    mats = []
    for l in range(S.shape[1]):
        v = G1 @ S[:, l]
        mats.append(hermitize(scale * np.outer(v, v.conj()) + eye))
    return NoiseCovSchedule(matrices=mats)


def average_capacity(
    schedule: CovarianceSchedule, H: np.ndarray, noise: NoiseCovSchedule
) -> float:
    """(1/L) sum_l log2 |I + R_wl^{-1} H R_xl H^H| in bits/symbol."""
    L = len(schedule)
    if len(noise) != L:
        raise MetricError("schedule and noise lengths differ")
    total = 0.0
    for R_x, R_w in zip(schedule, noise):
        if min_eig(R_w) <= 0.0:
            raise MetricError("noise covariance is not positive definite")
        sign_n, logdet_n = np.linalg.slogdet(R_w)
        sign_f, logdet_f = np.linalg.slogdet(R_w + H @ R_x @ H.conj().T)
        if sign_n.real <= 0 or sign_f.real <= 0:
            raise MetricError("capacity determinant is not positive")
        total += (logdet_f - logdet_n) / math.log(2.0)
    return total / L


def _interference_diag(G2: np.ndarray, R_x: np.ndarray) -> np.ndarray:
    """Diagonal of G2 R_xl G2^H (real, nonnegative up to roundoff)."""
    return np.einsum("ij,jk,ik->i", G2, R_x, G2.conj()).real


def interference_diag_matrix(G2: np.ndarray, schedule: CovarianceSchedule) -> np.ndarray:
    """Q with column l holding the diagonal of G2 R_xl G2^H (M_rR x L)."""
    return np.stack([_interference_diag(G2, R) for R in schedule], axis=1)


def weighted_eip(weights: WeightSchedule, G2: np.ndarray, schedule: CovarianceSchedule) -> float:
    """Generic weighted interference power sum_l Tr(W_l G2 R_xl G2^H)."""
    Q = interference_diag_matrix(G2, schedule)  # M_rR x L
    return max(float(np.sum(weights.diagonals * Q.T)), 0.0)


def tip(schedule: CovarianceSchedule, G2: np.ndarray) -> float:
    """Total interference power sum_l Tr(G2 R_xl G2^H)."""
    return float(sum(_interference_diag(G2, R).sum() for R in schedule))


def eip_scheme1(mask: SamplingMask, G2: np.ndarray, schedule: CovarianceSchedule) -> float:
    """Scheme I effective interference power, weights Delta_l = diag(Omega_col_l)."""
    if mask.omega.shape != (G2.shape[0], len(schedule)):
        raise MetricError("mask is not Scheme-I shaped for this instance")
    Q = interference_diag_matrix(G2, schedule)
    return float(np.sum(mask.omega * Q))


def matched_filter_weights(S: np.ndarray, mask: SamplingMask):
    """Scheme II weights: a_{l,xi_m} = sum_{i in xi_m} |s_i(l)|^2.

    Returns (delta_lxi, a) with delta_lxi of shape L x M_rR (row l is the
    diagonal of Delta_l_xi) and a the length-L column energies a_l.
    """
    if mask.omega.shape[1] != S.shape[0]:
        raise MetricError("mask is not Scheme-II shaped for this waveform matrix")
    s_abs2 = np.abs(S) ** 2                 # M_tR x L
    delta_lxi = (mask.omega @ s_abs2).T     # L x M_rR
    return delta_lxi, s_abs2.sum(axis=0)


def eip_scheme2(
    mask: SamplingMask, S: np.ndarray, G2: np.ndarray, schedule: CovarianceSchedule
) -> float:
    """Scheme II effective interference power sum_l Tr(Delta_l_xi G2 R_xl G2^H)."""
    delta_lxi, _ = matched_filter_weights(S, mask)
    if mask.omega.shape[0] != G2.shape[0] or len(schedule) != S.shape[1]:
        raise MetricError("shape mismatch in Scheme-II metric")
    Q = interference_diag_matrix(G2, schedule)
    return float(np.sum(delta_lxi * Q.T))


def eip_scheme2_trace_form(
    mask: SamplingMask, S: np.ndarray, G2: np.ndarray, schedule: CovarianceSchedule
) -> float:
    """Equivalent trace form Tr(Omega^T Q (S o conj(S))^T)."""
    if mask.omega.shape != (G2.shape[0], S.shape[0]):
        raise MetricError("mask is not Scheme-II shaped")
    Q = interference_diag_matrix(G2, schedule)
    s_abs2 = np.abs(S) ** 2
    return float(np.trace(mask.omega.T @ Q @ s_abs2.T).real)


def ip_fmfb(S: np.ndarray, G2: np.ndarray, schedule: CovarianceSchedule) -> float:
    """Interference power at the full matched filter bank, sum_l a_l Tr(G2 R_xl G2^H)."""
    a = np.sum(np.abs(S) ** 2, axis=0)
    Q = interference_diag_matrix(G2, schedule)
    return float(np.sum(a * Q.sum(axis=0)))


def weight_schedule(
    method: str,
    n_rx: int,
    L: int,
    mask: SamplingMask | None = None,
    S: np.ndarray | None = None,
) -> WeightSchedule:
    """Build the diagonal weights unifying the four interference metrics."""
    if method == METHOD_TIP:
        diags = np.ones((L, n_rx))
    elif method == METHOD_EIP_I:
        if mask is None:
            raise MetricError("EIP_I weights require a Scheme-I mask")
        if mask.omega.shape != (n_rx, L):
            raise MetricError("mask is not Scheme-I shaped")
        diags = mask.omega.T.copy()
    elif method == METHOD_IP_FMFB:
        if S is None:
            raise MetricError("IP_FMFB weights require the waveform matrix")
        a = np.sum(np.abs(S) ** 2, axis=0)
        diags = np.repeat(a[:, None], n_rx, axis=1)
    elif method == METHOD_EIP_II:
        if mask is None or S is None:
            raise MetricError("EIP_II weights require a Scheme-II mask and waveforms")
        delta_lxi, _ = matched_filter_weights(S, mask)
        diags = delta_lxi
    else:
        raise MetricError(f"unknown weight method {method!r}")
    return WeightSchedule(diagonals=diags, method=method)


def mismatched_weight_diagonals(
    weights: WeightSchedule, radar_rate: float, comm_rate: float, L_comm: int
) -> np.ndarray:
    """Map per-radar-symbol weights onto comm symbols for mismatched rates.

    Radar slower: the radar samples one comm symbol per radar symbol
    (aligned to comm-symbol boundaries); the unsampled comm symbols get
    zero weight. Radar faster: each comm symbol accumulates the weights of
    the floor(f_R/f_C) radar symbols it spans. Rates must be integer
    multiples of one another.
    """
    n_rx = weights.diagonals.shape[1]
    L_radar = weights.diagonals.shape[0]
    if radar_rate == comm_rate:
        if L_comm != L_radar:
            raise MetricError("equal rates require equal symbol counts")
        return weights.diagonals.copy()
    if radar_rate < comm_rate:
        ratio = comm_rate / radar_rate
        k = int(round(ratio))
        if abs(ratio - k) > 1e-9:
            raise MetricError("comm rate must be an integer multiple of radar rate")
        if L_comm < (L_radar - 1) * k + 1:
            raise MetricError("schedule too short for the radar symbol count")
        out = np.zeros((L_comm, n_rx))
        for lr in range(L_radar):
            out[lr * k] = weights.diagonals[lr]
        return out
    ratio = radar_rate / comm_rate
    k = int(round(ratio))
    if abs(ratio - k) > 1e-9:
        raise MetricError("radar rate must be an integer multiple of comm rate")
    if L_radar != k * L_comm:
        raise MetricError("radar symbol count must equal k * comm symbol count")
    return weights.diagonals.reshape(L_comm, k, n_rx).sum(axis=1)


def eip_mismatched(
    cfg: ScenarioConfig,
    mask: SamplingMask,
    G2: np.ndarray,
    S: np.ndarray,
    schedule: CovarianceSchedule,
) -> float:
    """Effective interference power when radar and comm symbol rates differ.

    The scheme's per-radar-symbol weights are remapped onto the comm symbol
    grid by mismatched_weight_diagonals before the weighted sum.
    """
    from .config import Scheme

    if cfg.scheme is Scheme.SCHEME_I:
        weights = weight_schedule(
            METHOD_EIP_I, G2.shape[0], mask.omega.shape[1], mask=mask
        )
    else:
        weights = weight_schedule(
            METHOD_EIP_II, G2.shape[0], S.shape[1], mask=mask, S=S
        )
    diags = mismatched_weight_diagonals(
        weights, cfg.radar_rate, cfg.comm_rate, len(schedule)
    )
    Q = interference_diag_matrix(G2, schedule)
    return float(np.sum(diags * Q.T))


def empirical_eip(
    cfg: ScenarioConfig,
    mask: SamplingMask,
    G2: np.ndarray,
    S: np.ndarray,
    schedule: CovarianceSchedule,
    trials: int,
    rng: np.random.Generator,
):
    """Monte-Carlo estimate of the masked interference power.

    Draws x(l) ~ CN(0, R_xl) and fresh phase offsets each trial and
    evaluates the masked power directly from the signal model. Returns
    (mean, standard error).
    """
    if trials < 1:
        raise MetricError("trials must be >= 1")
    from .config import Scheme  # local to avoid cycle at import time

    roots = schedule.sqrts()
    L = len(schedule)
    n_tx = roots[0].shape[0]
    samples = np.empty(trials)
    sd_alpha = np.sqrt(cfg.sigma_alpha2)
    for t in range(trials):
        X = np.stack([roots[l] @ crandn(rng, n_tx) for l in range(L)], axis=1)
        lam2 = np.exp(1j * sd_alpha * rng.standard_normal(L))
        interf = (G2 @ X) * lam2
        if cfg.scheme is Scheme.SCHEME_I:
            masked = mask.omega * interf
        else:
            masked = mask.omega * (interf @ S.conj().T)
        samples[t] = np.sum(np.abs(masked) ** 2)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr
