"""Channel generation and receive filtering.

Channels are i.i.d. Rayleigh (CN(0,1) entries), optionally drawn per
subcarrier with a Gauss-Markov correlation chain across frequency.  A
receive filter u turns the matrix channel H into the effective vector
channel h_hat = H^H u seen by the scheduler and the rate formula.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import (
    generalized_rayleigh_max,
    sample_complex_gaussian_matrix,
    _fix_phase,
)


@dataclass(frozen=True)
class SystemParams:
    """Static system dimensioning and power budget.

    n_t/n_r: transmit/receive antennas; n_s: maximum users scheduled on one
    resource; P: total transmit power; sigma_sq: noise variance (linear).
    """

    n_t: int
    n_r: int = 1
    n_s: int = 2
    P: float = 1.0
    sigma_sq: float = 1.0

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1 or self.n_s < 1:
            raise ValueError("n_t, n_r, n_s must all be >= 1")
        if self.n_s > self.n_t:
            raise ValueError(f"n_s={self.n_s} must not exceed n_t={self.n_t}")
        if self.P <= 0 or self.sigma_sq <= 0:
            raise ValueError("P and sigma_sq must be positive")

    @property
    def snr(self):
        return self.P / self.sigma_sq

    def with_snr_db(self, snr_db):
        """Same dimensioning with P/sigma_sq set to the given SNR in dB."""
        return SystemParams(self.n_t, self.n_r, self.n_s, P=10.0 ** (snr_db / 10.0), sigma_sq=1.0)


@dataclass(frozen=True)
class UserChannel:
    """One user's channel: H is the (subcarrier-averaged) n_r x n_t matrix.

    For frequency-selective runs, `subcarriers` holds the F per-subcarrier
    matrices and H is their arithmetic mean (the quantity averaged feedback
    operates on); rho is the chain correlation used to draw them.
    """

    H: np.ndarray
    subcarriers: np.ndarray | None = None
    rho: float = 0.0

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 2:
            raise ValueError("H must be a 2-D matrix")
        if not np.all(np.isfinite(H)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "H", H)
        if self.subcarriers is not None:
            sub = np.asarray(self.subcarriers, dtype=complex)
            if sub.ndim != 3 or sub.shape[1:] != H.shape or sub.shape[0] < 1:
                raise ValueError("subcarriers must be a (F, n_r, n_t) stack matching H")
            object.__setattr__(self, "subcarriers", sub)

    @property
    def F(self):
        return 1 if self.subcarriers is None else self.subcarriers.shape[0]

    def per_subcarrier(self):
        """(F, n_r, n_t) view; a single frequency-flat draw yields F=1."""
        if self.subcarriers is None:
            return self.H[None, :, :]
        return self.subcarriers


@dataclass(frozen=True)
class EffectiveChannel:
    """Effective vector channel of one user after receive filtering.

    h_hat = H^H u in raw units; h = h_hat normalized; lambda_sq is the
    per-antenna-normalized receive SNR P ||h_hat||^2 / (n_t sigma_sq).
    """

    h_hat: np.ndarray
    lambda_sq: float
    h: np.ndarray
    degenerate: bool = False

    @property
    def gain_sq(self):
        return float(np.linalg.norm(self.h_hat) ** 2)


def draw_user_channel(params, F=1, rho=0.0, seed=None):
    """Draw one user's Rayleigh channel, optionally over F correlated subcarriers.

    Subcarriers follow H_{f+1} = rho * H_f + sqrt(1 - rho^2) * W_{f+1} with
    i.i.d. CN(0,1) innovations, so each subcarrier is marginally CN(0,1) and
    neighbors have correlation coefficient rho.
    """
    if F < 1:
        raise ValueError("F must be >= 1")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must be in [0, 1]")
    if F == 1:
        H = sample_complex_gaussian_matrix(params.n_r, params.n_t, seed.derive("f", 0))
        return UserChannel(H=H, rho=rho)
    mats = np.empty((F, params.n_r, params.n_t), dtype=complex)
    mats[0] = sample_complex_gaussian_matrix(params.n_r, params.n_t, seed.derive("f", 0))
    scale = np.sqrt(max(0.0, 1.0 - rho * rho))
    for f in range(1, F):
        w = sample_complex_gaussian_matrix(params.n_r, params.n_t, seed.derive("f", f))
        mats[f] = rho * mats[f - 1] + scale * w
    return UserChannel(H=mats.mean(axis=0), subcarriers=mats, rho=rho)


def effective_channel(H, u):
    """h_hat = H^H u, so that <u, H x> = <h_hat, x> for every x."""
    H = np.asarray(H, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if u.shape != (H.shape[0],):
        raise ValueError(f"filter dim {u.shape} does not match n_r={H.shape[0]}")
    return H.conj().T @ u


def effective_channel_state(h_hat, params):
    """Package a raw effective vector into an EffectiveChannel."""
    h_hat = np.asarray(h_hat, dtype=complex)
    gain = float(np.linalg.norm(h_hat))
    if gain == 0.0:
        e1 = np.zeros(h_hat.shape[0], dtype=complex)
        e1[0] = 1.0
        return EffectiveChannel(h_hat=h_hat, lambda_sq=0.0, h=e1, degenerate=True)
    lam_sq = params.P * gain * gain / (params.n_t * params.sigma_sq)
    return EffectiveChannel(h_hat=h_hat, lambda_sq=lam_sq, h=h_hat / gain)


def mrc_filter(H):
    """Unit-norm filter maximizing ||H^H u||: dominant left singular vector.

    A zero matrix is degenerate; e_1 is returned and the downstream
    EffectiveChannel carries the degenerate flag (its rate is 0).
    """
    H = np.asarray(H, dtype=complex)
    if H.shape[0] == 1:
        return np.ones(1, dtype=complex)
    if not np.any(H):
        u = np.zeros(H.shape[0], dtype=complex)
        u[0] = 1.0
        return u
    U, _, _ = np.linalg.svd(H)
    return _fix_phase(U[:, 0])


def mrc_effective_channel(uc, params):
    """MRC-filtered effective channel of the (averaged) user channel."""
    u = mrc_filter(uc.H)
    return effective_channel_state(effective_channel(uc.H, u), params)


def per_subcarrier_effective_channels(uc, params, u=None):
    """Effective channels of every subcarrier under one common filter.

    The filter defaults to the MRC filter of the averaged channel, matching
    how feedback is computed once per resource block.
    """
    if u is None:
        u = mrc_filter(uc.H)
    return [effective_channel_state(effective_channel(Hf, u), params) for Hf in uc.per_subcarrier()]


def sinr_optimal_filter_beams(H, own_beam, other_beams, n_active, params):
    """Best receive filter and its SINR for a given beam configuration.

    Maximizes u^H S u / u^H Q u with signal S = g g^H, g = H w_own, and
    interference-plus-noise Q = (sigma_sq * n_active / P) I + sum_l g_l g_l^H.
    """
    H = np.asarray(H, dtype=complex)
    g = H @ np.asarray(own_beam, dtype=complex)
    S = np.outer(g, g.conj())
    Q = (params.sigma_sq * n_active / params.P) * np.eye(H.shape[0], dtype=complex)
    for w in other_beams:
        gl = H @ np.asarray(w, dtype=complex)
        Q += np.outer(gl, gl.conj())
    sinr, u = generalized_rayleigh_max(S, Q)
    return u, sinr


def save_user_channel(uc, path):
    """Dump a channel in the codebook text format, subcarrier matrices
    stacked row-wise (size = F * n_r rows of dim = n_t entries)."""
    from .codebook import save_matrix_text

    mats = uc.per_subcarrier()
    save_matrix_text(mats.reshape(-1, mats.shape[2]), path)


def load_user_channel(path, n_r, rho=0.0):
    """Inverse of save_user_channel; n_r tells how to split stacked rows."""
    from .codebook import load_matrix_text

    flat = load_matrix_text(path)
    if flat.shape[0] % n_r != 0:
        raise ValueError(f"{path}: {flat.shape[0]} rows do not split into n_r={n_r} blocks")
    mats = flat.reshape(-1, n_r, flat.shape[1])
    if mats.shape[0] == 1:
        return UserChannel(H=mats[0], rho=rho)
    return UserChannel(H=mats.mean(axis=0), subcarriers=mats, rho=rho)


def sinr_optimal_filter(H, assignment, C, m, params):
    """SINR-optimal filter for user m under a beam assignment into codebook C."""
    pairs = assignment.pairs
    if m not in pairs:
        raise ValueError(f"user {m} is not scheduled")
    own = C[pairs[m]]
    others = [C[j] for user, j in sorted(pairs.items()) if user != m]
    return sinr_optimal_filter_beams(H, own, others, len(pairs), params)
