"""CDI/CQI selection strategies for limited feedback.

A user reports a direction index into the feedback codebook V (CDI) and a
nonnegative scalar gain (CQI).  Strategies differ in the metric they
minimize:

* ``chordal``       -- classical direction quantization, max |<h, nu>|^2.
* ``ra-full``       -- min-max rate mismatch over every scheduling
                       configuration the base station could pick (the rate
                       approximation rule), jointly over nu and the gain.
* ``ra-efficient``  -- low-complexity surrogate max_w ||<h,w>|^2 - |<nu,w>|^2|
                       using a precomputable |<nu, w>|^2 table.
* ``lemma1``        -- constructive strategy: quantize toward h subject to
                       not under-shooting the best transmit beam, with a
                       closed-form gain.

CQI convention: the reported gain theta lives on the normalized
receive-SNR scale (theta^2 = lambda^2 |<h, nu>|^2 when nu == h gives
theta = lambda).  When a feedback vector enters the raw rate formula it is
rescaled by sqrt(n_t sigma^2 / P), which makes exact feedback reproduce
the true rates exactly.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import (
    mrc_effective_channel,
    per_subcarrier_effective_channels,
    sinr_optimal_filter_beams,
)

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_TT_LO = 1e-12
_TT_HI = 1.0 - 1e-12
GOLDEN_ITERS = 40

_CONFIG_CACHE = {}


@dataclass(frozen=True)
class FeedbackMessage:
    cdi_index: int
    cqi: float
    strategy_tag: str
    scalar_product_count: int
    gap: float | None = None


@dataclass(frozen=True)
class GapProfile:
    """Worst-case rate mismatch and the configuration attaining it."""

    value: float
    n_scheduled: int
    own_beam: int
    interferers: tuple


def scheduling_configs(n_beams, sizes):
    """Enumerate (|S|, own beam, interferer beam set) configurations.

    The rate of a user depends on the scheduling decision only through the
    number of active users, its own beam, and the set of distinct
    interfering beams, so the worst case over explicit user sets and
    injective mappings reduces to this table.
    """
    key = (n_beams, tuple(sizes))
    if key in _CONFIG_CACHE:
        return _CONFIG_CACHE[key]
    own, masks, ks, intf = [], [], [], []
    for k in sizes:
        if k < 1 or k > n_beams:
            raise ValueError(f"cannot schedule {k} users on {n_beams} beams")
        for j in range(n_beams):
            others = [i for i in range(n_beams) if i != j]
            for T in combinations(others, k - 1):
                own.append(j)
                ks.append(k)
                intf.append(T)
                row = np.zeros(n_beams)
                row[list(T)] = 1.0
                masks.append(row)
    table = (
        np.array(own, dtype=int),
        np.array(masks),
        np.array(ks, dtype=float),
        tuple(intf),
    )
    _CONFIG_CACHE[key] = table
    return table


def beam_powers(v, C):
    """|<v, w>|^2 against every codeword of C."""
    return np.abs(C.vectors @ np.conj(np.asarray(v, dtype=complex))) ** 2


def cross_gram(V, C):
    """|<nu, w>|^2 table, shape (|V|, |C|).  Computed once and reused."""
    return np.abs(V.vectors.conj() @ C.vectors.T) ** 2


def _config_rates(powers, own, mask, ks, params):
    """Rates (nats) of every configuration for raw power vectors `powers`."""
    noise = params.sigma_sq * ks / params.P
    intf = powers @ mask.T
    sig = powers[..., own]
    return np.log1p(sig / (noise + intf))


def raw_scale_sq(params):
    """Conversion from CQI^2 (lambda units) to raw effective-channel power."""
    return params.n_t * params.sigma_sq / params.P


def feedback_vector(msg, V, params):
    """Raw-scale vector the scheduler treats like an effective channel."""
    return msg.cqi * np.sqrt(raw_scale_sq(params)) * V[msg.cdi_index]


def cqi_effective(lambda_sq, h, nu):
    """Effective channel gain over the quantized direction: theta^2 = lambda^2 |<h, nu>|^2."""
    return float(np.sqrt(lambda_sq * np.abs(np.vdot(h, nu)) ** 2))


def chordal_cdi(eff, V):
    """Classical feedback: direction closest to h in chordal distance."""
    if len(V) == 0:
        raise ValueError("empty feedback codebook")
    align = np.abs(V.vectors @ np.conj(eff.h)) ** 2
    idx = int(np.argmax(align))
    theta = cqi_effective(eff.lambda_sq, eff.h, V[idx])
    return FeedbackMessage(idx, theta, "chordal", scalar_product_count=len(V))


def _sizes(params, sizes):
    return tuple(range(1, params.n_s + 1)) if sizes is None else tuple(sizes)


def ra_distance(eff, theta, nu, C, params, sizes=None):
    """Worst-case |true rate - approximated rate| over scheduling configurations.

    theta is on the CQI scale; the approximated rate plugs
    theta * sqrt(n_t sigma^2 / P) * nu into the rate formula.  The max runs
    over user-set sizes in `sizes` (default 1..n_s), every own beam, and
    every set of distinct interfering beams.
    """
    own, mask, ks, intf = scheduling_configs(len(C), _sizes(params, sizes))
    p_true = beam_powers(eff.h_hat, C)
    r_true = _config_rates(p_true, own, mask, ks, params)
    q = (theta * theta * raw_scale_sq(params)) * beam_powers(nu, C)
    r_hat = _config_rates(q, own, mask, ks, params)
    gaps = np.abs(r_true - r_hat)
    i = int(np.argmax(gaps))
    return GapProfile(
        value=float(gaps[i]),
        n_scheduled=int(ks[i]),
        own_beam=int(own[i]),
        interferers=intf[i],
    )


def evaluate_gap_config(eff, theta, nu, C, params, profile):
    """Re-evaluate one configuration's rate mismatch (GapProfile check)."""
    noise = params.sigma_sq * profile.n_scheduled / params.P
    p_true = beam_powers(eff.h_hat, C)
    q = (theta * theta * raw_scale_sq(params)) * beam_powers(nu, C)
    T = list(profile.interferers)
    rt = np.log1p(p_true[profile.own_beam] / (noise + p_true[T].sum()))
    rh = np.log1p(q[profile.own_beam] / (noise + q[T].sum()))
    return float(abs(rt - rh))


def _golden_min_vec(fun, n, iters=GOLDEN_ITERS):
    """Vectorized golden-section minimization of n quasiconvex 1-D problems."""
    a = np.full(n, _TT_LO)
    b = np.full(n, _TT_HI)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = fun(c)
    fd = fun(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        x = np.where(left, c, d)
        fx = fun(x)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
    mid = 0.5 * (a + b)
    fmid = fun(mid)
    better_c = fc < fmid
    mid = np.where(better_c, c, mid)
    fmid = np.where(better_c, fc, fmid)
    better_d = fd < fmid
    return np.where(better_d, d, mid), np.where(better_d, fd, fmid)


def _tt_from_theta_sq(theta_sq):
    return theta_sq / (1.0 + theta_sq)


def _theta_from_tt(tt):
    tt = min(max(float(tt), 0.0), _TT_HI)
    return float(np.sqrt(tt / (1.0 - tt)))


def ra_feedback(eff, C, V, params, subcarrier_effs=None, phi_table=None, sizes=None):
    """Full rate-approximation feedback: argmin over (theta, nu) of the
    worst-case rate mismatch.

    For each codeword the inner gain search evaluates the effective-gain
    CQI, the constructive closed form, and a golden-section refinement of
    the (quasiconvex) gap over the transformed gain theta^2/(1+theta^2);
    the best pair wins, ties to the lowest index.

    With `subcarrier_effs` the true-rate side is the per-subcarrier average
    (frequency-averaged feedback); the reported direction/gain still refer
    to the averaged channel in `eff`.
    """
    if len(V) == 0:
        raise ValueError("empty feedback codebook")
    own, mask, ks, _ = scheduling_configs(len(C), _sizes(params, sizes))
    if subcarrier_effs:
        r_true = np.mean(
            [_config_rates(beam_powers(e.h_hat, C), own, mask, ks, params) for e in subcarrier_effs],
            axis=0,
        )
    else:
        r_true = _config_rates(beam_powers(eff.h_hat, C), own, mask, ks, params)
    phi = cross_gram(V, C) if phi_table is None else phi_table
    scale2 = raw_scale_sq(params)
    n_v = len(V)

    def gaps_at(tt):
        t = scale2 * tt / (1.0 - tt)
        r_hat = _config_rates(t[:, None] * phi, own, mask, ks, params)
        return np.max(np.abs(r_hat - r_true), axis=-1)

    tt_best, gap_best = _golden_min_vec(gaps_at, n_v)
    align = np.abs(V.vectors @ np.conj(eff.h)) ** 2
    lam_t = _tt_from_theta_sq(eff.lambda_sq)
    psi = beam_powers(eff.h, C)
    w_star = int(np.argmax(psi))
    eta = float(psi[w_star])
    for cand in (
        np.clip(_tt_from_theta_sq(eff.lambda_sq * align), _TT_LO, _TT_HI),
        np.clip(
            np.divide(lam_t * eta, phi[:, w_star], out=np.full(n_v, _TT_HI), where=phi[:, w_star] > 0),
            _TT_LO,
            _TT_HI,
        ),
    ):
        g = gaps_at(cand)
        better = g < gap_best
        tt_best = np.where(better, cand, tt_best)
        gap_best = np.where(better, g, gap_best)

    idx = int(np.argmin(gap_best))
    theta = _theta_from_tt(tt_best[idx])
    count = len(C) * len(V) + len(C)
    return FeedbackMessage(idx, theta, "ra-full", count, gap=float(gap_best[idx]))


def _true_rates_multiantenna(uc, C, params, sizes):
    """Per-configuration rates with the SINR-optimal receive filter."""
    own, mask, ks, intf = scheduling_configs(len(C), _sizes(params, sizes))
    r_true = np.empty(len(own))
    for c in range(len(own)):
        others = [C[j] for j in intf[c]]
        _, sinr = sinr_optimal_filter_beams(uc.H, C[own[c]], others, int(ks[c]), params)
        r_true[c] = np.log1p(sinr)
    return r_true


def ra_distance_multiantenna(uc, theta, nu, C, params, sizes=None):
    """Worst-case mismatch between filter-optimized true rates and the
    rates predicted from (theta, nu)."""
    own, mask, ks, intf = scheduling_configs(len(C), _sizes(params, sizes))
    r_true = _true_rates_multiantenna(uc, C, params, sizes)
    q = (theta * theta * raw_scale_sq(params)) * beam_powers(nu, C)
    gaps = np.abs(_config_rates(q, own, mask, ks, params) - r_true)
    i = int(np.argmax(gaps))
    return GapProfile(float(gaps[i]), int(ks[i]), int(own[i]), intf[i])


def ra_feedback_multiantenna(uc, C, V, params, phi_table=None, sizes=None):
    """Rate-approximation feedback with the receive filter optimized per
    scheduling configuration (n_r > 1 extension).

    The true-rate side of every configuration uses the SINR-maximizing
    filter for that beam layout; the reported direction/gain then minimize
    the worst-case mismatch exactly as in `ra_feedback`.
    """
    own, mask, ks, intf = scheduling_configs(len(C), _sizes(params, sizes))
    r_true = _true_rates_multiantenna(uc, C, params, sizes)
    eff = mrc_effective_channel(uc, params)
    phi = cross_gram(V, C) if phi_table is None else phi_table
    scale2 = raw_scale_sq(params)
    n_v = len(V)

    def gaps_at(tt):
        t = scale2 * tt / (1.0 - tt)
        r_hat = _config_rates(t[:, None] * phi, own, mask, ks, params)
        return np.max(np.abs(r_hat - r_true), axis=-1)

    tt_best, gap_best = _golden_min_vec(gaps_at, n_v)
    align = np.abs(V.vectors @ np.conj(eff.h)) ** 2
    cand = np.clip(_tt_from_theta_sq(eff.lambda_sq * align), _TT_LO, _TT_HI)
    g = gaps_at(cand)
    better = g < gap_best
    tt_best = np.where(better, cand, tt_best)
    gap_best = np.where(better, g, gap_best)
    idx = int(np.argmin(gap_best))
    count = len(C) * len(V) + len(C) * len(own)
    return FeedbackMessage(idx, _theta_from_tt(tt_best[idx]), "ra-full", count, gap=float(gap_best[idx]))


def efficient_cdi(eff, C, V, phi_table=None):
    """Low-complexity rate-approximation surrogate.

    Picks argmin over nu of max_w ||<h, w>|^2 - |<nu, w>|^2| using the
    stored |<nu, w>|^2 table; only the |C| products |<h, w>|^2 are computed
    online.  The instrumented count follows the protocol budget |C| * |V|
    (|C| fresh products plus |C| * (|V| - 1) stored-table differences).
    """
    if len(V) == 0 or len(C) == 0:
        raise ValueError("empty codebook")
    psi = beam_powers(eff.h, C)
    phi = cross_gram(V, C) if phi_table is None else phi_table
    d = np.max(np.abs(psi[None, :] - phi), axis=1)
    idx = int(np.argmin(d))
    theta = cqi_effective(eff.lambda_sq, eff.h, V[idx])
    return FeedbackMessage(idx, theta, "ra-efficient", scalar_product_count=len(C) * len(V), gap=float(d[idx]))


def _require_subset(C, V, tol=1e-12):
    diffs = np.abs(V.vectors[None, :, :] - C.vectors[:, None, :]).max(axis=2)
    if not np.all(diffs.min(axis=1) <= tol):
        raise ValueError("transmit codebook is not contained in the feedback codebook")


def lemma1_feedback(eff, C, V):
    """Constructive feedback strategy behind the worst-case gap bound.

    (a) find the transmit beam w* best aligned with h; (b) among codewords
    at least as aligned with w* as h is (nonempty because C is contained in
    V), pick the chordal-closest to h; (c) set the gain by the closed form
    theta_tilde = lambda_tilde * eta / theta_w*.
    """
    _require_subset(C, V)
    psi = beam_powers(eff.h, C)
    w_star = int(np.argmax(psi))
    eta = float(psi[w_star])
    theta_w = np.abs(V.vectors @ np.conj(C[w_star])) ** 2
    feasible = theta_w >= eta - 1e-12
    align = np.abs(V.vectors @ np.conj(eff.h)) ** 2
    score = np.where(feasible, align, -1.0)
    idx = int(np.argmax(score))
    lam_t = _tt_from_theta_sq(eff.lambda_sq)
    th = float(theta_w[idx])
    tt = lam_t * eta / th if th > 0 else 0.0
    theta = _theta_from_tt(tt)
    count = len(C) + 2 * len(V)
    return FeedbackMessage(idx, theta, "lemma1", scalar_product_count=count)


def lemma1_rhs(eff, nu, C):
    """Closed-form upper bound on the constructive strategy's gap.

    max over w != w* of
      log(1 + lam^2 (| psi_w - phi_w | + (phi_w/theta) |theta - eta|)
                 / (1 + lam^2 (1 - max(psi_w, phi_w))))
    with psi/phi the squared alignments of h and nu against the transmit
    beams, w* the best beam for h, eta = psi_{w*}, theta = phi_{w*}.
    """
    if len(C) < 2:
        raise ValueError("need at least two transmit beams")
    lam_sq = eff.lambda_sq
    psi = beam_powers(eff.h, C)
    phi = beam_powers(nu, C)
    w_star = int(np.argmax(psi))
    eta = psi[w_star]
    theta = phi[w_star]
    if theta <= 0:
        return float("inf")
    best = 0.0
    for w in range(len(C)):
        if w == w_star:
            continue
        num = lam_sq * (abs(psi[w] - phi[w]) + (phi[w] / theta) * abs(theta - eta))
        den = 1.0 + lam_sq * (1.0 - max(psi[w], phi[w]))
        best = max(best, float(np.log1p(num / den)))
    return best


def gap_sample_delta_ra(effs, msgs, C, V, params, users, sizes=None):
    """One draw's contribution to the worst-case rate-gap estimate:
    2 * sum over the scheduled-union users of their rate mismatch."""
    total = 0.0
    for m in sorted(users):
        msg = msgs[m]
        total += ra_distance(effs[m], msg.cqi, V[msg.cdi_index], C, params, sizes=sizes).value
    return 2.0 * total


STRATEGIES = ("perfect", "chordal", "ra-full", "ra-efficient", "lemma1")


def compute_feedback(strategy, uc, C, V, params, phi_table=None):
    """Dispatch one user's feedback message for the named strategy."""
    if strategy == "perfect":
        raise ValueError("perfect CSIT bypasses feedback; schedule on the effective channel")
    eff = mrc_effective_channel(uc, params)
    if strategy == "chordal":
        return chordal_cdi(eff, V)
    if strategy == "ra-efficient":
        return efficient_cdi(eff, C, V, phi_table=phi_table)
    if strategy == "lemma1":
        return lemma1_feedback(eff, C, V)
    if strategy == "ra-full":
        sub = per_subcarrier_effective_channels(uc, params) if uc.F > 1 else None
        return ra_feedback(eff, C, V, params, subcarrier_effs=sub, phi_table=phi_table)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
