"""Base-station side: user selection, beam assignment, and the zeroforcing baseline.

Scheduling maximizes the sum rate computed from whatever per-user vectors
the base station holds (true effective channels under perfect CSIT, scaled
quantization vectors under partial CSIT).  Brute force solves the
combinatorial problem exactly; the greedy variant inserts the best
(user, beam) pair until no insertion improves the rate.
"""

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .channel import sinr_optimal_filter_beams
from .rates import BeamAssignment, RateReport, rate_with_beams

BRUTE_MAX_USERS = 12
BRUTE_MAX_BEAMS = 32


@dataclass(frozen=True)
class ScheduleDecision:
    assignment: BeamAssignment
    predicted_sum_rate: float
    method: str


@dataclass(frozen=True)
class PrecodedDecision:
    """Zeroforcing decision: per-user beams that are not codebook entries."""

    users: tuple
    beams: tuple  # unit-norm vectors, aligned with users
    method: str = "zeroforcing"


def _power_table(users, vectors, C):
    return np.array([np.abs(C.vectors @ np.conj(vectors[m])) ** 2 for m in users])


def schedule_bruteforce(vectors, C, params):
    """Exact maximizer of the sum rate over user subsets and injective beam maps.

    Ties break to the lexicographically smallest (sorted user tuple, beam
    tuple).  Guarded against combinatorial blowup; use the greedy scheduler
    for larger instances.
    """
    users = sorted(vectors)
    if len(users) < 1:
        raise ValueError("need at least one user")
    if len(users) > BRUTE_MAX_USERS or len(C) > BRUTE_MAX_BEAMS:
        raise ValueError(
            f"brute-force scheduling refused for |U|={len(users)}, |C|={len(C)}; use greedy"
        )
    if len(C) < params.n_s:
        raise ValueError(f"codebook too small: |C|={len(C)} < n_s={params.n_s}")
    pw = {m: np.abs(C.vectors @ np.conj(vectors[m])) ** 2 for m in users}
    best_rate = 0.0
    best_key = ((), ())
    for k in range(1, params.n_s + 1):
        for S in combinations(users, k):
            for beams in permutations(range(len(C)), k):
                noise = params.sigma_sq * k / params.P
                total = 0.0
                for i, m in enumerate(S):
                    sig = pw[m][beams[i]]
                    intf = sum(pw[m][beams[j]] for j in range(k) if j != i)
                    total += np.log1p(sig / (noise + intf))
                key = (S, beams)
                if total > best_rate or (total == best_rate and key < best_key):
                    best_rate = float(total)
                    best_key = key
    assignment = BeamAssignment(dict(zip(best_key[0], best_key[1])))
    return ScheduleDecision(assignment, best_rate, "brute")


def schedule_greedy(vectors, C, params):
    """Greedy insertion: repeatedly add the (user, beam) pair that most
    increases the re-evaluated sum rate; stop at n_s users or when no
    insertion strictly improves.  Ties go to the smallest (user, beam)."""
    users = sorted(vectors)
    if len(users) < 1:
        raise ValueError("need at least one user")
    if len(C) < params.n_s:
        raise ValueError(f"codebook too small: |C|={len(C)} < n_s={params.n_s}")
    pw = _power_table(users, vectors, C)
    uidx = {m: i for i, m in enumerate(users)}
    members = []  # row indices into pw
    beams = []
    current = 0.0
    while len(members) < params.n_s:
        k_new = len(members) + 1
        noise = params.sigma_sq * k_new / params.P
        free_users = [i for i in range(len(users)) if i not in members]
        free_beams = [j for j in range(len(C)) if j not in beams]
        if not free_users or not free_beams:
            break
        cand = np.full((len(free_users), len(free_beams)), -np.inf)
        intf_existing = pw[:, beams].sum(axis=1) if beams else np.zeros(len(users))
        for a, i in enumerate(free_users):
            new_user = np.log1p(pw[i, free_beams] / (noise + intf_existing[i]))
            rest = np.zeros(len(free_beams))
            for pos, l in enumerate(members):
                sig = pw[l, beams[pos]]
                base_intf = intf_existing[l] - pw[l, beams[pos]]
                rest += np.log1p(pw[l, beams[pos]] / (noise + base_intf + pw[l, free_beams]))
            cand[a] = new_user + rest
        flat = int(np.argmax(cand))
        a, b = divmod(flat, len(free_beams))
        if cand[a, b] <= current:
            break
        members.append(free_users[a])
        beams.append(free_beams[b])
        current = float(cand[a, b])
    assignment = BeamAssignment({users[i]: beams[pos] for pos, i in enumerate(members)})
    return ScheduleDecision(assignment, current, "greedy")


def zf_precode(cdis, params):
    """Zeroforcing beams for the given channel directions.

    Beams are the pseudo-inverse columns of the stacked conjugated
    directions, normalized to unit norm, so beam i is orthogonal to every
    direction j != i.  Power is split equally at rate evaluation.
    """
    cdis = [np.asarray(v, dtype=complex) for v in cdis]
    if not cdis:
        raise ValueError("need at least one direction")
    A = np.array([np.conj(v) for v in cdis])
    if np.linalg.matrix_rank(A, tol=1e-10) < len(cdis):
        raise ValueError("channel directions are linearly dependent; cannot zeroforce")
    B = np.linalg.pinv(A)
    beams = []
    for i in range(len(cdis)):
        b = B[:, i]
        beams.append(b / np.linalg.norm(b))
    return PrecodedDecision(users=tuple(range(len(cdis))), beams=tuple(beams))


def zf_decision_for(users, cdis, params):
    """PrecodedDecision with explicit user ids attached."""
    base = zf_precode(cdis, params)
    return PrecodedDecision(users=tuple(users), beams=base.beams)


def realize_rates(decision, channels, params, C=None):
    """Actual rates of a decision on the true channels.

    `channels` maps user -> UserChannel.  With n_r == 1 the rate formula is
    evaluated directly on the effective channel; with n_r > 1 each user
    applies its SINR-optimal receive filter for the realized beam layout.
    Multi-subcarrier channels realize the per-subcarrier average.
    """
    if isinstance(decision, PrecodedDecision):
        users = list(decision.users)
        beam_of = dict(zip(decision.users, decision.beams))
    else:
        users = decision.assignment.users
        beam_of = {m: C[j] for m, j in decision.assignment.pairs.items()}
    k = len(users)
    per_user = {}
    for m in users:
        own = beam_of[m]
        others = [beam_of[l] for l in users if l != m]
        uc = channels[m]
        vals = []
        for Hf in uc.per_subcarrier():
            if params.n_r == 1:
                v = Hf.conj().T @ np.ones(1, dtype=complex)
                vals.append(rate_with_beams(v, own, others, k, params))
            else:
                _, sinr = sinr_optimal_filter_beams(Hf, own, others, k, params)
                vals.append(float(np.log1p(sinr)))
        per_user[m] = float(np.mean(vals)) if vals else 0.0
    return RateReport(per_user=per_user, sum=float(sum(per_user.values())))
