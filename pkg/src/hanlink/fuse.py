"""Incorporating name-score information into a fitted linkage model.

Three methods: tau1 picks the agreement threshold maximizing predicted F1
of name matching among name-disagreeing rows; tau2 picks the threshold
maximizing the predicted post-transfer ranking quality (AUROC) using the
donor/recipient transfer equations; posterior adjustment re-estimates
match probabilities pair-by-pair with the monotone likelihood ratio of
the observed name score, skipping rows where no posterior above the floor
is achievable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linkage import NA, LinkageModel, PatternTable, zeta_for_gammas
from .matcher import ScoreDistribution


def _name_index(table: PatternTable) -> int:
    try:
        return table.fields.index("name")
    except ValueError as exc:
        raise ValueError("pattern table has no 'name' field") from exc


def _donor_rows(table: PatternTable) -> np.ndarray:
    return np.nonzero(table.gammas[:, _name_index(table)] == 0)[0]


def transfer_predictions(zeta1, n1, zeta2, n2, tail_m, tail_u):
    """Predicted (zeta1_hat, zeta2_hat, n1_hat, n2_hat) after moving pairs
    with name score >= tau from a donor row (gamma_name=0) to its
    recipient row (gamma_name=1).

    tail_m/tail_u are P(X>=tau|M), P(X>=tau|U). The four equations
    conserve both total counts and matched mass.
    """
    zeta1 = np.asarray(zeta1, dtype=float)
    n1 = np.asarray(n1, dtype=float)
    zeta2 = np.asarray(zeta2, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    tail_m = np.asarray(tail_m, dtype=float)
    tail_u = np.asarray(tail_u, dtype=float)
    stay_m = zeta1 * (1.0 - tail_m)
    stay_u = (1.0 - zeta1) * (1.0 - tail_u)
    stay = stay_m + stay_u
    move = zeta1 * tail_m + (1.0 - zeta1) * tail_u
    n1_hat = n1 * stay
    n2_hat = n2 + n1 * move
    with np.errstate(invalid="ignore", divide="ignore"):
        zeta1_hat = np.where(stay > 0, stay_m / np.where(stay > 0, stay, 1.0), zeta1)
        num2 = zeta2 * n2 + zeta1 * tail_m * n1
        zeta2_hat = np.where(n2_hat > 0, num2 / np.where(n2_hat > 0, n2_hat, 1.0), zeta2)
    return zeta1_hat, zeta2_hat, n1_hat, n2_hat


def tau1_select(table: PatternTable, zetas: np.ndarray, dist: ScoreDistribution,
                return_curve: bool = False):
    """Threshold maximizing predicted F1 of name agreement among
    name-disagreeing rows, over the score grid (ties -> smallest tau)."""
    donors = _donor_rows(table)
    if len(donors) == 0:
        raise ValueError("no rows with name disagreement; nothing to adjust")
    z = np.asarray(zetas, dtype=float)[donors]
    w = table.counts[donors].astype(float)
    w = w / w.sum() if w.sum() > 0 else np.full(len(donors), 1.0 / len(donors))
    tm = dist.tail_m[None, :]   # (1, G)
    tu = dist.tail_u[None, :]
    zc = z[:, None]
    num = zc * tm
    den = num + (1.0 - zc) * tu
    with np.errstate(invalid="ignore", divide="ignore"):
        prec_rows = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    precision = (w[:, None] * prec_rows).sum(axis=0)
    recall = dist.tail_m
    pr = precision + recall
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    best = int(np.argmax(f1))  # first max -> smallest tau
    tau = float(dist.grid[best])
    if return_curve:
        return tau, f1
    return tau


def _auroc_from_masses(scores: np.ndarray, pos: np.ndarray, neg: np.ndarray) -> float:
    """Grouped AUROC with half credit for tied scores (trapezoidal ties)."""
    P = pos.sum()
    N = neg.sum()
    if P <= 0 or N <= 0:
        return 0.5
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = pos[order]
    n = neg[order]
    # contiguous groups of equal score
    starts = np.concatenate([[0], np.nonzero(np.diff(s))[0] + 1])
    pg = np.add.reduceat(p, starts)
    ng = np.add.reduceat(n, starts)
    below = N - np.cumsum(ng)
    return float((pg * below + 0.5 * pg * ng).sum() / (P * N))


def tau2_select(table: PatternTable, zetas: np.ndarray, dist: ScoreDistribution,
                model: LinkageModel, return_curve: bool = False):
    """Threshold maximizing predicted post-transfer AUROC over the grid.

    Every donor row is paired with the recipient row sharing all other
    agreement values with gamma_name=1; absent recipients are created with
    N=0 and zeta from the model. Untouched rows enter the ranking with
    their prior zeta and count.
    """
    donors = _donor_rows(table)
    if len(donors) == 0:
        raise ValueError("no rows with name disagreement; nothing to adjust")
    zetas = np.asarray(zetas, dtype=float)
    name_ix = _name_index(table)
    codes = table.codes()
    code_to_row = {int(c): j for j, c in enumerate(codes)}
    power = 3 ** name_ix

    recip_row = np.full(len(donors), -1, dtype=np.int64)
    created_gammas = []
    created_ids = []
    for d_pos, j in enumerate(donors):
        recip_code = int(codes[j]) + power  # flip gamma_name 0 -> 1
        row = code_to_row.get(recip_code)
        if row is not None:
            recip_row[d_pos] = row
        else:
            gamma = table.gammas[j].copy()
            gamma[name_ix] = 1
            created_ids.append(d_pos)
            created_gammas.append(gamma)
    z1 = zetas[donors]
    n1 = table.counts[donors].astype(float)
    z2 = np.empty(len(donors))
    n2 = np.zeros(len(donors))
    existing = recip_row >= 0
    z2[existing] = zetas[recip_row[existing]]
    n2[existing] = table.counts[recip_row[existing]]
    if created_gammas:
        z2[np.array(created_ids)] = zeta_for_gammas(model, np.stack(created_gammas))

    touched = set(donors.tolist()) | set(recip_row[existing].tolist())
    untouched = np.array([j for j in range(len(table.counts)) if j not in touched],
                         dtype=np.int64)
    u_scores = zetas[untouched]
    u_n = table.counts[untouched].astype(float)

    grid = dist.grid
    pred = np.empty(len(grid))
    for g in range(len(grid)):
        zh1, zh2, nh1, nh2 = transfer_predictions(z1, n1, z2, n2,
                                                  dist.tail_m[g], dist.tail_u[g])
        scores = np.concatenate([u_scores, zh1, zh2])
        masses = np.concatenate([u_n, nh1, nh2])
        pos = scores * masses
        neg = (1.0 - scores) * masses
        pred[g] = _auroc_from_masses(scores, pos, neg)
    best = int(np.argmax(pred))
    tau = float(grid[best])
    if return_curve:
        return tau, pred
    return tau


def apply_threshold(tau: float, table: PatternTable,
                    scores_by_row: dict[int, np.ndarray],
                    strict: bool = True) -> tuple[PatternTable, dict[int, int]]:
    """Move pairs with name score >= tau from their gamma_name=0 row to the
    row with gamma_name flipped to 1; returns the new table and the moved
    count per donor row. strict requires a score for every pair of every
    donor row."""
    name_ix = _name_index(table)
    donors = _donor_rows(table)
    if strict:
        for j in donors:
            provided = len(scores_by_row.get(int(j), ()))
            if provided != int(table.counts[j]):
                raise ValueError(f"row {int(j)} has {int(table.counts[j])} pairs "
                                 f"but {provided} scores")
    counts = {int(c): int(n) for c, n in zip(table.codes(), table.counts)}
    power = 3 ** name_ix
    codes = table.codes()
    moved: dict[int, int] = {}
    for j in donors:
        scores = np.asarray(scores_by_row.get(int(j), ()), dtype=float)
        m = int((scores >= tau).sum())
        if m == 0:
            continue
        moved[int(j)] = m
        code = int(codes[j])
        counts[code] -= m
        counts[code + power] = counts.get(code + power, 0) + m
    if not moved:
        return table, moved
    kept = sorted(c for c, n in counts.items() if n > 0)
    gammas = np.empty((len(kept), len(table.fields)), dtype=np.int8)
    new_counts = np.empty(len(kept), dtype=table.counts.dtype)
    for i, code in enumerate(kept):
        rest = code
        for f in range(len(table.fields)):
            gammas[i, f] = rest % 3
            rest //= 3
        new_counts[i] = counts[code]
    return PatternTable(fields=table.fields, gammas=gammas, counts=new_counts), moved


@dataclass
class AdjustedPairs:
    """Per-pair posterior updates for eligible name-disagreeing rows, plus
    the rows skipped because no posterior above the floor is achievable."""
    row_index: np.ndarray
    scores: np.ndarray
    prior: np.ndarray
    posterior: np.ndarray
    eligible_rows: np.ndarray
    skipped_rows: np.ndarray


def eligible_rows(table: PatternTable, zetas: np.ndarray, dist: ScoreDistribution,
                  floor: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Split gamma_name=0 rows into (eligible, skipped) by whether the best
    achievable posterior zeta*rmax/(zeta*rmax + 1 - zeta) reaches the floor."""
    donors = _donor_rows(table)
    z = np.asarray(zetas, dtype=float)[donors]
    rmax = dist.ratio_max
    best = z * rmax / (z * rmax + (1.0 - z))
    keep = best >= floor
    return donors[keep], donors[~keep]


def posterior_adjust(table: PatternTable, zetas: np.ndarray, dist: ScoreDistribution,
                     pair_rows: np.ndarray, pair_scores: np.ndarray,
                     floor: float = 0.1) -> AdjustedPairs:
    """Bayesian per-pair update zeta_hat = zeta*r(X) / (zeta*r(X) + 1 - zeta)
    for pairs in eligible rows; pairs in skipped rows keep the prior and
    are not returned."""
    zetas = np.asarray(zetas, dtype=float)
    pair_rows = np.asarray(pair_rows, dtype=np.int64)
    pair_scores = np.asarray(pair_scores, dtype=float)
    eligible, skipped = eligible_rows(table, zetas, dist, floor)
    eligible_set = np.zeros(len(table.counts), dtype=bool)
    eligible_set[eligible] = True
    keep = eligible_set[pair_rows]
    rows = pair_rows[keep]
    scores = pair_scores[keep]
    prior = zetas[rows]
    r = dist.ratio_at(scores)
    num = prior * r
    posterior = num / (num + (1.0 - prior))
    return AdjustedPairs(row_index=rows, scores=scores, prior=prior,
                         posterior=posterior, eligible_rows=eligible,
                         skipped_rows=skipped)
