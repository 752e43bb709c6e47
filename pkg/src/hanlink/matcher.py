"""Name-match classifier training and empirical score distributions.

The classifier is a ridge-penalized logistic regression whose feature
effects may be stratified by the pair's Han category (both, neither,
disagreeing). Fitting uses damped Newton (IRLS) iterations; feature
selection is greedy-forward on dev AUROC/EAUROC followed by backward
pruning of interaction terms. Score distributions keep exact empirical
tail probabilities on a 10,000-point grid plus a monotone (isotonic)
match/nonmatch density-ratio estimate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compare import FeatureSpec, FeatureVector, HAN_CATEGORIES, HanCategory
from .metrics import GroupedRanking, auroc, eauroc

MIN_IMPROVE = 1e-5
GRID_SIZE = 10_000


class TrainingError(RuntimeError):
    pass


class ConvergenceError(TrainingError):
    """Raised when IRLS hits max_iter; carries the last iterate."""

    def __init__(self, message: str, model: "MatcherModel"):
        super().__init__(message)
        self.model = model


@dataclass
class LabeledPair:
    features: FeatureVector
    label: int


@dataclass
class MatcherModel:
    kind: str                               # "logistic" | "single"
    specs: tuple[FeatureSpec, ...]
    intercepts: dict[HanCategory, float] = field(default_factory=dict)
    coefs: dict[HanCategory, np.ndarray] = field(default_factory=dict)
    trainer: dict = field(default_factory=dict)

    @classmethod
    def single_feature(cls, spec: FeatureSpec) -> "MatcherModel":
        return cls(kind="single", specs=(spec,))

    def predict_matrix(self, X: np.ndarray, cats: np.ndarray) -> np.ndarray:
        if self.kind == "single":
            return np.asarray(X)[:, 0].astype(float)
        X = np.asarray(X, dtype=float)
        cats = np.asarray(cats)
        scores = np.empty(X.shape[0])
        for code, cat in enumerate(HAN_CATEGORIES):
            mask = cats == code
            if mask.any():
                z = self.intercepts[cat] + X[mask] @ self.coefs[cat]
                scores[mask] = _sigmoid(z)
        return scores

    def to_dict(self) -> dict:
        out = {"format_version": 1, "kind": self.kind,
               "specs": [s.to_dict() for s in self.specs]}
        if self.kind == "logistic":
            out["coefficients"] = {
                cat.value: {"intercept": self.intercepts[cat],
                            "slopes": [float(v) for v in self.coefs[cat]]}
                for cat in HAN_CATEGORIES
            }
            out["trainer"] = self.trainer
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MatcherModel":
        specs = tuple(FeatureSpec.from_dict(s) for s in d["specs"])
        if d["kind"] == "single":
            return cls(kind="single", specs=specs)
        intercepts, coefs = {}, {}
        for cat in HAN_CATEGORIES:
            block = d["coefficients"][cat.value]
            intercepts[cat] = float(block["intercept"])
            coefs[cat] = np.asarray(block["slopes"], dtype=float)
        return cls(kind="logistic", specs=specs, intercepts=intercepts,
                   coefs=coefs, trainer=d.get("trainer", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True),
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MatcherModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def predict(model: MatcherModel, fv: FeatureVector,
            specs: tuple[FeatureSpec, ...] | None = None) -> float:
    """Classifier score for one feature vector (logistic of the
    Han-category-specific linear predictor, or the raw value in
    single-feature mode)."""
    if len(fv.values) != len(model.specs):
        raise ValueError(f"feature vector has {len(fv.values)} values, "
                         f"model expects {len(model.specs)}")
    if specs is not None and tuple(specs) != tuple(model.specs):
        raise ValueError("feature vector spec list does not match model specs")
    if model.kind == "single":
        return float(fv.values[0])
    cat = fv.han_category
    z = model.intercepts[cat] + float(np.dot(model.coefs[cat], fv.values))
    return float(_sigmoid(np.array([z]))[0])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _as_matrices(data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accept a list of LabeledPair or an (X, cats, y) triple."""
    if isinstance(data, tuple):
        X, cats, y = data
        return (np.asarray(X, dtype=float), np.asarray(cats, dtype=np.int8),
                np.asarray(y, dtype=float))
    X = np.stack([p.features.values for p in data])
    cats = np.array([HAN_CATEGORIES.index(p.features.han_category) for p in data],
                    dtype=np.int8)
    y = np.array([p.label for p in data], dtype=float)
    return X, cats, y


# Design-matrix terms: ("main", j) is feature j shared across categories;
# ("inter", j, c) and ("catdum", c) add category-specific offsets relative
# to the NeitherHan reference (c is the category code, 1 or 2).
def _build_design(X: np.ndarray, cats: np.ndarray, terms: list[tuple]) -> np.ndarray:
    cols = [np.ones(X.shape[0])]
    for term in terms:
        if term[0] == "main":
            cols.append(X[:, term[1]])
        elif term[0] == "catdum":
            cols.append((cats == term[1]).astype(float))
        elif term[0] == "inter":
            cols.append(X[:, term[1]] * (cats == term[2]))
        else:
            raise ValueError(f"unknown term {term!r}")
    return np.column_stack(cols)


def _penalized_nll(beta, D, y, penalty):
    z = D @ beta
    # log(1 + e^z) - y*z, computed stably
    ll = np.logaddexp(0.0, z) - y * z
    return float(ll.sum() + 0.5 * penalty * np.dot(beta[1:], beta[1:]))


def _fit_design(D: np.ndarray, y: np.ndarray, penalty: float, tol: float,
                max_iter: int) -> tuple[np.ndarray, int, bool, list[float]]:
    n, p = D.shape
    beta = np.zeros(p)
    pen = np.full(p, penalty)
    pen[0] = 0.0  # intercept unpenalized
    objective = _penalized_nll(beta, D, y, penalty)
    trace = [objective]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        mu = _sigmoid(D @ beta)
        grad = D.T @ (mu - y) + pen * beta
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        H = (D * w[:, None]).T @ D + np.diag(pen)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        # damped Newton: halve until the penalized objective decreases
        scale = 1.0
        new_obj = objective
        for _ in range(40):
            candidate = beta - scale * step
            new_obj = _penalized_nll(candidate, D, y, penalty)
            if new_obj <= objective:
                beta = candidate
                break
            scale *= 0.5
        assert new_obj <= objective + 1e-9 * (1.0 + abs(objective)), \
            "training objective must not increase"
        delta = objective - new_obj
        objective = new_obj
        trace.append(objective)
        if delta < tol * (abs(objective) + 1.0):
            converged = True
            break
    return beta, iterations, converged, trace


def _collapse(beta: np.ndarray, terms: list[tuple], specs: tuple[FeatureSpec, ...],
              trainer: dict) -> MatcherModel:
    p = len(specs)
    intercepts = {cat: float(beta[0]) for cat in HAN_CATEGORIES}
    coefs = {cat: np.zeros(p) for cat in HAN_CATEGORIES}
    for value, term in zip(beta[1:], terms):
        if term[0] == "main":
            for cat in HAN_CATEGORIES:
                coefs[cat][term[1]] += value
        elif term[0] == "catdum":
            intercepts[HAN_CATEGORIES[term[1]]] += value
        elif term[0] == "inter":
            coefs[HAN_CATEGORIES[term[2]]][term[1]] += value
    return MatcherModel(kind="logistic", specs=specs, intercepts=intercepts,
                        coefs=coefs, trainer=trainer)


def train_logistic(data, specs: tuple[FeatureSpec, ...], penalty: float = 1e-6,
                   tol: float = 1e-8, max_iter: int = 200,
                   interactions: bool = False,
                   terms: list[tuple] | None = None) -> MatcherModel:
    """Fit the ridge-penalized logistic matcher over `specs`.

    With interactions=True each feature gets per-Han-category offsets
    (plus category intercept dummies); `terms` restricts the design to an
    explicit term subset (used by backward pruning).
    """
    X, cats, y = _as_matrices(data)
    if len(np.unique(y)) < 2:
        raise TrainingError("training data must contain both classes")
    if X.shape[1] != len(specs):
        raise ValueError("feature matrix width does not match specs")
    if terms is None:
        terms = [("main", j) for j in range(len(specs))]
        if interactions:
            terms += [("catdum", c) for c in (1, 2)]
            terms += [("inter", j, c) for j in range(len(specs)) for c in (1, 2)]
    D = _build_design(X, cats, terms)
    beta, iterations, converged, trace = _fit_design(D, y, penalty, tol, max_iter)
    trainer = {"iterations": iterations, "penalty": penalty, "tol": tol,
               "converged": converged,
               "terms": [list(t) for t in terms]}
    model = _collapse(beta, terms, specs, trainer)
    if not converged:
        raise ConvergenceError(f"IRLS did not converge in {max_iter} iterations", model)
    return model


def _dev_metrics(model: MatcherModel, dev_X, dev_cats, dev_y,
                 col_idx: np.ndarray) -> tuple[float, float]:
    scores = model.predict_matrix(dev_X[:, col_idx], dev_cats)
    ranking = GroupedRanking.from_pairs(scores, dev_y)
    return auroc(ranking), eauroc(ranking)


def forward_select(candidates: list[FeatureSpec], train, dev,
                   bank: tuple[FeatureSpec, ...],
                   penalty: float = 1e-6, tol: float = 1e-8,
                   min_improve: float = MIN_IMPROVE) -> list[FeatureSpec]:
    """Greedy forward selection maximizing dev AUROC (ties: EAUROC, then
    candidate order); stops once the best addition improves both metrics
    by less than `min_improve`."""
    if not candidates:
        raise ValueError("candidate list is empty")
    X, cats, y = _as_matrices(train)
    dev_X, dev_cats, dev_y = _as_matrices(dev)
    bank_index = {spec: i for i, spec in enumerate(bank)}
    remaining = list(candidates)
    selected: list[FeatureSpec] = []
    cur_auroc, cur_eauroc = 0.5, 0.5  # intercept-only ranking is uninformative
    while remaining:
        best = None  # (auroc, eauroc, -position) strictly improving comparisons
        for pos, cand in enumerate(remaining):
            cols = np.array([bank_index[s] for s in selected + [cand]])
            sub = tuple(selected + [cand])
            model = train_logistic((X[:, cols], cats, y), sub, penalty=penalty,
                                   tol=tol, interactions=False)
            a, e = _dev_metrics(model, dev_X, dev_cats, dev_y, cols)
            key = (a, e, -pos)
            if best is None or key > best[0]:
                best = (key, pos, a, e)
        _, pos, a, e = best
        if a - cur_auroc < min_improve and e - cur_eauroc < min_improve:
            break
        selected.append(remaining.pop(pos))
        cur_auroc, cur_eauroc = a, e
    return selected


def backward_prune(model: MatcherModel, dev, train,
                   penalty: float = 1e-6, tol: float = 1e-8,
                   min_improve: float = MIN_IMPROVE) -> MatcherModel:
    """Drop design terms (mains and interactions) one at a time, always the
    one whose removal least harms dev metrics, refitting after each drop;
    stops before any drop that worsens dev AUROC or EAUROC by more than
    `min_improve`."""
    X, cats, y = _as_matrices(train)
    dev_X, dev_cats, dev_y = _as_matrices(dev)
    specs = model.specs
    all_cols = np.arange(len(specs))
    terms = [tuple(t) for t in model.trainer["terms"]]
    cur_a, cur_e = _dev_metrics(model, dev_X, dev_cats, dev_y, all_cols)
    current = model
    while True:
        droppable = [t for t in terms if t[0] in ("main", "inter")]
        if len(droppable) <= 1:
            break
        best = None
        for t in droppable:
            trial_terms = [u for u in terms if u != t]
            trial = train_logistic((X, cats, y), specs, penalty=penalty, tol=tol,
                                   terms=trial_terms)
            a, e = _dev_metrics(trial, dev_X, dev_cats, dev_y, all_cols)
            key = (min(a - cur_a, e - cur_e), a, e)
            if best is None or key > best[0]:
                best = (key, t, trial, a, e)
        _, term, trial, a, e = best
        if cur_a - a > min_improve or cur_e - e > min_improve:
            break
        terms = [u for u in terms if u != term]
        current, cur_a, cur_e = trial, a, e
    return current


def train_matcher(train, dev, bank: tuple[FeatureSpec, ...],
                  candidates: list[FeatureSpec] | None = None,
                  penalty: float = 1e-6, tol: float = 1e-8,
                  min_improve: float = MIN_IMPROVE) -> MatcherModel:
    """The full two-step trainer: forward selection of single features,
    then a Han-category interaction model pruned backward."""
    if candidates is None:
        candidates = [s for s in bank if s.comparator != "CAT"]
    selected = forward_select(candidates, train, dev, bank, penalty=penalty,
                              tol=tol, min_improve=min_improve)
    if not selected:
        selected = [candidates[0]]
    X, cats, y = _as_matrices(train)
    dev_X, dev_cats, dev_y = _as_matrices(dev)
    cols = np.array([bank.index(s) for s in selected])
    full = train_logistic((X[:, cols], cats, y), tuple(selected), penalty=penalty,
                          tol=tol, interactions=True)
    pruned = backward_prune(full, (dev_X[:, cols], dev_cats, dev_y),
                            (X[:, cols], cats, y), penalty=penalty, tol=tol,
                            min_improve=min_improve)
    return pruned


# ---------------------------------------------------------------------------
# Empirical score distributions


def pava(values, weights) -> np.ndarray:
    """Weighted least-squares isotonic (non-decreasing) fit via
    pool-adjacent-violators."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise ValueError("values and weights must have the same shape")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    # blocks of (weight sum, weighted mean, length)
    block_w: list[float] = []
    block_mean: list[float] = []
    block_len: list[int] = []
    for v, w in zip(values, weights):
        block_w.append(w)
        block_mean.append(v)
        block_len.append(1)
        while len(block_w) > 1 and block_mean[-2] > block_mean[-1]:
            w2, m2, l2 = block_w.pop(), block_mean.pop(), block_len.pop()
            w1, m1, l1 = block_w.pop(), block_mean.pop(), block_len.pop()
            wt = w1 + w2
            mean = m1 if wt == 0 else (w1 * m1 + w2 * m2) / wt
            block_w.append(wt)
            block_mean.append(mean)
            block_len.append(l1 + l2)
    out = np.empty_like(values)
    pos = 0
    for mean, length in zip(block_mean, block_len):
        out[pos : pos + length] = mean
        pos += length
    return out


@dataclass
class ScoreDistribution:
    """Empirical tails P(X>=tau | M/U) on the selection grid plus a
    monotone binned estimate of the density ratio f(X|M)/f(X|U)."""
    grid: np.ndarray
    tail_m: np.ndarray
    tail_u: np.ndarray
    bin_edges: np.ndarray
    counts_m: np.ndarray
    counts_u: np.ndarray
    ratio: np.ndarray

    @property
    def ratio_max(self) -> float:
        return float(self.ratio[-1])  # non-decreasing, so the last bin is max

    def ratio_at(self, x) -> np.ndarray:
        bins = len(self.ratio)
        idx = np.clip((np.asarray(x, dtype=float) * bins).astype(int), 0, bins - 1)
        return self.ratio[idx]

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "grid_size": len(self.grid),
            "tail_m": [float(v) for v in self.tail_m],
            "tail_u": [float(v) for v in self.tail_u],
            "bin_edges": [float(v) for v in self.bin_edges],
            "counts_m": [int(v) for v in self.counts_m],
            "counts_u": [int(v) for v in self.counts_u],
            "ratio": [float(v) for v in self.ratio],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreDistribution":
        grid = np.linspace(0.0, 1.0, int(d["grid_size"]))
        dist = cls(grid=grid,
                   tail_m=np.asarray(d["tail_m"], dtype=float),
                   tail_u=np.asarray(d["tail_u"], dtype=float),
                   bin_edges=np.asarray(d["bin_edges"], dtype=float),
                   counts_m=np.asarray(d["counts_m"], dtype=np.int64),
                   counts_u=np.asarray(d["counts_u"], dtype=np.int64),
                   ratio=np.asarray(d["ratio"], dtype=float))
        if np.any(np.diff(dist.ratio) < -1e-12):
            raise ValueError("score distribution ratio is not monotone")
        return dist

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True),
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ScoreDistribution":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_score_distributions(scores, labels, bins: int = 200,
                            grid_size: int = GRID_SIZE) -> ScoreDistribution:
    """Estimate tails and the monotone density ratio from labeled scores.

    Tails are exact empirical survival functions on the grid; the ratio is
    built from per-bin class counts with add-half smoothing and made
    non-decreasing by PAVA weighted with (smoothed) bin totals.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    sm = np.sort(scores[labels == 1])
    su = np.sort(scores[labels == 0])
    if len(sm) == 0 or len(su) == 0:
        raise ValueError("scores must include both classes")
    grid = np.linspace(0.0, 1.0, grid_size)
    tail_m = 1.0 - np.searchsorted(sm, grid, side="left") / len(sm)
    tail_u = 1.0 - np.searchsorted(su, grid, side="left") / len(su)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts_m, _ = np.histogram(sm, bins=edges)
    counts_u, _ = np.histogram(su, bins=edges)
    dens_m = (counts_m + 0.5) / (len(sm) + 0.5 * bins)
    dens_u = (counts_u + 0.5) / (len(su) + 0.5 * bins)
    raw = dens_m / dens_u
    weights = counts_m + counts_u + 1.0
    ratio = pava(raw, weights)
    return ScoreDistribution(grid=grid, tail_m=tail_m, tail_u=tail_u,
                             bin_edges=edges, counts_m=counts_m,
                             counts_u=counts_u, ratio=ratio)
