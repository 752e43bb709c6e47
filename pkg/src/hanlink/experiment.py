"""End-to-end linkage experiments on record-file pairs.

Wires the pipeline together: agreement tabulation over the full cross
product, EM fit, optional name-score incorporation (tau1/tau2 threshold
moves or per-pair posterior adjustment), and the evaluation report.

Scoring every gamma_name=0 pair of a 10^8-pair linkage is not feasible at
desk scale, so pair-level name scoring is restricted to rows whose best
achievable posterior reaches `candidate_floor` (default 0.01); rows below
it cannot contribute recoverable matches and keep their prior zeta.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from .assets import AssetBundle, load_bundle
from .compare import FeatureSpec, PairFeaturizer
from .fuse import eligible_rows, posterior_adjust, tau1_select, tau2_select
from .linkage import (
    NA,
    PatternTable,
    em_fit,
    encode_field_values,
    pair_gamma_codes,
    zeta,
)
from .matcher import (
    MatcherModel,
    ScoreDistribution,
    fit_score_distributions,
    train_matcher,
)
from .metrics import GroupedRanking, auroc, eauroc, grouped_log_loss
from .simgen import SimConfig, build_name_model, generate_pair_files

DEFAULT_METHODS = ("exact", "tau1", "tau2", "posterior")


def _seed_of(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0]) % 2**63
DEFAULT_CANDIDATE_FLOOR = 0.01
DEFAULT_POSTERIOR_FLOOR = 0.1
_STORE_LIMIT = 300_000_000  # elements; above this, pair codes are recomputed per pass


class NamePairScorer:
    """Classifier scores for name pairs, deduplicated over unique pairs."""

    def __init__(self, model: MatcherModel, featurizer: PairFeaturizer):
        if tuple(featurizer.specs) != tuple(model.specs):
            raise ValueError("featurizer specs must match model specs")
        self.model = model
        self.featurizer = featurizer
        self._cache: dict[tuple[str, str], float] = {}

    def scores(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        missing = [p for p in set(pairs) if p not in self._cache]
        if missing:
            X, cats = self.featurizer.feature_matrix(missing)
            values = self.model.predict_matrix(X, cats)
            for pair, value in zip(missing, values):
                self._cache[pair] = float(value)
        return np.array([self._cache[p] for p in pairs])


class ExternalScorer:
    """Name-pair scores taken from a precomputed table (any score source)."""

    def __init__(self, table: dict[tuple[str, str], float]):
        self.table = table

    def scores(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        out = np.empty(len(pairs))
        for i, pair in enumerate(pairs):
            value = self.table.get(pair)
            if value is None:
                raise ValueError(f"external score table is missing pair {pair!r}")
            out[i] = value
        return out


class LinkageDataset:
    """Two record files with truth links, pre-encoded for pattern work."""

    def __init__(self, records_a: dict[str, list[str]], records_b: dict[str, list[str]],
                 truth: np.ndarray, fields: tuple[str, ...]):
        self.fields = tuple(fields)
        if "name" not in self.fields:
            raise ValueError("linkage fields must include 'name'")
        self.name_ix = self.fields.index("name")
        self.names_a = records_a["name"]
        self.names_b = records_b["name"]
        self.n_a = len(self.names_a)
        self.n_b = len(self.names_b)
        self.codes_a, self.codes_b = [], []
        for f in self.fields:
            ca, cb = encode_field_values(records_a[f], records_b[f])
            self.codes_a.append(ca)
            self.codes_b.append(cb)
        self.truth = np.asarray(truth, dtype=np.int64).reshape(-1, 2)
        self.truth_b_of_a = np.full(self.n_a, -1, dtype=np.int64)
        self.truth_b_of_a[self.truth[:, 0]] = self.truth[:, 1]
        self._matrix: np.ndarray | None = None
        self._store = self.n_a * self.n_b <= _STORE_LIMIT

    def _chunks(self, chunk_rows: int = 512):
        for start in range(0, self.n_a, chunk_rows):
            rows = slice(start, min(start + chunk_rows, self.n_a))
            if self._matrix is not None:
                yield start, self._matrix[rows]
            else:
                yield start, pair_gamma_codes(self.codes_a, self.codes_b, rows)

    def tabulate(self) -> tuple[PatternTable, np.ndarray]:
        """Pattern table over all pairs plus true-match counts per row."""
        n_codes = 3 ** len(self.fields)
        totals = np.zeros(n_codes, dtype=np.int64)
        if self._store and self._matrix is None:
            self._matrix = np.empty((self.n_a, self.n_b), dtype=np.int16)
            for start in range(0, self.n_a, 512):
                rows = slice(start, min(start + 512, self.n_a))
                self._matrix[rows] = pair_gamma_codes(self.codes_a, self.codes_b,
                                                      rows).astype(np.int16)
        for _, block in self._chunks():
            totals += np.bincount(block.ravel().astype(np.int64), minlength=n_codes)
        truth_codes = self._truth_codes()
        pos_by_code = np.bincount(truth_codes, minlength=n_codes)
        present = np.nonzero(totals)[0]
        gammas = np.empty((len(present), len(self.fields)), dtype=np.int8)
        rest = present.copy()
        for f in range(len(self.fields)):
            gammas[:, f] = rest % 3
            rest //= 3
        table = PatternTable(fields=self.fields, gammas=gammas, counts=totals[present])
        return table, pos_by_code[present].astype(np.int64)

    def _truth_codes(self) -> np.ndarray:
        ta, tb = self.truth[:, 0], self.truth[:, 1]
        code = np.zeros(len(ta), dtype=np.int64)
        power = 1
        for ca, cb in zip(self.codes_a, self.codes_b):
            a, b = ca[ta], cb[tb]
            gamma = np.where((a == -1) | (b == -1), NA, (a == b).astype(np.int64))
            code += gamma * power
            power *= 3
        return code

    def candidate_pairs(self, wanted_codes: np.ndarray):
        """All (i, j, code) pairs whose pattern code is in `wanted_codes`."""
        wanted = np.zeros(3 ** len(self.fields), dtype=bool)
        wanted[wanted_codes] = True
        parts_i, parts_j, parts_c = [], [], []
        for start, block in self._chunks():
            hit = wanted[block.astype(np.int64)]
            ii, jj = np.nonzero(hit)
            parts_i.append(ii + start)
            parts_j.append(jj)
            parts_c.append(block[ii, jj].astype(np.int64))
        if not parts_i:
            return (np.empty(0, np.int64),) * 3
        return (np.concatenate(parts_i), np.concatenate(parts_j),
                np.concatenate(parts_c))


def _evaluate_ranking(scores, pos, neg, pi_true, pi_est, q=None) -> dict:
    ranking = GroupedRanking(np.asarray(scores, float), np.asarray(pos, float),
                             np.asarray(neg, float))
    if q is None:
        q = ranking.total_pos() / ranking.total_neg()
    from .metrics import confusion_at_proportion
    fn_t, fp_t = confusion_at_proportion(ranking, pi_true)
    fn_e, fp_e = confusion_at_proportion(ranking, pi_est)
    return {
        "auroc": auroc(ranking),
        "eauroc": eauroc(ranking, q),
        "q": q,
        "neg_log_lik": grouped_log_loss(scores, pos, neg),
        "fn_true_pm": fn_t,
        "fp_true_pm": fp_t,
        "fn_est_pm": fn_e,
        "fp_est_pm": fp_e,
        "pi_m_true": pi_true,
        "pi_m_est": pi_est,
    }


def _moved_table(table: PatternTable, pos: np.ndarray, name_ix: int,
                 pair_rows: np.ndarray, move_mask: np.ndarray,
                 labels: np.ndarray) -> tuple[PatternTable, np.ndarray]:
    """New table after flipping gamma_name to 1 for masked pairs."""
    codes = table.codes()
    entries = {int(c): [int(n), int(p)] for c, n, p in zip(codes, table.counts, pos)}
    power = 3 ** name_ix
    J = len(table.counts)
    moved_n = np.bincount(pair_rows[move_mask], minlength=J)
    moved_p = np.bincount(pair_rows[move_mask & labels], minlength=J)
    for j in np.nonzero(moved_n)[0]:
        code = int(codes[j])
        target = code + power
        entries[code][0] -= int(moved_n[j])
        entries[code][1] -= int(moved_p[j])
        if target not in entries:
            entries[target] = [0, 0]
        entries[target][0] += int(moved_n[j])
        entries[target][1] += int(moved_p[j])
    kept = sorted(c for c, (n, _) in entries.items() if n > 0)
    gammas = np.empty((len(kept), len(table.fields)), dtype=np.int8)
    counts = np.empty(len(kept), dtype=np.int64)
    new_pos = np.empty(len(kept), dtype=np.int64)
    for r, code in enumerate(kept):
        rest = code
        for f in range(len(table.fields)):
            gammas[r, f] = rest % 3
            rest //= 3
        counts[r] = entries[code][0]
        new_pos[r] = entries[code][1]
    return PatternTable(fields=table.fields, gammas=gammas, counts=counts), new_pos


@dataclass
class MethodInputs:
    table: PatternTable
    pos: np.ndarray
    zetas: np.ndarray
    pair_rows: np.ndarray     # candidate pairs: table row index
    pair_scores: np.ndarray
    pair_labels: np.ndarray
    pi_true: float


def run_methods(dataset: LinkageDataset, methods: tuple[str, ...],
                scorer=None, dist: ScoreDistribution | None = None,
                floor: float = DEFAULT_POSTERIOR_FLOOR,
                candidate_floor: float = DEFAULT_CANDIDATE_FLOOR,
                q: float | None = None) -> dict[str, dict]:
    """Run the requested incorporation methods and return per-method reports."""
    table, pos = dataset.tabulate()
    neg = table.counts - pos
    fs_model = em_fit(table)
    z = zeta(fs_model, table)
    total = table.total
    pi_true = len(dataset.truth) / total
    pi_est = float((z * table.counts).sum() / total)

    reports: dict[str, dict] = {}
    if "exact" in methods:
        reports["exact"] = _evaluate_ranking(z, pos, neg, pi_true, pi_est, q)
        reports["exact"]["method"] = "exact"
    fusion = [m for m in methods if m != "exact"]
    if not fusion:
        return reports
    if scorer is None or dist is None:
        raise ValueError("non-exact methods need a scorer and a fitted distribution")

    cand_floor = min(candidate_floor, floor)
    cand_rows, _ = eligible_rows(table, z, dist, floor=cand_floor)
    codes = table.codes()
    code_to_row = {int(c): r for r, c in enumerate(codes)}
    ii, jj, pair_codes = dataset.candidate_pairs(codes[cand_rows])
    pair_rows = np.array([code_to_row[int(c)] for c in pair_codes], dtype=np.int64)
    pair_labels = dataset.truth_b_of_a[ii] == jj
    name_pairs = [(dataset.names_a[i], dataset.names_b[j]) for i, j in zip(ii, jj)]
    pair_scores = scorer.scores(name_pairs) if name_pairs else np.empty(0)

    inputs = MethodInputs(table=table, pos=pos, zetas=z, pair_rows=pair_rows,
                          pair_scores=pair_scores, pair_labels=pair_labels,
                          pi_true=pi_true)
    for method in fusion:
        if method in ("tau1", "tau2"):
            reports[method] = _threshold_report(method, inputs, fs_model, dist,
                                                dataset, q)
        elif method == "posterior":
            reports[method] = _posterior_report(inputs, dist, floor, q)
        else:
            raise ValueError(f"unknown method {method!r}")
        reports[method]["method"] = method
        reports[method]["n_candidate_pairs"] = int(len(pair_rows))
    return reports


def _threshold_report(method: str, inputs: MethodInputs, fs_model, dist,
                      dataset: LinkageDataset, q) -> dict:
    if method == "tau1":
        tau = tau1_select(inputs.table, inputs.zetas, dist)
    else:
        tau = tau2_select(inputs.table, inputs.zetas, dist, fs_model)
    move = inputs.pair_scores >= tau
    new_table, new_pos = _moved_table(inputs.table, inputs.pos, dataset.name_ix,
                                      inputs.pair_rows, move, inputs.pair_labels)
    model2 = em_fit(new_table)
    z2 = zeta(model2, new_table)
    total = new_table.total
    pi_est = float((z2 * new_table.counts).sum() / total)
    report = _evaluate_ranking(z2, new_pos, new_table.counts - new_pos,
                               inputs.pi_true, pi_est, q)
    report["tau"] = tau
    report["n_moved_pairs"] = int(move.sum())
    return report


def _posterior_report(inputs: MethodInputs, dist: ScoreDistribution,
                      floor: float, q) -> dict:
    table, z, pos = inputs.table, inputs.zetas, inputs.pos
    adjusted = posterior_adjust(table, z, dist, inputs.pair_rows,
                                inputs.pair_scores, floor=floor)
    elig = adjusted.eligible_rows
    in_elig = np.zeros(len(table.counts), dtype=bool)
    in_elig[elig] = True
    covered = np.bincount(inputs.pair_rows, minlength=len(table.counts))[elig]
    if not np.array_equal(covered, table.counts[elig]):
        raise RuntimeError("candidate enumeration did not cover all pairs of "
                           "eligible rows; lower candidate_floor")
    pair_labels = inputs.pair_labels[in_elig[inputs.pair_rows]]
    keep = ~in_elig
    scores = np.concatenate([z[keep], adjusted.posterior])
    pos_mass = np.concatenate([pos[keep].astype(float), pair_labels.astype(float)])
    neg_mass = np.concatenate([(table.counts[keep] - pos[keep]).astype(float),
                               1.0 - pair_labels.astype(float)])
    total = table.total
    pi_est_prior = float((z * table.counts).sum() / total)
    pi_est = float(((z[keep] * table.counts[keep]).sum() + adjusted.posterior.sum())
                   / total)
    report = _evaluate_ranking(scores, pos_mass, neg_mass, inputs.pi_true, pi_est, q)
    report["floor"] = floor
    report["n_eligible_rows"] = int(len(elig))
    report["n_skipped_rows"] = int(len(adjusted.skipped_rows))
    report["n_adjusted_pairs"] = int(len(adjusted.posterior))
    report["pi_m_est_prior"] = pi_est_prior
    return report


# ---------------------------------------------------------------------------
# Training a matcher + score distribution from a development simulation


def train_matcher_and_dist(bundle: AssetBundle, name_model, sim_params: dict,
                           seed: int, classifier: str = "logistic:train",
                           train_opts: dict | None = None
                           ) -> tuple[MatcherModel, ScoreDistribution, dict]:
    """Train (or instantiate) the name classifier and fit the empirical
    score distribution on a development simulation."""
    opts = {"n_nonmatch_name_pairs": 20_000, "n_nonmatch_score_pairs": 50_000,
            "dev_fraction": 0.4, "penalty": 1e-6, "bins": 200}
    opts.update(train_opts or {})
    seeds = np.random.SeedSequence(seed).spawn(3)
    dev_cfg = SimConfig.from_dict({**sim_params, "seed": _seed_of(seeds[0])})
    sim = generate_pair_files(dev_cfg, name_model)
    rng = np.random.Generator(np.random.PCG64(seeds[1]))
    names_a, names_b = sim.records_a["name"], sim.records_b["name"]
    ta, tb = sim.truth[:, 0], sim.truth[:, 1]

    info: dict = {"dev_sim_records": dev_cfg.n_records}
    if classifier.startswith("single:"):
        spec = FeatureSpec.from_name(classifier.split(":", 1)[1])
        model = MatcherModel.single_feature(spec)
    elif classifier == "logistic:train":
        pos_pairs = [(names_a[i], names_b[j]) for i, j in zip(ta, tb)
                     if names_a[i] != names_b[j]]
        n_neg = int(opts["n_nonmatch_name_pairs"])
        neg_i = rng.integers(sim.truth.shape[0], size=n_neg)
        neg_j = rng.integers(len(names_b), size=n_neg)
        ok = tb[neg_i] != neg_j
        neg_pairs = [(names_a[ta[i]], names_b[j])
                     for i, j in zip(neg_i[ok], neg_j[ok])]
        featurizer = PairFeaturizer(bundle.tables, bundle.freq, bundle.surnames)
        pairs = pos_pairs + neg_pairs
        y = np.concatenate([np.ones(len(pos_pairs)), np.zeros(len(neg_pairs))])
        X, cats = featurizer.feature_matrix(pairs)
        order = rng.permutation(len(pairs))
        X, cats, y = X[order], cats[order], y[order]
        n_dev = int(len(pairs) * float(opts["dev_fraction"]))
        dev = (X[:n_dev], cats[:n_dev], y[:n_dev])
        train = (X[n_dev:], cats[n_dev:], y[n_dev:])
        model = train_matcher(train, dev, featurizer.specs,
                              penalty=float(opts["penalty"]))
        info["n_train_pairs"] = len(pairs) - n_dev
        info["n_dev_pairs"] = n_dev
        info["n_selected_features"] = len(model.specs)
    elif classifier.startswith("logistic:"):
        model = MatcherModel.load(classifier.split(":", 1)[1])
    else:
        raise ValueError(f"classifier {classifier!r} cannot be trained here")

    scorer = NamePairScorer(model, PairFeaturizer(bundle.tables, bundle.freq,
                                                  bundle.surnames, specs=model.specs))
    match_pairs = [(names_a[i], names_b[j]) for i, j in zip(ta, tb)]
    n_u = int(opts["n_nonmatch_score_pairs"])
    u_i = rng.integers(len(names_a), size=n_u)
    u_j = rng.integers(len(names_b), size=n_u)
    b_of_a = np.full(len(names_a), -1, dtype=np.int64)
    b_of_a[ta] = tb
    ok = b_of_a[u_i] != u_j
    nonmatch_pairs = [(names_a[i], names_b[j]) for i, j in zip(u_i[ok], u_j[ok])]
    scores = scorer.scores(match_pairs + nonmatch_pairs)
    labels = np.concatenate([np.ones(len(match_pairs)), np.zeros(len(nonmatch_pairs))])
    dist = fit_score_distributions(scores, labels, bins=int(opts["bins"]))
    info["n_dist_match"] = len(match_pairs)
    info["n_dist_nonmatch"] = len(nonmatch_pairs)
    return model, dist, info


def run_replicate(bundle: AssetBundle, name_model, sim_params: dict, rep_seed: int,
                  methods: tuple[str, ...], model: MatcherModel | None,
                  dist: ScoreDistribution | None, fields: tuple[str, ...],
                  floor: float, candidate_floor: float,
                  q: float | None) -> dict[str, dict]:
    cfg = SimConfig.from_dict({**sim_params, "seed": rep_seed})
    sim = generate_pair_files(cfg, name_model)
    dataset = LinkageDataset(sim.records_a, sim.records_b, sim.truth, fields)
    scorer = None
    if model is not None:
        scorer = NamePairScorer(model, PairFeaturizer(bundle.tables, bundle.freq,
                                                      bundle.surnames,
                                                      specs=model.specs))
    return run_methods(dataset, methods, scorer=scorer, dist=dist, floor=floor,
                       candidate_floor=candidate_floor, q=q)


_G: dict = {}


def _init_worker(assets_dir):
    _G["bundle"] = load_bundle(assets_dir)
    _G["name_model"] = build_name_model(_G["bundle"].corpus, _G["bundle"].tables)


def _replicate_task(args):
    sim_params, rep_seed, methods, model_dict, dist_dict, fields, floor, cand, q = args
    model = MatcherModel.from_dict(model_dict) if model_dict else None
    dist = ScoreDistribution.from_dict(dist_dict) if dist_dict else None
    return run_methods_on_new_sim(_G["bundle"], _G["name_model"], sim_params,
                                  rep_seed, methods, model, dist, fields, floor,
                                  cand, q)


def run_methods_on_new_sim(bundle, name_model, sim_params, rep_seed, methods,
                           model, dist, fields, floor, cand, q):
    return run_replicate(bundle, name_model, sim_params, rep_seed, tuple(methods),
                         model, dist, tuple(fields), floor, cand, q)


def run_study(config: dict, assets_dir=None, workers: int = 1) -> dict:
    """Replicated simulation study: train once, then run every replicate
    through every requested method. Deterministic given config['seed']."""
    bundle = load_bundle(config.get("assets_dir", assets_dir))
    name_model = build_name_model(bundle.corpus, bundle.tables)
    sim_params = dict(config.get("simulate", {}))
    sim_params.pop("seed", None)
    methods = tuple(config.get("methods", DEFAULT_METHODS))
    classifier = config.get("classifier", "logistic:train")
    floor = float(config.get("floor", DEFAULT_POSTERIOR_FLOOR))
    cand = float(config.get("candidate_floor", DEFAULT_CANDIDATE_FLOOR))
    q = config.get("q")
    replicates = int(config.get("replicates", 1))
    seed = int(config.get("seed", 0))
    fields = tuple(config.get("fields", ("name",) + tuple(
        sim_params.get("fields", ("sex", "yob", "mob", "dob", "loc")))))

    seeds = np.random.SeedSequence(seed)
    train_seed = _seed_of(seeds.spawn(1)[0])
    model = dist = None
    train_info: dict = {}
    if any(m != "exact" for m in methods):
        model, dist, train_info = train_matcher_and_dist(
            bundle, name_model, sim_params, train_seed, classifier,
            config.get("train"))
    rep_seeds = [_seed_of(s)
                 for s in np.random.SeedSequence(seed).spawn(replicates + 1)[1:]]

    results: list[dict] = []
    if workers > 1 and replicates > 1:
        model_dict = model.to_dict() if model else None
        dist_dict = dist.to_dict() if dist else None
        tasks = [(sim_params, rs, methods, model_dict, dist_dict, fields, floor,
                  cand, q) for rs in rep_seeds]
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker,
                initargs=(config.get("assets_dir", assets_dir),)) as pool:
            results = list(pool.map(_replicate_task, tasks))
    else:
        for rs in rep_seeds:
            results.append(run_replicate(bundle, name_model, sim_params, rs,
                                         methods, model, dist, fields, floor,
                                         cand, q))

    summary: dict[str, dict] = {}
    for method in methods:
        rows = [r[method] for r in results]
        summary[method] = {
            key: float(np.mean([row[key] for row in rows]))
            for key in ("auroc", "eauroc", "neg_log_lik", "fn_true_pm",
                        "fp_true_pm", "fn_est_pm", "fp_est_pm", "pi_m_est")
        }
        summary[method]["mean_misclass_est_pm"] = float(np.mean(
            [row["fn_est_pm"] + row["fp_est_pm"] for row in rows]))
        summary[method]["mean_misclass_true_pm"] = float(np.mean(
            [row["fn_true_pm"] + row["fp_true_pm"] for row in rows]))
    return {
        "config": config,
        "train_info": train_info,
        "model": model.to_dict() if model else None,
        "dist_summary": {"ratio_max": dist.ratio_max} if dist else None,
        "replicates": results,
        "summary": summary,
    }
