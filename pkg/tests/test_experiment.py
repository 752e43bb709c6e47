import numpy as np
import pytest

from hanlink import experiment as exp
from hanlink.compare import FeatureSpec, PairFeaturizer
from hanlink.linkage import tabulate_patterns
from hanlink.matcher import MatcherModel, fit_score_distributions
from hanlink.simgen import SimConfig, generate_pair_files

FIELDS = ("name", "sex", "yob", "mob", "dob", "loc")


@pytest.fixture(scope="module")
def small_sim(name_model):
    cfg = SimConfig(n_records=300, name_error_rate=0.2, seed=21)
    return generate_pair_files(cfg, name_model)


@pytest.fixture(scope="module")
def dataset(small_sim):
    return exp.LinkageDataset(small_sim.records_a, small_sim.records_b,
                              small_sim.truth, FIELDS)


def test_dataset_tabulate_matches_library(small_sim, dataset):
    table, pos = dataset.tabulate()
    reference = tabulate_patterns(small_sim.records_a, small_sim.records_b, FIELDS)
    got = {tuple(map(int, g)): int(c) for g, c in zip(table.gammas, table.counts)}
    want = {tuple(map(int, g)): int(c)
            for g, c in zip(reference.gammas, reference.counts)}
    assert got == want
    assert pos.sum() == len(small_sim.truth)
    assert np.all(pos <= table.counts)


def test_candidate_pairs_exhaustive(dataset):
    table, _ = dataset.tabulate()
    codes = table.codes()
    wanted = codes[:3]
    ii, jj, cc = dataset.candidate_pairs(wanted)
    wanted_set = set(int(c) for c in wanted)
    assert all(int(c) in wanted_set for c in cc)
    # spot-check counts against the table
    for code in wanted_set:
        row = int(np.nonzero(codes == code)[0][0])
        assert int((cc == code).sum()) == int(table.counts[row])


def test_exact_zero_error_perfect(name_model, bundle):
    cfg = SimConfig(n_records=200, name_error_rate=0.0,
                    field_error_rates={f: 0.0 for f in
                                       ("sex", "yob", "mob", "dob", "loc")},
                    seed=22)
    sim = generate_pair_files(cfg, name_model)
    dataset = exp.LinkageDataset(sim.records_a, sim.records_b, sim.truth, FIELDS)
    reports = exp.run_methods(dataset, ("exact",))
    assert reports["exact"]["fn_true_pm"] == 0.0
    assert reports["exact"]["fp_true_pm"] == 0.0


def make_scorer_and_dist(bundle, model_specs, sim, seed=0):
    spec = FeatureSpec.from_name("PY_COS_k3_1:N")
    model = MatcherModel.single_feature(spec)
    featurizer = PairFeaturizer(bundle.tables, bundle.freq, bundle.surnames,
                                specs=model.specs)
    scorer = exp.NamePairScorer(model, featurizer)
    rng = np.random.default_rng(seed)
    names_a, names_b = sim.records_a["name"], sim.records_b["name"]
    ta, tb = sim.truth[:, 0], sim.truth[:, 1]
    match_pairs = [(names_a[i], names_b[j]) for i, j in zip(ta, tb)]
    u_i = rng.integers(len(names_a), size=2000)
    u_j = rng.integers(len(names_b), size=2000)
    b_of_a = np.full(len(names_a), -1)
    b_of_a[ta] = tb
    keep = b_of_a[u_i] != u_j
    nonmatch = [(names_a[i], names_b[j]) for i, j in zip(u_i[keep], u_j[keep])]
    scores = scorer.scores(match_pairs + nonmatch)
    labels = np.concatenate([np.ones(len(match_pairs)), np.zeros(len(nonmatch))])
    dist = fit_score_distributions(scores, labels)
    return scorer, dist


def test_posterior_uninformative_matches_exact(bundle, small_sim, dataset):
    scorer, dist = make_scorer_and_dist(bundle, None, small_sim)
    dist.ratio[:] = 1.0  # uninformative likelihood ratio
    reports = exp.run_methods(dataset, ("exact", "posterior"), scorer=scorer,
                              dist=dist, floor=0.1, candidate_floor=0.1)
    exact, post = reports["exact"], reports["posterior"]
    for key in ("auroc", "eauroc", "neg_log_lik", "fn_true_pm", "fp_true_pm",
                "fn_est_pm", "fp_est_pm", "pi_m_est"):
        assert post[key] == pytest.approx(exact[key], rel=1e-9, abs=1e-9), key


def test_all_methods_run_and_improve(bundle, small_sim, dataset):
    scorer, dist = make_scorer_and_dist(bundle, None, small_sim)
    reports = exp.run_methods(dataset, ("exact", "tau1", "tau2", "posterior"),
                              scorer=scorer, dist=dist)
    assert set(reports) == {"exact", "tau1", "tau2", "posterior"}
    for method in ("tau1", "tau2", "posterior"):
        assert reports[method]["eauroc"] >= reports["exact"]["eauroc"] - 0.02
    assert reports["posterior"]["neg_log_lik"] <= reports["exact"]["neg_log_lik"]


def test_threshold_move_matches_apply_threshold(bundle, small_sim, dataset):
    """The harness's vectorized pair move equals fuse.apply_threshold."""
    from hanlink.fuse import apply_threshold
    from hanlink.linkage import em_fit, zeta
    scorer, dist = make_scorer_and_dist(bundle, None, small_sim)
    table, pos = dataset.tabulate()
    model = em_fit(table)
    z = zeta(model, table)
    codes = table.codes()
    code_to_row = {int(c): r for r, c in enumerate(codes)}
    donor_rows = np.nonzero(table.gammas[:, 0] == 0)[0]
    ii, jj, cc = dataset.candidate_pairs(codes[donor_rows])
    rows = np.array([code_to_row[int(c)] for c in cc])
    labels = dataset.truth_b_of_a[ii] == jj
    scores = scorer.scores([(dataset.names_a[i], dataset.names_b[j])
                            for i, j in zip(ii, jj)])
    tau = 0.5
    new_table, new_pos = exp._moved_table(table, pos, dataset.name_ix, rows,
                                          scores >= tau, labels)
    by_row = {int(r): scores[rows == r] for r in np.unique(rows)}
    ref_table, _ = apply_threshold(tau, table, by_row, strict=True)
    got = {tuple(map(int, g)): int(c)
           for g, c in zip(new_table.gammas, new_table.counts)}
    want = {tuple(map(int, g)): int(c)
            for g, c in zip(ref_table.gammas, ref_table.counts)}
    assert got == want
    assert new_pos.sum() == pos.sum()


def test_external_scorer():
    scorer = exp.ExternalScorer({("a", "b"): 0.7})
    assert scorer.scores([("a", "b")])[0] == 0.7
    with pytest.raises(ValueError):
        scorer.scores([("a", "c")])


def test_run_study_smoke_and_determinism(bundle):
    config = {
        "seed": 5,
        "simulate": {"n_records": 250, "name_error_rate": 0.2},
        "replicates": 2,
        "methods": ["exact", "posterior"],
        "classifier": "single:PY_COS_k3_1:N",
        "train": {"n_nonmatch_score_pairs": 3000},
    }
    r1 = exp.run_study(config)
    r2 = exp.run_study(config)
    assert r1["summary"] == r2["summary"]
    assert r1["replicates"] == r2["replicates"]
    assert set(r1["summary"]) == {"exact", "posterior"}


def test_run_study_worker_count_invariance(bundle):
    config = {
        "seed": 6,
        "simulate": {"n_records": 200, "name_error_rate": 0.2},
        "replicates": 2,
        "methods": ["exact", "posterior"],
        "classifier": "single:PY_COS_k3_1:N",
        "train": {"n_nonmatch_score_pairs": 2000},
    }
    serial = exp.run_study(config, workers=1)
    parallel = exp.run_study(config, workers=2)
    assert serial["replicates"] == parallel["replicates"]
