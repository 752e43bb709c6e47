import numpy as np
import pytest

from hanlink.linkage import (
    NA,
    LinkageModel,
    PatternTable,
    em_fit,
    read_records,
    tabulate_patterns,
    write_records,
    zeta,
    zeta_for_gammas,
)


def make_records(rows):
    fields = ("name", "sex", "yob", "mob", "dob", "loc")
    return {f: [row.get(f, "") for row in rows] for f in fields}


def brute_force_patterns(recs_a, recs_b, fields):
    from collections import Counter
    counts = Counter()
    n_a = len(recs_a[fields[0]])
    n_b = len(recs_b[fields[0]])
    for i in range(n_a):
        for j in range(n_b):
            gamma = []
            for f in fields:
                a, b = recs_a[f][i], recs_b[f][j]
                if a == "" or b == "":
                    gamma.append(NA)
                else:
                    gamma.append(1 if a == b else 0)
            counts[tuple(gamma)] += 1
    return counts


def test_tabulate_single_pair_all_equal():
    rec = {"name": ["张三"], "sex": ["1"], "yob": ["1980"],
           "mob": ["1"], "dob": ["2"], "loc": ["L1"]}
    table = tabulate_patterns(rec, rec)
    assert len(table.counts) == 1
    assert table.counts[0] == 1
    assert list(table.gammas[0]) == [1] * 6


def test_tabulate_counting_identity():
    recs_a = make_records([{"name": "a"}, {"name": "b"}])
    recs_b = make_records([{"name": "a"}, {"name": "c"}])
    table = tabulate_patterns(recs_a, recs_b, fields=("name",))
    assert table.total == 4
    assert len(table.counts) <= 3


def test_tabulate_matches_brute_force():
    rng = np.random.default_rng(0)
    def random_records(n):
        rows = []
        for _ in range(n):
            rows.append({
                "name": rng.choice(["a", "b", "c", "d", ""]),
                "sex": rng.choice(["1", "2", ""]),
                "yob": str(rng.integers(1, 4)),
                "mob": rng.choice(["1", "2"]),
                "dob": rng.choice(["1", "2", "3"]),
                "loc": rng.choice(["x", "y", ""]),
            })
        return make_records(rows)
    recs_a = random_records(100)
    recs_b = random_records(100)
    fields = ("name", "sex", "yob", "mob", "dob", "loc")
    table = tabulate_patterns(recs_a, recs_b, fields)
    expected = brute_force_patterns(recs_a, recs_b, fields)
    got = {tuple(int(g) for g in table.gammas[j]): int(table.counts[j])
           for j in range(len(table.counts))}
    assert got == dict(expected)
    assert table.total == 100 * 100


def test_tabulate_unknown_field():
    recs = make_records([{"name": "a"}])
    with pytest.raises(ValueError):
        tabulate_patterns(recs, recs, fields=("name", "nope"))


def test_tabulate_permutation_invariance():
    rng = np.random.default_rng(1)
    rows = [{"name": rng.choice(["a", "b", "c"]), "sex": rng.choice(["1", "2"])}
            for _ in range(40)]
    recs = make_records(rows)
    perm = rng.permutation(40)
    shuffled = {f: [recs[f][i] for i in perm] for f in recs}
    t1 = tabulate_patterns(recs, recs, fields=("name", "sex"))
    t2 = tabulate_patterns(shuffled, recs, fields=("name", "sex"))
    g1 = {tuple(map(int, g)): int(c) for g, c in zip(t1.gammas, t1.counts)}
    g2 = {tuple(map(int, g)): int(c) for g, c in zip(t2.gammas, t2.counts)}
    assert g1 == g2


def sample_table(pi_m, p_m, p_u, n_pairs, rng):
    """Exact multinomial sampling from the conditional-independence model."""
    F = len(p_m)
    gammas = np.array([[(code >> f) & 1 for f in range(F)]
                       for code in range(2 ** F)], dtype=np.int8)
    def probs(p):
        out = np.ones(2 ** F)
        for f in range(F):
            out *= np.where(gammas[:, f] == 1, p[f], 1 - p[f])
        return out
    mix = pi_m * probs(p_m) + (1 - pi_m) * probs(p_u)
    counts = rng.multinomial(n_pairs, mix)
    keep = counts > 0
    return PatternTable(fields=tuple(f"f{f}" for f in range(F)),
                        gammas=gammas[keep], counts=counts[keep])


def test_em_recovers_parameters():
    rng = np.random.default_rng(2)
    p_m = np.array([0.95, 0.9, 0.85])
    p_u = np.array([0.02, 0.04, 0.06])
    table = sample_table(0.01, p_m, p_u, 1_000_000, rng)
    model = em_fit(table, tol=1e-13, max_iter=50_000)
    assert model.converged
    assert abs(model.pi_m - 0.01) / 0.01 < 0.10
    assert np.all(np.abs(model.p_m - p_m) < 0.02)
    assert np.all(np.abs(model.p_u - p_u) < 0.02)


def test_em_perfect_field():
    # one field agrees iff the pair matches
    gammas = np.array([[1, 1], [1, 0], [0, 1], [0, 0]], dtype=np.int8)
    counts = np.array([900, 100, 4000, 95000])
    table = PatternTable(fields=("name", "sex"), gammas=gammas, counts=counts)
    model = em_fit(table)
    assert model.p_m[0] > 0.95
    assert model.p_u[0] < 0.05


def test_em_loglik_monotone_trace():
    rng = np.random.default_rng(3)
    table = sample_table(0.05, [0.9, 0.8, 0.7], [0.3, 0.2, 0.1], 50_000, rng)
    model = em_fit(table)
    trace = np.array(model.loglik_trace)
    assert np.all(np.diff(trace) >= -1e-6 * (np.abs(trace[:-1]) + 1))


def test_em_init_at_truth_is_near_fixed_point():
    rng = np.random.default_rng(4)
    p_m = np.array([0.95, 0.9, 0.85])
    p_u = np.array([0.2, 0.1, 0.3])
    table = sample_table(0.01, p_m, p_u, 2_000_000, rng)
    init = LinkageModel(fields=table.fields, pi_m=0.01, p_m=p_m, p_u=p_u)
    model = em_fit(table, init=init, tol=1e-10, max_iter=1)
    trace = model.loglik_trace
    assert abs(trace[-1] - trace[0]) < 1e-3 * (abs(trace[0]) + 1)


def test_em_degenerate_table_error():
    table = PatternTable(fields=("name",), gammas=np.array([[1]], dtype=np.int8),
                         counts=np.array([10]))
    with pytest.raises(ValueError):
        em_fit(table)


def test_zeta_uninformative_pattern():
    model = LinkageModel(fields=("a", "b"), pi_m=0.3,
                         p_m=np.array([0.7, 0.5]), p_u=np.array([0.7, 0.5]))
    gammas = np.array([[1, 0]], dtype=np.int8)
    assert zeta_for_gammas(model, gammas)[0] == pytest.approx(0.3)


def test_zeta_hand_arithmetic():
    # p(gamma|M)/p(gamma|U) = 3 at pi = 0.5 -> zeta = 0.75
    model = LinkageModel(fields=("a",), pi_m=0.5,
                         p_m=np.array([0.75]), p_u=np.array([0.25]))
    gammas = np.array([[1]], dtype=np.int8)
    assert zeta_for_gammas(model, gammas)[0] == pytest.approx(0.75)


def test_zeta_all_na_gives_prior():
    model = LinkageModel(fields=("a", "b"), pi_m=0.123,
                         p_m=np.array([0.9, 0.8]), p_u=np.array([0.2, 0.3]))
    gammas = np.array([[NA, NA]], dtype=np.int8)
    assert zeta_for_gammas(model, gammas)[0] == pytest.approx(0.123)


def test_zeta_na_neutrality():
    rng = np.random.default_rng(5)
    table = sample_table(0.02, [0.9, 0.8], [0.3, 0.2], 100_000, rng)
    model = em_fit(table)
    z1 = zeta(model, table)
    gammas_ext = np.column_stack([table.gammas,
                                  np.full(len(table.counts), NA, dtype=np.int8)])
    model_ext = LinkageModel(fields=table.fields + ("extra",), pi_m=model.pi_m,
                             p_m=np.append(model.p_m, 0.5),
                             p_u=np.append(model.p_u, 0.5))
    z2 = zeta_for_gammas(model_ext, gammas_ext)
    assert z1 == pytest.approx(z2, abs=1e-12)


def test_zeta_ordering_matches_likelihood_ratio():
    rng = np.random.default_rng(6)
    table = sample_table(0.05, [0.9, 0.8, 0.6], [0.4, 0.2, 0.3], 100_000, rng)
    model = em_fit(table)
    z = zeta(model, table)
    from hanlink.linkage import _log_pattern_likelihoods
    log_m, log_u = _log_pattern_likelihoods(model, table.gammas)
    lr = log_m - log_u
    assert np.array_equal(np.argsort(z), np.argsort(lr))


def test_em_mass_conservation():
    rng = np.random.default_rng(7)
    table = sample_table(0.03, [0.95, 0.85, 0.9], [0.02, 0.04, 0.05], 500_000, rng)
    model = em_fit(table, tol=1e-14, max_iter=50_000)
    z = zeta(model, table)
    lhs = (z * table.counts).sum()
    rhs = model.pi_m * table.counts.sum()
    assert abs(lhs - rhs) / rhs < 1e-6


def test_records_roundtrip(tmp_path):
    recs = make_records([
        {"name": "张三", "sex": "1", "yob": "1980", "loc": "L001"},
        {"name": "李四", "sex": "", "yob": "1990", "dob": "5"},
    ])
    path = tmp_path / "recs.csv"
    write_records(path, recs)
    loaded = read_records(path)
    assert loaded == recs


def test_read_records_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("name,sex\nfoo,1\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_records(path)


def test_pattern_table_export(tmp_path):
    gammas = np.array([[1, NA], [0, 1]], dtype=np.int8)
    table = PatternTable(fields=("name", "sex"), gammas=gammas,
                         counts=np.array([5, 7]))
    path = tmp_path / "patterns.csv"
    table.export_csv(path, zetas=np.array([0.9, 0.1]))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "gamma_name,gamma_sex,count,zeta"
    assert lines[1] == "1,NA,5,0.9"
    assert lines[2] == "0,1,7,0.1"
