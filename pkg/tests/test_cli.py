import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from hanlink.cli import main


def sha256_dir(path: Path) -> dict:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(path.iterdir()) if p.is_file()}


def write_pairs_csv(path: Path, rows, header=("name_a", "name_b", "label")):
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def test_features_shape(tmp_path):
    pairs = tmp_path / "pairs.csv"
    write_pairs_csv(pairs, [("伍考", "伍考", 1),
                            ("张可成", "阳娅", 0)])
    out = tmp_path / "features.csv"
    assert main(["features", "--in", str(pairs), "--out", str(out)]) == 0
    with out.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) == 3
    assert len(rows[0]) == 146 + 2
    assert rows[0][-2:] == ["han_category", "label"]


def test_features_missing_header(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    write_pairs_csv(bad, [("a", "b")], header=("name_a", "name_x"))
    assert main(["features", "--in", str(bad), "--out",
                 str(tmp_path / "o.csv")]) == 2
    assert "name_b" in capsys.readouterr().err


def test_features_reproduce_table1_column(tmp_path):
    pairs = tmp_path / "pairs.csv"
    write_pairs_csv(pairs, [
        ("万只子", "万只只子", 1),
        ("张可成", "张珂成", 1),
        ("谯科江", "谯江科", 1),
        ("阳娅", "阳女亚", 1),
    ])
    out = tmp_path / "features.csv"
    assert main(["features", "--in", str(pairs), "--out", str(out)]) == 0
    with out.open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        col = header.index("J_LV_k1_1:N")
        values = [float(row[col]) for row in reader]
    assert values == pytest.approx([0.75, 2 / 3, 1 / 3, 1 / 3])


def test_train_and_fitdist_and_evaluate(tmp_path, name_model, bundle):
    from hanlink.simgen import SimConfig, generate_pair_files
    rng = np.random.default_rng(0)
    sim = generate_pair_files(SimConfig(n_records=250, name_error_rate=0.5,
                                        seed=31), name_model)
    names_a, names_b = sim.records_a["name"], sim.records_b["name"]
    rows = []
    for i, j in sim.truth:
        if names_a[i] != names_b[j]:
            rows.append((names_a[i], names_b[j], 1))
    for _ in range(600):
        i = rng.integers(250)
        j = rng.integers(250)
        if sim.truth[i][1] != j:
            rows.append((names_a[i], names_b[j], 0))
    pairs = tmp_path / "pairs.csv"
    write_pairs_csv(pairs, rows)
    features = tmp_path / "features.csv"
    assert main(["features", "--in", str(pairs), "--out", str(features)]) == 0

    model_path = tmp_path / "model.json"
    assert main(["train", "--in", str(features), "--out", str(model_path),
                 "--seed", "1"]) == 0
    model = json.loads(model_path.read_text())
    assert model["kind"] == "logistic"
    assert set(model["coefficients"]) == {"BothHan", "NeitherHan", "Disagreeing"}

    dist_path = tmp_path / "dist.json"
    assert main(["fitdist", "--in", str(pairs), "--model", str(model_path),
                 "--out", str(dist_path)]) == 0
    dist = json.loads(dist_path.read_text())
    ratio = np.array(dist["ratio"])
    assert np.all(np.diff(ratio) >= -1e-12)

    scores = tmp_path / "scores.csv"
    write_pairs_csv(scores, [(0.9, 1), (0.8, 1), (0.2, 0), (0.1, 0)],
                    header=("score", "label"))
    out_json = tmp_path / "eval.json"
    assert main(["evaluate", "--in", str(scores), "--out", str(out_json)]) == 0
    report = json.loads(out_json.read_text())
    assert report["auroc"] == 1.0


def test_fitdist_separated_toy_scores(tmp_path):
    scores = tmp_path / "toy.csv"
    write_pairs_csv(scores, [(0.95, 1)] * 20 + [(0.05, 0)] * 20,
                    header=("score", "label"))
    out = tmp_path / "dist.json"
    assert main(["fitdist", "--in", str(scores), "--out", str(out)]) == 0
    from hanlink.matcher import ScoreDistribution
    dist = ScoreDistribution.load(out)  # load validates monotone ratio
    assert dist.ratio_max > 1.0


def test_simulate_reproducible(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"n_records": 120, "name_error_rate": 0.1,
                               "seed": 77}))
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
    assert sha256_dir(out1) == sha256_dir(out2)
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"file_a.csv", "file_b.csv", "truth.csv"}


def test_simulate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"name_error_rate": 7}))
    assert main(["simulate", "--config", str(cfg),
                 "--out", str(tmp_path / "x")]) == 2


def test_experiment_files_mode(tmp_path, name_model):
    from hanlink.linkage import write_records
    from hanlink.simgen import SimConfig, generate_pair_files, write_truth
    sim = generate_pair_files(SimConfig(n_records=150, name_error_rate=0.1,
                                        seed=41), name_model)
    write_records(tmp_path / "a.csv", sim.records_a)
    write_records(tmp_path / "b.csv", sim.records_b)
    write_truth(tmp_path / "truth.csv", sim.truth)
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "data": {"file_a": str(tmp_path / "a.csv"),
                 "file_b": str(tmp_path / "b.csv"),
                 "truth": str(tmp_path / "truth.csv")},
        "methods": ["exact"],
    }))
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert "exact" in report["reports"]
    assert report["reports"]["exact"]["pi_m_true"] == pytest.approx(1 / 150)


def test_experiment_requires_dist_for_fusion(tmp_path, name_model):
    from hanlink.linkage import write_records
    from hanlink.simgen import SimConfig, generate_pair_files, write_truth
    sim = generate_pair_files(SimConfig(n_records=50, seed=42), name_model)
    write_records(tmp_path / "a.csv", sim.records_a)
    write_records(tmp_path / "b.csv", sim.records_b)
    write_truth(tmp_path / "truth.csv", sim.truth)
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "data": {"file_a": str(tmp_path / "a.csv"),
                 "file_b": str(tmp_path / "b.csv"),
                 "truth": str(tmp_path / "truth.csv")},
        "methods": ["posterior"],
        "classifier": "single:PY_COS_k3_1:N",
    }))
    assert main(["experiment", "--config", str(cfg),
                 "--out", str(tmp_path / "r")]) == 2


def test_experiment_external_scores(tmp_path, name_model):
    from hanlink.linkage import write_records
    from hanlink.simgen import SimConfig, generate_pair_files, write_truth
    sim = generate_pair_files(SimConfig(n_records=120, name_error_rate=0.3,
                                        seed=43), name_model)
    write_records(tmp_path / "a.csv", sim.records_a)
    write_records(tmp_path / "b.csv", sim.records_b)
    write_truth(tmp_path / "truth.csv", sim.truth)
    # external score source: 1.0 for true pairs, 0.0 otherwise, all pairs listed
    ext = tmp_path / "ext.csv"
    b_of_a = {int(i): int(j) for i, j in sim.truth}
    with ext.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["name_a", "name_b", "score"])
        seen = set()
        for i in range(120):
            for j in range(120):
                key = (sim.records_a["name"][i], sim.records_b["name"][j])
                if key in seen:
                    continue
                seen.add(key)
                writer.writerow([key[0], key[1],
                                 0.99 if b_of_a[i] == j else 0.01])
    toy = tmp_path / "toy_scores.csv"
    write_pairs_csv(toy, [(0.99, 1)] * 30 + [(0.01, 0)] * 30,
                    header=("score", "label"))
    dist = tmp_path / "dist.json"
    assert main(["fitdist", "--in", str(toy), "--out", str(dist)]) == 0
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "data": {"file_a": str(tmp_path / "a.csv"),
                 "file_b": str(tmp_path / "b.csv"),
                 "truth": str(tmp_path / "truth.csv")},
        "methods": ["exact", "posterior"],
        "classifier": f"external-scores:{ext}",
        "dist": str(dist),
    }))
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["reports"]["posterior"]["neg_log_lik"] <= \
        report["reports"]["exact"]["neg_log_lik"] + 1e-9


def test_experiment_study_reproducible(tmp_path):
    cfg = tmp_path / "study.json"
    cfg.write_text(json.dumps({
        "seed": 3,
        "simulate": {"n_records": 150, "name_error_rate": 0.2},
        "replicates": 1,
        "methods": ["exact", "posterior"],
        "classifier": "single:PY_COS_k3_1:N",
        "train": {"n_nonmatch_score_pairs": 1500},
    }))
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["experiment", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["experiment", "--config", str(cfg), "--out", str(out2)]) == 0
    assert sha256_dir(out1) == sha256_dir(out2)
