import json

import numpy as np
import pytest

import oracles as oc
from prodscreen import AtomicMatrix, PenaltySchedule, PrimalModel, predict
from prodscreen.cli import main
from prodscreen.data import load_dense, load_transactions
from prodscreen.solver import LOG_HEADER


def _synth_csv(tmp_path, kind="logistic", n=80, d=8, tasks=1, seed=7):
    out = tmp_path / "data"
    code = main(["synth", "--kind", kind, "--n", str(n), "--d", str(d),
                 "--planted", "0,1:6;3:5", "--noise", "0.02",
                 "--tasks", str(tasks), "--seed", str(seed), "--out", str(out)])
    assert code == 0
    return out / ("data.txt" if kind == "basket" else "data.csv"), out / "truth.json"


def test_synth_writes_expected_files(tmp_path, capsys):
    data, truth = _synth_csv(tmp_path)
    assert "truth.json" in capsys.readouterr().out
    header = data.read_text().splitlines()[0].split(",")
    assert header == [f"x{j}" for j in range(8)] + ["y0"]
    meta = json.loads(truth.read_text())
    assert meta["kind"] == "logistic"
    assert [p["atoms"] for p in meta["planted"]] == [[0, 1], [3]]
    assert [p["weight"] for p in meta["planted"]] == [6.0, 5.0]


def test_fit_logistic_path_end_to_end(tmp_path, capsys):
    data, _ = _synth_csv(tmp_path)
    fit = tmp_path / "fit"
    code = main(["fit-logistic", "--data", str(data), "--format", "csv",
                 "--path", "--n-lambdas", "6", "--min-ratio", "0.05",
                 "--penalty", "geo:1.5", "--out", str(fit)])
    assert code == 0
    assert "path: 6 levels" in capsys.readouterr().out

    model = PrimalModel.load(fit / "model.json")
    assert model.kind == "logistic"
    assert model.n_active > 0

    lines = (fit / "interactions.jsonl").read_text().splitlines()
    for line in lines:
        rec = json.loads(line)
        assert set(rec) == {"atoms", "items", "stat", "threshold"}
        assert rec["stat"] > rec["threshold"]
        assert rec["items"] == [f"x{a}" for a in rec["atoms"]]

    log = (fit / "log.tsv").read_text().splitlines()
    assert log[0].split("\t") == list(LOG_HEADER)
    assert len(log) > 1

    path_rows = [r.split("\t") for r in (fit / "path.tsv").read_text().splitlines()]
    assert path_rows[0][0] == "lambda"
    assert len(path_rows) == 7
    lams = [float(r[0]) for r in path_rows[1:]]
    assert lams == sorted(lams, reverse=True)
    assert all(r[6] == "1" for r in path_rows[1:])  # converged flag


def test_fit_basket_transactions(tmp_path, capsys):
    trans = tmp_path / "trans.txt"
    trans.write_text("milk bread eggs\nbread eggs\nmilk eggs\nbread\nmilk bread eggs\n"
                     "eggs milk\nbread eggs milk\n")
    fit = tmp_path / "fit"
    code = main(["fit-basket", "--data", str(trans), "--lambda", "1.0",
                 "--tau", "2.0", "--out", str(fit)])
    assert code == 0
    out = capsys.readouterr().out
    assert "lambda 1" in out and "converged" in out

    items = json.loads((fit / "items.json").read_text())
    assert items == {"0": "milk", "1": "bread", "2": "eggs"}
    model = PrimalModel.load(fit / "model.json")
    assert model.kind == "basket"
    assert model.n_active > 0
    # named interactions in the screen report use the item tokens
    recs = [json.loads(l) for l in (fit / "interactions.jsonl").read_text().splitlines()]
    names = {items[str(a)] for rec in recs for a in rec["atoms"]}
    assert names <= {"milk", "bread", "eggs"}


def test_fit_matrix_csv(tmp_path):
    data, _ = _synth_csv(tmp_path, kind="matrix", n=60, d=6, tasks=3)
    fit = tmp_path / "fit"
    code = main(["fit-matrix", "--data", str(data), "--format", "csv",
                 "--responses", "3", "--lambda", "2.0", "--rho", "0.0",
                 "--out", str(fit)])
    assert code == 0
    model = PrimalModel.load(fit / "model.json")
    assert model.kind == "matrix"
    assert model.intercept.shape == (3,)
    if model.n_active:
        assert model.coefficients.shape[1] == 3


def test_fit_flag_validation(tmp_path, capsys):
    data, _ = _synth_csv(tmp_path)
    out = tmp_path / "rejected"
    both = main(["fit-logistic", "--data", str(data), "--format", "csv",
                 "--lambda", "1.0", "--path", "--out", str(out)])
    assert both == 1
    neither = main(["fit-logistic", "--data", str(data), "--format", "csv",
                    "--out", str(out)])
    assert neither == 1
    err = capsys.readouterr().err
    assert err.count("exactly one of --lambda and --path") == 2
    # a rejected invocation must not touch the filesystem
    assert not out.exists()


def test_input_errors_exit_1(tmp_path, capsys):
    assert main(["fit-basket", "--data", str(tmp_path / "missing.txt"),
                 "--lambda", "1.0"]) == 1
    trans = tmp_path / "t.txt"
    trans.write_text("a b\nb a\n")
    assert main(["fit-basket", "--data", str(trans), "--lambda", "1.0",
                 "--penalty", "bogus:x"]) == 1
    # logistic needs a response column, which transactions cannot carry
    assert main(["fit-logistic", "--data", str(trans), "--lambda", "1.0"]) == 1
    dup = tmp_path / "dup.txt"
    dup.write_text("a a b\n")
    assert main(["fit-basket", "--data", str(dup), "--lambda", "1.0"]) == 1
    err = capsys.readouterr().err
    assert "duplicate item" in err
    assert err.count("error:") == 4


def test_unknown_command_and_help(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["--help"]) == 0
    assert main(["fit-basket"]) == 1  # --data is required
    capsys.readouterr()


def test_screen_matches_enumeration(tmp_path, capsys):
    rng = np.random.default_rng(13)
    d, n = 5, 14
    X = (rng.random((n, d)) < 0.45).astype(float)
    X[0] = 1.0  # first row lists every item, pinning first-seen column order
    trans = tmp_path / "trans.txt"
    trans.write_text("\n".join(
        " ".join(str(j) for j in range(d) if X[i, j]) for i in range(n)) + "\n")
    alpha = rng.standard_normal(n)
    alpha_file = tmp_path / "alpha.txt"
    np.savetxt(alpha_file, alpha)

    lam = 1.2
    out = tmp_path / "screened"
    code = main(["screen", "--data", str(trans), "--alpha", str(alpha_file),
                 "--lambda", str(lam), "--penalty", "geo:1.4",
                 "--mode", "signed", "--out", str(out)])
    assert code == 0
    assert "emitted" in capsys.readouterr().err

    got = [tuple(json.loads(l)["atoms"])
           for l in (out / "interactions.jsonl").read_text().splitlines()]
    subsets, P = oc.materialize(X)
    sched = PenaltySchedule.geometric(lam, 1.4)
    stats = oc.enumerate_stats(P, alpha, "signed")
    want = [u for u, s in zip(subsets, stats) if s > sched.threshold(len(u))]
    assert sorted(got) == sorted(want)


def test_screen_without_out_prints_jsonl(tmp_path, capsys):
    trans = tmp_path / "t.txt"
    trans.write_text("a b\na\nb\n")
    alpha_file = tmp_path / "alpha.txt"
    np.savetxt(alpha_file, np.array([1.0, 1.0, -0.5]))
    assert main(["screen", "--data", str(trans), "--alpha", str(alpha_file),
                 "--lambda", "0.4", "--mode", "signed"]) == 0
    out = capsys.readouterr().out
    recs = [json.loads(l) for l in out.strip().splitlines()]
    assert all({"atoms", "items", "stat", "threshold"} == set(r) for r in recs)
    # output is sorted by atom tuple
    assert [r["items"] for r in recs] == [["a"], ["a", "b"], ["b"]]


def test_predict_cli_roundtrip(tmp_path, capsys):
    data, _ = _synth_csv(tmp_path)
    fit = tmp_path / "fit"
    assert main(["fit-logistic", "--data", str(data), "--format", "csv",
                 "--path", "--n-lambdas", "5", "--min-ratio", "0.05",
                 "--out", str(fit)]) == 0
    capsys.readouterr()
    assert main(["predict", "--model", str(fit / "model.json"),
                 "--data", str(data), "--format", "csv"]) == 0
    got = np.array([float(v) for v in capsys.readouterr().out.split()])
    A, _ = load_dense(data, 1)
    model = PrimalModel.load(fit / "model.json")
    assert np.allclose(got, predict(model, A), atol=1e-9)


def test_dedup_writes_kept_columns(tmp_path, capsys):
    trans = tmp_path / "t.txt"
    # b duplicates a exactly; c is distinct
    trans.write_text("a b\na b c\nc\na b\na b c\nc\na b c\n")
    fit = tmp_path / "fit"
    code = main(["fit-basket", "--data", str(trans), "--lambda", "0.5",
                 "--tau", "2.0", "--dedup", "0.99", "--out", str(fit)])
    assert code == 0
    assert "kept 2 of 3" in capsys.readouterr().err
    kept = json.loads((fit / "kept_columns.json").read_text())
    assert kept == [0, 2]


def test_thread_cap_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FCK_THREADS", "zilch")
    assert main(["synth", "--n", "10", "--d", "3", "--out", str(tmp_path)]) == 1
    assert "FCK_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("FCK_THREADS", "1")
    assert main(["synth", "--n", "10", "--d", "3", "--out", str(tmp_path)]) == 0


def test_basket_synth_roundtrips_through_transactions(tmp_path):
    data, truth = _synth_csv(tmp_path, kind="basket", n=50, d=6)
    A = load_transactions(data)
    assert A.n_rows == 50
    assert A.n_cols <= 6
    fit = tmp_path / "fit"
    code = main(["fit-basket", "--data", str(data), "--lambda", "3.0",
                 "--tau", "2.0", "--out", str(fit)])
    assert code in (0, 2)
    assert (fit / "model.json").exists()
