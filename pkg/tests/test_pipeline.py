import json
import os

import numpy as np
import pytest

from fairlrf import fileio, pipeline
from fairlrf.cli import main
from fairlrf.config import RunConfig
from fairlrf.errors import ConfigError
from fairlrf.metrics import FairnessReport, confusion, read_report_csv

REPORTED = ["precision_g0", "precision_g1", "recall_g0", "recall_g1", "f1_g0", "f1_g1",
            "eopp0", "eopp1", "eodd", "val_precision_avg", "val_eopp1", "val_eodd"]


def small(**kw):
    return RunConfig(**{"n": 600, "d": 6, "hidden": (8, 8), "epochs": 8, "k": 3, "scoring_size": 64, **kw})


@pytest.fixture(scope="module")
def prep():
    return pipeline.prepare(small())


def test_degenerate_chain(prep):
    cfg = small()
    vanilla = pipeline.run(cfg.replace(method="vanilla"), prep).row()
    full = pipeline.run(cfg.replace(method="truncated", k=8), prep).row()
    chain = [full] + [pipeline.run(cfg.replace(method=m, sr=0.0), prep).row() for m in ("slr_w", "slr_a", "fairlrf")]
    truncated = pipeline.run(cfg.replace(method="truncated"), prep).row()
    for key in REPORTED:
        assert abs(full[key] - vanilla[key]) <= 1e-9
        for row in chain[1:]:
            assert abs(row[key] - truncated[key]) <= 1e-9


def test_vanilla_report_fields(prep):
    rep = pipeline.run(small(method="vanilla"), prep)
    row = rep.row()
    assert row["compression_rate"] == 1.0 and row["k"] == "" and row["zeroed_count"] == 0


def test_sparsified_report_counts_zeroed_weights(prep):
    cfg = small(method="slr_w", sr=0.5, rr=0.5)
    rep = pipeline.run(cfg, prep)
    assert rep.zeroed_count == (4 + 4) * 1
    trunc = pipeline.run(cfg.replace(method="truncated"), prep)
    assert rep.compression_rate > trunc.compression_rate


def test_pretrained_model_is_not_modified(prep):
    before = fileio.encode_network(prep.base)
    pipeline.run(small(method="fairlrf", sr=0.5), prep)
    assert fileio.encode_network(prep.base) == before


def test_hessians_are_cached_across_beta(prep):
    prep.hessians.clear()
    pipeline.run(small(method="fairlrf", beta=0.2), prep)
    cached = dict(prep.hessians)
    pipeline.run(small(method="fairlrf", beta=0.9), prep)
    assert prep.hessians.keys() == cached.keys()
    assert all(prep.hessians[k] is cached[k] for k in cached)


def test_run_outputs_are_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        cfg = small(method="fairlrf", sr=0.5, out=str(tmp_path / name))
        pipeline.run(cfg)
        outs.append({f: (tmp_path / name / f).read_bytes() for f in sorted(os.listdir(tmp_path / name))})
    assert outs[0].keys() == outs[1].keys()
    assert {"report.csv", "report.txt", "plan.txt", "model.flrw", "hessian_u_hat_g0.flrm"} <= set(outs[0])
    for f in outs[0]:
        if f != "report.csv" and f != "report.txt":
            assert outs[0][f] == outs[1][f]
    # the embedded out path differs between the two runs; everything else matches
    strip = lambda b: b.replace(str(tmp_path / "a").encode(), b"").replace(str(tmp_path / "b").encode(), b"")  # noqa: E731
    assert strip(outs[0]["report.csv"]) == strip(outs[1]["report.csv"])


def test_report_is_self_describing(tmp_path):
    cfg = small(method="slr_w", sr=0.5, out=str(tmp_path))
    pipeline.run(cfg)
    text = (tmp_path / "report.csv").read_text()
    assert text.startswith("# fairlrf 0.1.0\n")
    assert "# config rr_semantics = removed" in text and "# config method = slr_w" in text
    assert "macro averages" in text
    rows = read_report_csv(text)
    assert rows[0]["method"] == "slr_w" and rows[0]["rr_semantics"] == "removed"
    assert "rr semantics: removed" in (tmp_path / "report.txt").read_text()
    assert "selected_rows_u" in (tmp_path / "plan.txt").read_text()


def test_sweep_anchor_row_and_files(tmp_path):
    cfg = small(method="slr_w", rr=0.5, out=str(tmp_path))
    values = ["0", "0.5", "1.0"]
    reports = pipeline.sweep(cfg, "sr", values)
    trunc = pipeline.run(cfg.replace(method="truncated", out=""), pipeline.prepare(cfg))
    assert reports[0].row()["eopp1"] == trunc.row()["eopp1"]
    assert len(read_report_csv((tmp_path / "sweep.csv").read_text())) == 3
    plot = (tmp_path / "plotdata_eopp1.csv").read_text().splitlines()
    assert plot[0] == "sr,eopp1" and len(plot) == 4
    assert (tmp_path / "base_model.flrw").exists() and (tmp_path / "sr_02" / "report.csv").exists()


def test_sweep_over_layers_clamps_rank(tmp_path):
    reports = pipeline.sweep(small(k=8), "layer", [0, 1, 2])
    assert [r.config["k"] for r in reports] == [6, 8, 4]


def test_sweep_over_beta_completes():
    reports = pipeline.sweep(small(sr=0.8, rr=1.0), "beta", [0.0, 1 / 3, 1.0, 5.0])
    assert len(reports) == 4


def test_sweep_is_deterministic(tmp_path):
    texts = []
    for name in ("a", "b"):
        pipeline.sweep(small(method="slr_a", out=str(tmp_path / name)), "rr", [0.25, 0.75])
        texts.append((tmp_path / name / "sweep.csv").read_text().replace(str(tmp_path / name), ""))
    assert texts[0] == texts[1]


def test_sweep_rejects_unknown_axis():
    with pytest.raises(ConfigError):
        pipeline.sweep(small(), "epochs", [1])


def _report(val_prec_hits, val_eopp_hits):
    """Report whose validation tallies give a chosen precision/EOpp shape."""
    labels = np.array([1, 2] * 10)
    groups = np.array([0] * 10 + [1] * 10)
    preds = labels.copy()
    preds[:val_prec_hits] = 3 - preds[:val_prec_hits]
    preds[10:10 + val_eopp_hits] = 3 - preds[10:10 + val_eopp_hits]
    c = confusion(preds, labels, groups, 2)
    return FairnessReport(c, 1.0, validation=c)


def test_select_best_prefers_fair_within_precision_budget():
    base = _report(0, 0)
    cands = [_report(4, 0), _report(0, 0), _report(1, 0)]
    rows = [c.row() for c in cands]
    best = pipeline.select_best(cands, base, max_precision_drop=0.2)
    ok = [r for r in rows if r["val_precision_avg"] >= base.row()["val_precision_avg"] - 0.2]
    assert best.row()["val_eopp1"] == min(r["val_eopp1"] for r in ok)


def test_select_best_falls_back_to_precision():
    base = _report(0, 0)
    cands = [_report(6, 0), _report(3, 3)]
    best = pipeline.select_best(cands, base, max_precision_drop=0.0)
    assert best is max(cands, key=lambda r: r.row()["val_precision_avg"])


def test_cli_end_to_end(tmp_path, capsys):
    data = str(tmp_path / "d.csv")
    common = ["--n", "400", "--d", "4", "--hidden", "6,6", "--epochs", "4", "--k", "2", "--scoring-size", "32"]
    assert main(["gen-data", *common, "--out", data]) == 0
    assert main(["train", "--data", data, *common, "--out", str(tmp_path / "m")]) == 0
    model = str(tmp_path / "m" / "model.flrw")
    assert main(["run", "--data", data, "--model", model, *common, "--method", "fairlrf",
                 "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "report.csv").exists()
    assert main(["sweep", "--data", data, "--model", model, *common, "--axis", "sr", "--values", "0,0.5",
                 "--out", str(tmp_path / "s")]) == 0
    capsys.readouterr()
    assert main(["inspect", model]) == 0
    assert "dense" in capsys.readouterr().out
    assert main(["inspect", str(tmp_path / "r" / "model.flrw")]) == 0
    assert "factored" in capsys.readouterr().out
    assert main(["inspect", str(tmp_path / "s" / "sweep.csv")]) == 0
    assert "eopp1=" in capsys.readouterr().out


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 400\nd = 4\nhidden = 6,6\nepochs = 2\nk = 2\nmethod = truncated\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert read_report_csv((tmp_path / "o" / "report.csv").read_text())[0]["method"] == "truncated"


@pytest.mark.parametrize("argv,kind", [
    (["run", "--method", "nope"], "ConfigError"),
    (["run", "--n", "400", "--d", "4", "--hidden", "6,6", "--epochs", "1", "--k", "9"], "RankError"),
    (["inspect", "/nonexistent/file.flrw"], "FileNotFoundError"),
])
def test_cli_errors_are_machine_readable(argv, kind, capsys):
    assert main(argv) == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert json.loads(err)["error"] == kind


def test_cli_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("spars = 1\n")
    assert main(["run", "--config", str(cfg)]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"
