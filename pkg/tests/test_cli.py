import json

import numpy as np
import pytest

from orbitcount import cli, verify
from orbitcount.errors import ConfigError, UnknownBuiltin


def run(*argv):
    return cli.main(list(argv))


def read(path):
    return path.read_bytes()


# ---------------------------------------------------------------- config


def test_parse_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(
        "# counting run\n"
        "\n"
        "L = 8\n"
        "norm=l1  # trailing comment\n"
        "phi = 1, -1\n"
        "percentile=0.5\n"
    )
    vals = cli.parse_config_file(str(p))
    assert vals == {"L": 8, "norm": "l1", "phi": (1.0, -1.0),
                    "percentile": 0.5}


def test_parse_config_rejects_unknown_key(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("L=4\nshinyness=11\n")
    with pytest.raises(ConfigError, match=r"run.cfg:2: unknown key"):
        cli.parse_config_file(str(p))


def test_parse_config_rejects_bad_lines(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("just words\n")
    with pytest.raises(ConfigError, match="expected key=value"):
        cli.parse_config_file(str(p))
    p.write_text("L=four\n")
    with pytest.raises(ConfigError, match="bad value for L"):
        cli.parse_config_file(str(p))
    with pytest.raises(ConfigError, match="cannot read config file"):
        cli.parse_config_file(str(tmp_path / "absent.cfg"))


def test_flags_override_config_file():
    cfg = cli.build_config({"L": 4, "norm": "l1"}, {"L": 9, "out": None})
    assert cfg.L == 9
    assert cfg.norm == "l1"
    assert cfg.workers >= 1  # 0 expands to the core count


@pytest.mark.parametrize("bad", [
    {"L": 0},
    {"percentile": 1.0},
    {"percentile": 0.0},
    {"depth": 0},
    {"norm": "nuclear"},
    {"projection": "iwasawa"},
    {"workers": -2},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        cli.build_config(bad, {})


# --------------------------------------------------------------- builtins


def test_builtin_representations():
    base = cli.builtin_representation("schottky_reference")
    assert base.dim == 2 and base.certified
    sym = cli.builtin_representation("sym_power:2")
    assert sym.dim == 3 and sym.certified
    for name in ("nope", "sym_power:0", "sym_power:x"):
        with pytest.raises(UnknownBuiltin):
            cli.builtin_representation(name)


# --------------------------------------------------------------- commands


def test_count_writes_reports(tmp_path, capsys):
    out = tmp_path / "r"
    assert run("count", "--L", "6", "--out", str(out), "--workers", "1") == 0
    assert (out / "series.csv").exists()
    assert (out / "series.png").exists()
    fit = json.loads(read(out / "fit.json"))
    assert 0.4 < fit["h_hat"] < 0.7
    assert fit["kind"] == "norm"
    first = capsys.readouterr().out
    assert "h_hat=" in first


def test_count_reports_are_deterministic(tmp_path):
    outs = [tmp_path / n for n in ("a", "b", "c")]
    for out, workers in zip(outs, ("1", "1", "3")):
        assert run("count", "--L", "6", "--out", str(out),
                   "--workers", workers) == 0
    for name in ("series.csv", "fit.json"):
        blobs = {read(out / name) for out in outs}
        assert len(blobs) == 1, name


def test_config_file_drives_a_run(tmp_path):
    out = tmp_path / "r"
    cfg = tmp_path / "run.cfg"
    cfg.write_text("L=6\nworkers=1\nout=%s\n" % out)
    assert run("count", "--config", str(cfg)) == 0
    assert (out / "series.csv").exists()


def test_primes_adds_ratio_outputs(tmp_path):
    out = tmp_path / "r"
    assert run("primes", "--L", "8", "--out", str(out), "--workers", "1") == 0
    for name in ("series.csv", "fit.json", "series.png",
                 "ratio.csv", "ratio.png"):
        assert (out / name).exists(), name
    header = read(out / "ratio.csv").splitlines()[0]
    assert header == b"t,ratio"


def test_phi_series_command(tmp_path):
    out = tmp_path / "r"
    assert run("phi", "--phi", "1,0", "--L", "6", "--out", str(out),
               "--workers", "1") == 0
    fit = json.loads(read(out / "fit.json"))
    assert fit["kind"] == "phi_cartan"


def test_phi_requires_coefficients(tmp_path, capsys):
    assert run("phi", "--L", "6", "--out", str(tmp_path / "r")) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ConfigError"


def test_phi_outside_dual_cone_is_a_computation_error(tmp_path, capsys):
    assert run("phi", "--phi=-1,1", "--L", "6",
               "--out", str(tmp_path / "r"), "--workers", "1") == 3
    assert json.loads(capsys.readouterr().err)["error"] == "InteriorUncertified"


def test_equidist_writes_pairs(tmp_path, capsys):
    out = tmp_path / "r"
    assert run("equidist", "--L", "6", "--out", str(out),
               "--workers", "1") == 0
    assert (out / "pairs.csv").exists()
    assert (out / "pairs.png").exists()
    assert "deficit=" in capsys.readouterr().out


def test_limitcone_writes_rays(tmp_path):
    out = tmp_path / "r"
    assert run("limitcone", "--L", "4", "--out", str(out)) == 0
    lines = read(out / "cone.csv").splitlines()
    assert lines[0] == b"length,r1,r2"
    assert len(lines) > 1
    assert (out / "cone.png").exists()


def test_entropy_command(tmp_path, capsys):
    out = tmp_path / "r"
    assert run("entropy", "--depth", "4", "--out", str(out)) == 0
    payload = json.loads(read(out / "entropy.json"))
    assert payload["depth"] == 4
    assert 0.45 < payload["h_pressure"] < 0.65
    assert payload["variation_k"] > 0.0
    assert (out / "entropy.png").exists()
    assert "h_pressure=" in capsys.readouterr().out


# ------------------------------------------------------------- exit codes


def test_bad_flag_value_exits_2(tmp_path, capsys):
    assert run("count", "--L", "0", "--out", str(tmp_path / "r")) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ConfigError"
    assert "L must be >= 1" in record["message"]


def test_unknown_builtin_exits_2(tmp_path, capsys):
    assert run("count", "--rep", "nope", "--L", "6",
               "--out", str(tmp_path / "r")) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "UnknownBuiltin"


def test_unparseable_rep_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("d 2\ngen a\n1 0\n")
    assert run("count", "--rep", str(bad), "--L", "6",
               "--out", str(tmp_path / "r")) == 2
    err = json.loads(capsys.readouterr().err)["error"]
    assert err in ("ParseError", "DimensionMismatch")


def test_too_little_data_exits_3(tmp_path, capsys):
    assert run("count", "--L", "1", "--out", str(tmp_path / "r"),
               "--workers", "1") == 3
    assert json.loads(capsys.readouterr().err)["error"] == "InsufficientData"


def test_argparse_rejects_unknown_command():
    with pytest.raises(SystemExit) as exc:
        run("frobnicate")
    assert exc.value.code == 2


# ----------------------------------------------------------------- verify


def fake_results(all_pass):
    return [
        verify.CriterionResult(1, "alpha", True, 0.1, {"gap": 0.01}),
        verify.CriterionResult(2, "beta", all_pass, 0.2, {}),
    ]


def test_verify_exit_status_tracks_criteria(tmp_path, capsys, monkeypatch):
    out = tmp_path / "r"
    monkeypatch.setattr(verify, "run_all", lambda workers: fake_results(True))
    assert run("verify", "--out", str(out)) == 0
    text = capsys.readouterr().out
    assert "[PASS]  1 alpha" in text
    assert "verify: 2/2 criteria passed" in text
    payload = json.loads(read(out / "verify.json"))
    assert payload["passed"] is True
    assert [c["index"] for c in payload["criteria"]] == [1, 2]

    monkeypatch.setattr(verify, "run_all", lambda workers: fake_results(False))
    assert run("verify", "--out", str(out)) == 4
    assert "[FAIL]  2 beta" in capsys.readouterr().out
    assert json.loads(read(out / "verify.json"))["passed"] is False


def test_verify_report_omits_runtimes(tmp_path, monkeypatch):
    # wall-clock noise would break the byte-determinism contract
    out = tmp_path / "r"
    results = fake_results(True)
    monkeypatch.setattr(verify, "run_all", lambda workers: results)
    assert run("verify", "--out", str(out)) == 0
    first = read(out / "verify.json")
    results[0].runtime = 99.0
    assert run("verify", "--out", str(out)) == 0
    assert read(out / "verify.json") == first
