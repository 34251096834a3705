import csv
import io
import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import noise_blocks
from vvc_mcm.cli import int_list, main
from vvc_mcm.errors import ConfigError, InputError
from vvc_mcm.geometry import ANGULAR_MODES, BlockSpec
from vvc_mcm.harness import (REPORT_SCHEMA, EvalReport, ThroughputQuery, cost_sweep,
                             error_eval, mode_decision_divergence, report_read, report_text,
                             report_write, throughput_model)
from vvc_mcm.harness.evaluate import best_mode, psnr
from vvc_mcm.harness.sources import (block_context, parse_pgm, read_pgm, sample_blocks,
                                     synthetic_image, write_pgm)
from vvc_mcm.harness.sweep import BD_RATE_AVERAGE, parallel_cost
from vvc_mcm.predictor import PredictionConfig

SMALL = noise_blocks(count=12, seed=3, size=64)


# --- throughput ---------------------------------------------------------------

def test_throughput_hd30():
    r = throughput_model(ThroughputQuery())
    assert r.cycles_per_region == 5288
    assert r.cycles_per_frame == 2677050
    assert r.required_frequency_hz == 80311500


def test_throughput_linear_in_fps_and_area():
    base = throughput_model(ThroughputQuery()).required_frequency_hz
    assert throughput_model(ThroughputQuery(fps=60)).required_frequency_hz == 2 * base
    assert throughput_model(ThroughputQuery(3840, 2160)).cycles_per_frame == 4 * 2677050
    assert throughput_model(ThroughputQuery(fps=0)).required_frequency_hz == 0


def test_throughput_invalid():
    with pytest.raises(ConfigError):
        ThroughputQuery(parallelism=0)
    with pytest.raises(ConfigError):
        ThroughputQuery(fps=-1)
    with pytest.raises(ConfigError):
        ThroughputQuery(parallelism=500)


# --- sources ------------------------------------------------------------------

def test_pgm_round_trip(tmp_path):
    img = np.arange(48).reshape(6, 8) * 5
    write_pgm(tmp_path / "a.pgm", img)
    assert (read_pgm(tmp_path / "a.pgm", 8) == img).all()
    assert (read_pgm(tmp_path / "a.pgm", 10) == img * 4).all()
    img16 = np.arange(12).reshape(3, 4) * 300
    write_pgm(tmp_path / "b.pgm", img16, maxval=4095)
    assert (read_pgm(tmp_path / "b.pgm", 12) == img16).all()


def test_pgm_comment_header():
    data = b"P5\n# made by hand\n2 1\n255\n\x01\x02"
    assert parse_pgm(data, 8).tolist() == [[1, 2]]


@pytest.mark.parametrize("data", [b"P2\n1 1\n255\n1", b"P5\n2 2\n255\n\x00", b"P5\n2", b"P5\nx 1\n255\n\x00",
                                  b"P5\n0 1\n255\n"])
def test_pgm_malformed(data):
    with pytest.raises(InputError):
        parse_pgm(data)


def test_pgm_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_pgm(tmp_path / "nope.pgm")


def test_synthetic_image_seeded():
    a = synthetic_image(32, 16, 10, 4)
    assert a.shape == (16, 32) and a.min() >= 0 and a.max() <= 1023
    assert (a == synthetic_image(32, 16, 10, 4)).all()
    assert not (a == synthetic_image(32, 16, 10, 5)).all()


def test_block_context_lines():
    img = np.arange(64 * 64).reshape(64, 64)
    ctx = block_context(img, 8, 16, BlockSpec(4, 4))
    assert ctx.top[0] == img[15, 7] == ctx.left[0]
    assert ctx.top[1:5] == tuple(img[15, 8:12])
    assert ctx.left[1:5] == tuple(img[16:20, 7])
    # reads past the right edge are clamped
    assert ctx.top[-1] == img[15, 63]
    with pytest.raises(InputError):
        block_context(img, 62, 0, BlockSpec(4, 4))


def test_sample_blocks_seeded():
    img = synthetic_image(64, 64)
    a = sample_blocks(img, BlockSpec(8, 8), 10, seed=1)
    b = sample_blocks(img, BlockSpec(8, 8), 10, seed=1)
    assert [(c.x0, c.y0) for c in a] == [(c.x0, c.y0) for c in b]
    assert all(c.x0 >= 8 and c.y0 >= 8 for c in a)
    assert len(sample_blocks(img, BlockSpec(8, 8))) == 49
    with pytest.raises(InputError):
        sample_blocks(img, BlockSpec(8, 8), 50)


# --- evaluation ---------------------------------------------------------------

def test_psnr():
    assert psnr(0, 10, 10) == math.inf
    assert psnr(1023 * 1023, 1, 10) == pytest.approx(0.0)


def test_error_eval_identity():
    recs = error_eval(SMALL, ANGULAR_MODES, [1], filters="both")
    assert [r["filter"] for r in recs] == ["fC", "fG"]
    for r in recs:
        assert r["max_abs_error"] == 0 and r["mean_abs_error"] == 0
        assert r["psnr_infinite"] and r["psnr_db"] is None and r["changed_predictions"] == 0
        assert r["samples"] == 12 * 65 * 64


def test_error_grows_with_group_size():
    recs = error_eval(SMALL, ANGULAR_MODES, [2, 32])
    assert recs[0]["mean_abs_error"] < recs[1]["mean_abs_error"]
    assert recs[1]["psnr_db"] < recs[0]["psnr_db"]


def test_constant_source_error_bound():
    img = np.full((48, 48), 600)
    blocks = sample_blocks(img, BlockSpec(8, 8), 4)
    for r in error_eval(blocks, ANGULAR_MODES, [2, 4, 8, 16, 32], filters="both"):
        # rows lose at most 4 of their 64 units of DC gain
        assert r["max_abs_error"] <= math.ceil(600 * 4 / 64)


def test_divergence_identity():
    for f in ("fC", "fG"):
        d = mode_decision_divergence(SMALL, ANGULAR_MODES, 1, PredictionConfig(filter_choice=f))
        assert d["rate"] == 0 and d["diverged"] == 0 and d["blocks"] == 12


def test_divergence_needs_two_modes():
    with pytest.raises(ValueError):
        mode_decision_divergence(SMALL, [50], 16)


def test_best_mode_tie_goes_low():
    img = np.full((32, 32), 100)
    ctx = sample_blocks(img, BlockSpec(8, 8), 1)[0]
    assert best_mode(ctx, [66, 50, 2, 18], PredictionConfig()) == (2, 0)


# --- sweep and report ---------------------------------------------------------

def test_sweep_orderings():
    s = cost_sweep(parallel=(4, 8))
    adders = {r["implementation"]: r["adders"] for r in s["implementations"]}
    order = ["mcm_precise", "mcm_n2", "mcm_n4", "mcm_n8", "mcm_n16", "mcm_n32"]
    assert [adders[i] for i in order] == sorted((adders[i] for i in order), reverse=True)
    mult = s["implementations"][-1]
    assert mult["implementation"] == "mult" and mult["multipliers"] == 4 and mult["adders"] == 0
    assert {r["lanes"] for r in s["parallel"]} == {4, 8}
    for r in s["implementations"]:
        assert r["bd_rate_avg_pct"] == BD_RATE_AVERAGE.get(r["implementation"])


def test_sweep_kappa_zero():
    for r in cost_sweep(kappa=0)["implementations"]:
        assert r["gate_estimate"] == 0


def test_parallel_cost_single_lane_matches_unit():
    s = {r["n"]: r["adders"] for r in cost_sweep(include_mult=False)["implementations"]}
    for n, a in s.items():
        assert parallel_cost(n, 1)["adders"] == a


def full_report():
    rep = EvalReport(seed=3, config={"note": "test"})
    rep.error_stats = error_eval(SMALL, ANGULAR_MODES, [1, 32])
    rep.divergence = [mode_decision_divergence(SMALL, ANGULAR_MODES, 32)]
    s = cost_sweep((32, 1), (4,))
    rep.cost_sweep, rep.parallel_sweep = s["implementations"], s["parallel"]
    rep.throughput = throughput_model(ThroughputQuery()).as_dict()
    return rep


def test_report_json_round_trip(tmp_path):
    rep = full_report()
    report_write(rep, tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    jsonschema.validate(data, REPORT_SCHEMA)
    assert report_read(tmp_path / "r.json") == rep
    assert data["reference"]["bd_rate_average_pct"]["mcm_n32"] == 2.678


def test_report_csv(tmp_path):
    rows = list(csv.reader(io.StringIO(report_text(full_report(), "csv"))))
    assert rows[0] == ["config", "metric", "value"]
    assert ["cost/mcm_n32", "bd_rate_avg_pct", "2.678"] in rows
    assert ["throughput", "cycles_per_frame", "2677050"] in rows
    assert ["error/fC/n=1", "psnr_db", ""] in rows
    assert report_text(EvalReport(), "csv") == "config,metric,value\n"
    with pytest.raises(ValueError):
        report_text(EvalReport(), "xml")


def test_empty_report_valid():
    jsonschema.validate(json.loads(report_text(EvalReport())), REPORT_SCHEMA)


# --- command line -------------------------------------------------------------

@given(st.lists(st.integers(-14, 80), min_size=1, max_size=6))
def test_int_list_plain(values):
    assert int_list(",".join(map(str, values))) == values


def test_int_list_ranges():
    assert int_list("2-5,9") == [2, 3, 4, 5, 9]
    assert int_list("-3:-1") == [-3, -2, -1]


def test_cli_throughput(capsys):
    assert main(["throughput"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["cycles_per_frame"] == 2677050 and out["required_frequency_hz"] == 80311500


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["mcm", "--n", "3"]) == 1
    assert main(["eval", "--image", str(tmp_path / "missing.pgm")]) == 1
    assert main(["nonsense"]) == 1
    assert main(["throughput", "--parallel", "0"]) == 1
    capsys.readouterr()


def test_cli_eval_and_sweep(tmp_path):
    img = synthetic_image(64, 64, 8, 2)
    write_pgm(tmp_path / "p.pgm", img)
    out = tmp_path / "r.json"
    assert main(["eval", "--image", str(tmp_path / "p.pgm"), "--blocks", "6", "--n", "1,32",
                 "--modes", "2-66", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    jsonschema.validate(data, REPORT_SCHEMA)
    assert len(data["error_stats"]) == 4 and len(data["divergence"]) == 4
    assert main(["sweep", "--parallel", "4", "--format", "csv", "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").read_text().startswith("config,metric,value\n")


def test_cli_emit(tmp_path, capsys):
    assert main(["emit", "--impl", "mcm_n32", "--impl", "mult", "--parallel", "4",
                 "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert (tmp_path / "mcm_n32" / "vvc_mcm_n32_par4.v").exists()
    assert json.loads((tmp_path / "mult" / "manifest.json").read_text())["implementation"] == "mult"


def test_cli_mcm_dump(capsys):
    assert main(["mcm", "--coefficients", "51", "--dump"]) == 0
    rec = json.loads(capsys.readouterr().out)[0]
    assert rec["adders"] == 2 and rec["graph"][0] == "0 input - - - 1"


@given(st.sampled_from([64, 128, 256, 512, 1024, 2048, 4096]), st.integers(1, 120))
def test_throughput_inverse_in_parallelism(p, fps):
    from fractions import Fraction
    r = throughput_model(ThroughputQuery(fps=fps, parallelism=p))
    base = throughput_model(ThroughputQuery(fps=1, parallelism=64))
    assert r.required_frequency_hz == base.cycles_per_frame * Fraction(64, p) * fps
