import json

import pytest

from curvature2k.cli import main
from curvature2k.curvature_ops import random_curvature, save


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_threshold_table(capsys):
    code, out, _ = run(capsys, "threshold", "--n", "4", "--json")
    assert code == 0
    rows = dict(map(tuple, json.loads(out)["rows"]))
    assert rows[3.0] == pytest.approx(1 / 3)
    assert rows[4.0] == pytest.approx(1 / 4)


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--spec", "cylinder", "--n", "4", "--json")
    assert code == 0
    assert "-0.5" in out or "-0.5" in json.dumps(json.loads(out))


def test_check_cone_expectation_exit_codes(capsys):
    args = ["check-cone", "--spec", "cylinder", "--n", "5", "--alpha", "2", "--theta", "1/2"]
    assert run(capsys, *args, "--expect", "boundary")[0] == 0
    assert run(capsys, *args, "--expect", "interior")[0] == 1


def test_usage_errors(capsys):
    assert run(capsys, "verify", "--n", "4")[0] == 2  # missing seed
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "spectrum", "--spec", "/no/such/file.json")[0] == 2


def test_unknown_json_field_is_usage_error(tmp_path, capsys):
    path = tmp_path / "r.json"
    save(random_curvature(4, 0), path)
    doc = json.loads(path.read_text())
    doc["bogus"] = 1
    path.write_text(json.dumps(doc))
    assert run(capsys, "spectrum", "--spec", str(path))[0] == 2


def test_verify_is_byte_deterministic(capsys):
    args = ["verify", "--prop", "ricci", "--n", "4", "--samples", "20", "--seed", "3", "--json"]
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0 and out1 == out2


def test_falsify_planted_writes_files(tmp_path, capsys):
    code, out, _ = run(capsys, "falsify", "--claim", "planted-sectional", "--n", "4",
                       "--samples", "5", "--seed", "7", "--out", str(tmp_path), "--json")
    assert code == 0
    assert list(tmp_path.glob("*.json"))


def test_bochner_and_kahler(capsys):
    assert run(capsys, "bochner", "--spec", "sphere", "--n", "6", "--p", "2", "--json")[0] == 0
    code, out, _ = run(capsys, "kahler", "--spec", "cp", "--m", "2", "--alpha", "2", "--json")
    assert code == 0 and json.loads(out)


@pytest.mark.parametrize("fmt", ["--tsv", None])
def test_other_formats(capsys, fmt):
    argv = ["threshold", "--n", "5", "--table", "theta"] + ([fmt] if fmt else [])
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip()
