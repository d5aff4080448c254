import csv
import io
import json
import subprocess
import sys

import pytest

from orthocensus.cli import InputError, RunConfig, config_from_args, main, parse_range, run
from orthocensus.obstruction import appendix_path, census


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfig:
    def test_range(self):
        assert parse_range("90:18504") == (90, 18504)
        for bad in ("90", "a:b", "1:2:3"):
            with pytest.raises(InputError):
                parse_range(bad)

    @pytest.mark.parametrize("kwargs", [
        {"lo": 5, "hi": 4}, {"precision": 64}, {"workers": 0}, {"a": 4},
        {"format": "xml"}, {"lo": 5}, {"which": "III"},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            RunConfig("census", **kwargs)

    def test_precedence(self):
        env = {"ORTHOCENSUS_FORMAT": "csv", "ORTHOCENSUS_PRECISION": "256", "ORTHOCENSUS_RANGE": "90:95"}
        cfg = config_from_args(["census"], env)
        assert (cfg.format, cfg.precision, cfg.range) == ("csv", 256, (90, 95))
        cfg = config_from_args(["census", "--format", "json", "--range", "100:101"], env)
        assert (cfg.format, cfg.precision, cfg.range) == ("json", 256, (100, 101))
        cfg = config_from_args(["census"], {})
        assert (cfg.format, cfg.precision, cfg.workers, cfg.a) == ("json", 128, 1, 2)

    def test_refinement_toggles(self):
        cfg = config_from_args(["census", "--counts", "exact", "--no-oq-halving"], {"ORTHOCENSUS_NU_EXACT": "0"})
        assert cfg.refinement == {"counts": "exact", "oq_odd_halving": False, "nu_exact": False}


class TestSubcommands:
    def test_volume(self, capsys):
        code, out, _ = call(capsys, "volume", "2", "3")
        rows = json.loads(out)
        assert code == 0 and [r["d"] for r in rows] == [2, 3]
        assert rows[0]["rational_coeff"] == "1/151200"

    def test_density(self, capsys, tmp_path):
        f = tmp_path / "a2.json"
        f.write_text(json.dumps({"gram": [[2, 1], [1, 2]]}))
        code, out, _ = call(capsys, "density", str(f), "--p", "3", "--format", "csv")
        assert code == 0 and out.splitlines() == ["p,alpha_p", "3,6"]

    @pytest.mark.parametrize("content,p", [("not json", "3"), ('{"gram": [[1]]}', "3"), ('{"gram": [[2]]}', "4")])
    def test_density_bad(self, capsys, tmp_path, content, p):
        f = tmp_path / "x.json"
        f.write_text(content)
        assert call(capsys, "density", str(f), "--p", p)[0] == 2

    def test_reidtai(self, capsys):
        code, out, _ = call(capsys, "reidtai-table", "--format", "csv")
        assert code == 0 and len(out.splitlines()) == 1 + 76
        code, out, err = call(capsys, "reidtai-table", "--check")
        assert code == 1 and "scan differs" in err
        assert json.loads(out)["comparison"]["matched"] == 34

    def test_branch(self, capsys):
        code, out, _ = call(capsys, "branch", "100", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and {r["tag"] for r in rows} >= {"B1", "B2"}

    def test_cusp(self, capsys):
        code, out, _ = call(capsys, "cusp", "18", "9")
        assert code == 0 and json.loads(out) == {"18": [2, 1, 1], "9": None}
        code, out, _ = call(capsys, "cusp", "--range", "1:30", "--format", "csv")
        assert out.splitlines() == ["d,a,b,c", "18,2,1,1", "27,2,2,1"]

    def test_gt(self, capsys):
        code, out, _ = call(capsys, "gt-classify", "259200", "9")
        assert code == 0
        assert [r["verdict"] for r in json.loads(out)] == ["general_type", "unknown"]

    def test_validate(self, capsys):
        code, out, _ = call(capsys, "validate-appendix", "--which", "I")
        assert code == 0 and json.loads(out)["count"] == 1367
        # the shipped Appendix II has fewer entries than the published count
        assert call(capsys, "validate-appendix", "--which", "II")[0] == 1

    def test_validate_malformed(self, capsys, tmp_path):
        (tmp_path / "appendix_I.txt").write_text("90\nninety-one\n")
        code, _, err = call(capsys, "validate-appendix", "--data-dir", str(tmp_path))
        assert code == 1 and "malformed" in err

    def test_missing_data(self, capsys, tmp_path):
        assert call(capsys, "census", "--range", "90:91", "--data-dir", str(tmp_path))[0] == 2

    def test_usage_errors(self, capsys):
        assert call(capsys, "nothing")[0] == 2
        assert call(capsys, "census", "--range", "90")[0] == 2
        assert call(capsys, "census", "--range", "90:100", "--precision", "64")[0] == 2
        assert call(capsys, "census")[0] == 2
        assert call(capsys, "census", "--range", "10:100")[0] == 2
        assert call(capsys, "volume", "1")[0] == 2


class TestCensus:
    def test_outputs(self, capsys, tmp_path):
        out = tmp_path / "c.csv"
        code, _, _ = call(capsys, "census", "--range", "90:300", "--format", "csv", "--output", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("d,a,global_pass") and len(lines) == 1 + 211
        summary = json.loads((tmp_path / "c.csv.summary.json").read_text())
        assert summary["bad"] == [] and summary["total"] == 211

    def test_workers_identical(self, capsys, tmp_path):
        texts = []
        for w in ("1", "2"):
            out = tmp_path / f"c{w}.csv"
            call(capsys, "census", "--range", "90:400", "--format", "csv", "--workers", w,
                 "--chunk", "64", "--output", str(out))
            texts.append(out.read_bytes() + (tmp_path / f"c{w}.csv.summary.json").read_bytes())
        assert texts[0] == texts[1]

    def test_precision_never_flips(self, capsys):
        verdicts = []
        for prec in ("128", "512"):
            code, out, _ = call(capsys, "census", "--range", "90:250", "--format", "csv", "--precision", prec)
            rows = list(csv.DictReader(io.StringIO(out)))
            verdicts.append({r["d"]: r["refined_pass"] for r in rows})
        for d, v in verdicts[0].items():
            if v != "indeterminate":
                assert verdicts[1][d] == v

    def test_disjointness_violation(self, capsys, tmp_path):
        records, _ = census(90, 200, 2)
        hit = next(r.d for r in records if r.refined_pass)
        real = [int(x) for x in appendix_path("I").read_text().split()]
        (tmp_path / "appendix_I.txt").write_text("\n".join(map(str, sorted(set(real) | {hit}))) + "\n")
        code, _, err = call(capsys, "census", "--range", "90:200", "--data-dir", str(tmp_path))
        assert code == 1 and "meets the appendix" in err

    def test_run_api(self, capsys):
        assert run(RunConfig("cusp", d=(18,))) == 0
        assert json.loads(capsys.readouterr().out) == {"18": [2, 1, 1]}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "orthocensus", "cusp", "18", "--format", "csv"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.splitlines()[1] == "18,2,1,1"
