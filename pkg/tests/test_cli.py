import json

import pytest

from mitlab.cli import main
from mitlab.model import SeriesConfig, build_cluster_series, dump_model, model


@pytest.fixture()
def series1(tmp_path):
    path = tmp_path / "series1.json"
    dump_model(build_cluster_series(SeriesConfig(M=2, K=1)), path)
    return str(path)


@pytest.fixture()
def series2(tmp_path):
    path = tmp_path / "series2.json"
    dump_model(build_cluster_series(SeriesConfig(M=2, K=2)), path)
    return str(path)


@pytest.fixture()
def log1(tmp_path):
    path = tmp_path / "log1.json"
    dump_model(model(2, [(1, [(1, 0)])]), path)
    return str(path)


@pytest.fixture()
def profile_pair(tmp_path):
    p1 = tmp_path / "p1.json"
    p2 = tmp_path / "p2.json"
    p1.write_text(json.dumps({"segments": [{"slope": "3/2", "to": "0"}], "tail_offset": "0"}))
    p2.write_text(json.dumps({"segments": [{"slope": "3/2", "to": "0"}], "tail_offset": "1"}))
    return str(p1), str(p2)


class TestCluster:
    def test_table_row(self, capsys):
        assert main(["cluster", "--M", "2", "--kmax", "4", "--mmax", "0"]) == 0
        out = capsys.readouterr().out
        assert "m=0: 5/6, 17/20, 65/72, 257/272" in out

    def test_unwitnessed_degree_fails(self, capsys):
        assert main(["cluster", "--M", "2", "--kmax", "1", "--mmax", "5"]) == 4

    def test_base_validation(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["cluster", "--M", "1", "--kmax", "1", "--mmax", "0"])
        assert exc.value.code == 2

    def test_json_payload(self, capsys):
        assert main(["--json", "cluster", "--M", "2", "--kmax", "2", "--mmax", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["command"] == "cluster"
        assert payload["result"]["rows"][0]["xi"] == ["5/6", "17/20"]

    def test_byte_stable(self, capsys):
        main(["cluster", "--M", "2", "--kmax", "3", "--mmax", "2"])
        first = capsys.readouterr().out
        main(["cluster", "--M", "2", "--kmax", "3", "--mmax", "2"])
        assert capsys.readouterr().out == first


class TestThreshold:
    def test_exact_value(self, capsys, series1):
        assert main(["threshold", "--model", series1, "--monomial", "0,0"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "5/6"

    def test_pure_log_power(self, capsys, log1):
        assert main(["threshold", "--model", log1, "--monomial", "1,0"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "2"

    def test_bounded_potential(self, capsys, tmp_path):
        path = tmp_path / "bounded.json"
        dump_model(model(2, [(1, [(0, 0), (1, 0)])]), path)
        assert main(["threshold", "--model", str(path), "--monomial", "0,0"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "infinity"

    def test_numeric_agreement(self, capsys, series1):
        code = main(["--json", "threshold", "--model", series1, "--monomial", "0,0", "--numeric"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["result"]["agreement"] is True
        assert payload["result"]["numeric"]["lo"] <= 5 / 6 <= payload["result"]["numeric"]["hi"]

    def test_parse_error_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("not json")
        assert main(["threshold", "--model", str(bad), "--monomial", "0,0"]) == 2

    def test_dim3_without_numeric_exit_2(self, tmp_path, capsys):
        path = tmp_path / "m3.json"
        dump_model(model(3, [(1, [(1, 0, 0)])]), path)
        assert main(["threshold", "--model", str(path), "--monomial", "0,0,0"]) == 2

    def test_negative_monomial_exit_2(self, series1, capsys):
        assert main(["threshold", "--model", series1, "--monomial=-1,0"]) == 2


class TestSpectrumStaircase:
    def test_spectrum_tsv(self, capsys, series1):
        assert main(["--tsv", "spectrum", "--model", series1, "--max-degree", "2", "--cutoff", "8/5"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "threshold_num\tthreshold_den\twitness_a1\twitness_a2"
        assert lines[1] == "5\t6\t0\t0"
        assert lines[-1] == "3\t2\t1\t0"

    def test_spectrum_json_round_trip(self, capsys, series1):
        assert main(["--json", "spectrum", "--model", series1, "--max-degree", "2", "--cutoff", "8/5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [e["threshold"] for e in payload["result"]["entries"]] == ["5/6", "1", "3/2"]

    def test_staircase(self, capsys, series1):
        assert main(["staircase", "--model", series1, "--cutoff", "1", "--max-degree", "6"]) == 0
        out = capsys.readouterr().out
        assert "z1^1 z2^0" in out


class TestEqui:
    def test_profiles_mode(self, capsys, profile_pair):
        p1, p2 = profile_pair
        assert main(["equi", "--mode", "profiles", "--file1", p1, "--file2", p2, "--weight", "0"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "NonIntegrable"

    def test_profiles_identical(self, capsys, profile_pair):
        p1, _ = profile_pair
        assert main(["equi", "--mode", "profiles", "--file1", p1, "--file2", p1]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "Integrable"

    def test_models_mode(self, capsys, series2, log1):
        assert main(["equi", "--mode", "models", "--file1", series2, "--file2", log1]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "Diverges"


class TestVerify:
    def test_lemmas_suite(self, capsys):
        assert main(["--seed", "7", "verify", "--suite", "lemmas"]) == 0
        out = capsys.readouterr().out
        assert "divergent-offset-forces-nonintegrable: 200/200" in out
        assert "difference-integrable-forces-equal-slope: 200/200" in out

    def test_seed_determinism(self, capsys):
        main(["--json", "--seed", "3", "verify", "--suite", "lemmas"])
        first = capsys.readouterr().out
        main(["--json", "--seed", "3", "verify", "--suite", "lemmas"])
        assert capsys.readouterr().out == first
