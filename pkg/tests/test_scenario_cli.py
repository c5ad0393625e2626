import pytest

from meshflood.cli import EXIT_CONFIG, EXIT_OK, main
from meshflood.errors import ConfigError
from meshflood.scenario import parse_rate_schedule, parse_scenario_text


class TestScenarioParsing:
    def test_full_scenario(self):
        cfg = parse_scenario_text(
            """
            # fig3 comparison scenario
            fixture = fig3
            mode = relay
            seed = 7
            sim_duration_s = 40
            rule2 = on
            rate_schedule = 0:2000,60:1000
            """
        )
        assert cfg.fixture == "fig3"
        assert cfg.seed == 7
        assert cfg.rule2 is True
        assert cfg.rate_schedule == ((0.0, 2000), (60.0, 1000))

    def test_defaults_match_simconfig(self):
        cfg = parse_scenario_text("")
        assert cfg.node_count == 25
        assert cfg.sim_duration_s == 300.0
        assert cfg.channel_bps == 11_000_000

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_scenario_text("radius = 100\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_scenario_text("seed = 1\nseed = 2\n")

    def test_bad_number_rejected(self):
        with pytest.raises(ConfigError, match="expected a number"):
            parse_scenario_text("seed = seven\n")

    def test_bad_boolean_rejected(self):
        with pytest.raises(ConfigError, match="boolean"):
            parse_scenario_text("rule2 = maybe\n")

    def test_invalid_values_rejected_by_validation(self):
        with pytest.raises(ConfigError):
            parse_scenario_text("node_count = 0\n")

    def test_rate_schedule_syntax(self):
        assert parse_rate_schedule("60:1000, 0:2000") == ((0.0, 2000), (60.0, 1000))
        with pytest.raises(ConfigError):
            parse_rate_schedule("60=1000")


def write_scenario(tmp_path, text, name="scenario.scn"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestCmdRun:
    def test_fig3_dump_relays_lists_the_routers(self, tmp_path):
        scn = write_scenario(
            tmp_path, "fixture = fig3\nmode = relay\nsim_duration_s = 20\n"
        )
        out = tmp_path / "out"
        code = main(["run", scn, "--out", str(out), "--dump-relays"])
        assert code == EXIT_OK
        relays = (out / "relays.txt").read_text().splitlines()
        assert [line.split()[1] for line in relays] == ["1", "2", "3"]
        assert (out / "series.csv").exists()
        assert (out / "summary.txt").exists()

    def test_missing_scenario_file_exits_2(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.scn")]) == EXIT_CONFIG

    def test_bad_scenario_key_exits_2(self, tmp_path):
        scn = write_scenario(tmp_path, "warp_speed = 9\n")
        assert main(["run", scn]) == EXIT_CONFIG

    def test_same_seed_twice_identical_outputs(self, tmp_path):
        scn = write_scenario(
            tmp_path, "fixture = grid:25\nsim_duration_s = 30\n"
        )
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["run", scn, "--seed", "7", "--out", str(out_a)]) == EXIT_OK
        assert main(["run", scn, "--seed", "7", "--out", str(out_b)]) == EXIT_OK
        for name in ("series.csv", "summary.txt"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_flags_override_file_values(self, tmp_path):
        scn = write_scenario(
            tmp_path, "fixture = path:3\nmode = relay\nsim_duration_s = 10\n"
        )
        out = tmp_path / "out"
        assert main(["run", scn, "--mode", "blind", "--out", str(out)]) == EXIT_OK
        summary = (out / "summary.txt").read_text()
        assert "config_mode=blind" in summary

    def test_dump_topology(self, tmp_path):
        scn = write_scenario(tmp_path, "fixture = path:3\nsim_duration_s = 10\n")
        out = tmp_path / "out"
        assert main(["run", scn, "--out", str(out), "--dump-topology"]) == EXIT_OK
        text = (out / "topology.txt").read_text()
        assert text.startswith("n 3 range 100.0")

    def test_jobs_run_consecutive_seeds(self, tmp_path):
        scn = write_scenario(
            tmp_path, "fixture = path:3\nseed = 4\nsim_duration_s = 10\n"
        )
        out = tmp_path / "batch"
        assert main(["run", scn, "--out", str(out), "--jobs", "2"]) == EXIT_OK
        assert (out / "seed-4" / "series.csv").exists()
        assert (out / "seed-5" / "series.csv").exists()
        # batch member equals a solo run of the same seed
        solo = tmp_path / "solo"
        assert main(["run", scn, "--seed", "5", "--out", str(solo)]) == EXIT_OK
        assert (out / "seed-5" / "series.csv").read_bytes() == (
            solo / "series.csv"
        ).read_bytes()


class TestCmdCompare:
    def test_k4_reports_75_percent(self, tmp_path):
        scn = write_scenario(tmp_path, "fixture = k:4\nsim_duration_s = 20\n")
        out = tmp_path / "cmp"
        assert main(["compare", scn, "--out", str(out)]) == EXIT_OK
        report = (out / "compare.txt").read_text()
        assert "transmission_reduction_pct=75.0" in report
        assert (out / "series_relay.csv").exists()
        assert (out / "series_blind.csv").exists()

    def test_single_node_scenario_reduces_nothing(self, tmp_path):
        scn = write_scenario(tmp_path, "fixture = path:1\nsim_duration_s = 10\n")
        out = tmp_path / "cmp1"
        assert main(["compare", scn, "--out", str(out)]) == EXIT_OK
        assert "transmission_reduction_pct=0.0" in (out / "compare.txt").read_text()

    def test_grid25_reduction_strictly_positive(self, tmp_path):
        scn = write_scenario(tmp_path, "fixture = grid:25\nsim_duration_s = 20\n")
        out = tmp_path / "cmp25"
        assert main(["compare", scn, "--out", str(out)]) == EXIT_OK
        line = next(
            ln
            for ln in (out / "compare.txt").read_text().splitlines()
            if ln.startswith("transmission_reduction_pct=")
        )
        assert float(line.split("=")[1]) > 0.0


class TestCmdOracle:
    def test_path3_ratio_one(self, tmp_path, capsys):
        scn = write_scenario(tmp_path, "fixture = path:3\n")
        assert main(["oracle", scn]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "heuristic=1 optimal=1 ratio=1.0"

    def test_complete_graph_empty_sets(self, tmp_path, capsys):
        scn = write_scenario(tmp_path, "fixture = k:4\n")
        assert main(["oracle", scn]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "heuristic=0 optimal=0 ratio=1.0"

    def test_random_topology_ratio_at_least_one(self, tmp_path, capsys):
        scn = write_scenario(
            tmp_path,
            "node_count = 10\nplacement = uniform\nradio_range = 200\nseed = 11\n",
        )
        assert main(["oracle", scn]) == EXIT_OK
        out = capsys.readouterr().out
        ratio = float(out.strip().split("ratio=")[1])
        assert ratio >= 1.0

    def test_size_cap_exit_2(self, tmp_path):
        scn = write_scenario(tmp_path, "fixture = grid:25\n")
        assert main(["oracle", scn, "--max-n", "12"]) == EXIT_CONFIG
