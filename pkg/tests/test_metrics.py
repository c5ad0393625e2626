import pytest

from meshflood import metrics as mx
from meshflood.engine import SimConfig, run
from meshflood.errors import AccountingError, ComparisonError
from meshflood.metrics import (
    MetricsSeries,
    compare,
    export_csv,
    export_summary,
    parse_csv,
    summarize,
)


class TestRecord:
    def test_amount_lands_in_floor_bucket(self):
        series = MetricsSeries(duration_s=300)
        series.record(0.5, 3, mx.BITS_SENT, 2000)
        assert series.buckets[0][3][mx.BITS_SENT] == 2000

    def test_same_bucket_is_additive(self):
        series = MetricsSeries(duration_s=300)
        series.record(1.2, 3, mx.BITS_SENT, 100)
        series.record(1.9, 3, mx.BITS_SENT, 50)
        assert series.buckets[1][3][mx.BITS_SENT] == 150

    def test_beyond_duration_rejected(self):
        series = MetricsSeries(duration_s=300)
        with pytest.raises(AccountingError):
            series.record(300.0, 0, mx.BITS_SENT, 1)

    def test_negative_amount_fatal(self):
        series = MetricsSeries(duration_s=300)
        with pytest.raises(AccountingError):
            series.record(1.0, 0, mx.BITS_SENT, -5)

    def test_negative_time_rejected(self):
        series = MetricsSeries(duration_s=300)
        with pytest.raises(AccountingError):
            series.record(-0.1, 0, mx.BITS_SENT, 1)


class TestCsv:
    def test_empty_series_exports_header_only(self, tmp_path):
        path = tmp_path / "series.csv"
        export_csv(MetricsSeries(duration_s=10), path)
        assert path.read_text() == "t,node_id,counter,value\n"

    def test_single_record_two_lines(self, tmp_path):
        series = MetricsSeries(duration_s=10)
        series.record(0.5, 2, mx.BITS_SENT, 2000)
        path = tmp_path / "series.csv"
        export_csv(series, path)
        assert path.read_text() == "t,node_id,counter,value\n0,2,bits_sent,2000\n"

    def test_rows_sorted_and_zero_buckets_omitted(self, tmp_path):
        series = MetricsSeries(duration_s=10)
        series.record(5.0, 9, mx.BITS_RELAYED, 10)
        series.record(2.0, 1, mx.BITS_SENT, 7)
        series.record(2.0, 1, mx.PACKETS_SENT, 0)
        path = tmp_path / "series.csv"
        export_csv(series, path)
        lines = path.read_text().splitlines()
        assert lines[1] == "2,1,bits_sent,7"
        assert lines[2] == "5,9,bits_relayed,10"
        assert len(lines) == 3

    def test_fig3_export_is_replayable_byte_for_byte(self, tmp_path):
        cfg = SimConfig(fixture="fig3", sim_duration_s=40)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_csv(run(cfg), a)
        export_csv(run(cfg), b)
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, tmp_path):
        series = run(SimConfig(fixture="fig3", sim_duration_s=30))
        path = tmp_path / "series.csv"
        export_csv(series, path)
        assert parse_csv(path) == series.buckets


class TestSummary:
    def test_totals_match_counters(self):
        series = MetricsSeries(duration_s=10)
        series.record(0.0, 0, mx.BITS_SENT, 2000)
        series.record(0.1, 1, mx.BITS_RECEIVED_FIRST, 2000)
        series.record(0.1, 1, mx.PACKETS_RECEIVED_FIRST, 1)
        summary = summarize(series)
        assert summary["total_bits_sent"] == 2000
        assert summary["total_packets_received_first"] == 1
        assert summary["redundancy_ratio"] == 0.0

    def test_redundancy_zero_when_no_receptions(self):
        assert summarize(MetricsSeries(duration_s=5))["redundancy_ratio"] == 0.0

    def test_peak_tracks_emitted_bits(self):
        series = MetricsSeries(duration_s=10)
        series.record(0.0, 0, mx.BITS_SENT, 2000)
        series.record(0.2, 0, mx.BITS_RELAYED, 2200)
        series.record(3.0, 1, mx.BITS_RELAYED, 2400)
        assert series.peak_node_bits_per_second() == 4200

    def test_export_sorted_keys_and_formats(self, tmp_path):
        path = tmp_path / "summary.txt"
        export_summary({"b": True, "a": 1.5, "c": 7, "d": "relay"}, path)
        assert path.read_text() == "a=1.5\nb=true\nc=7\nd=relay\n"


class TestCompare:
    def _summaries(self, fixture, duration=20):
        out = {}
        for mode in ("relay", "blind"):
            series = run(SimConfig(fixture=fixture, mode=mode, sim_duration_s=duration))
            out[mode] = summarize(series)
        return out

    def test_k4_75_percent_transmission_reduction(self):
        sums = self._summaries("k:4")
        report = compare(sums["relay"], sums["blind"])
        assert report["transmission_reduction_pct"] == 75.0

    def test_identical_summaries_give_zero(self):
        sums = self._summaries("path:3")
        report = compare(sums["relay"], sums["relay"])
        assert report["transmission_reduction_pct"] == 0.0
        assert report["redundancy_reduction_pct"] == 0.0

    def test_fig3_transmissions_per_flood(self):
        sums = self._summaries("fig3")
        relay_tx = sums["relay"]["total_transmissions"]
        blind_tx = sums["blind"]["total_transmissions"]
        floods = sums["relay"]["source_emissions"]
        assert relay_tx == 4 * floods  # source + three routers
        assert blind_tx == 10 * floods  # every node once

    def test_mismatched_fingerprints_rejected(self):
        a = summarize(run(SimConfig(fixture="k:4", sim_duration_s=10)))
        b = summarize(run(SimConfig(fixture="path:3", sim_duration_s=10)))
        with pytest.raises(ComparisonError):
            compare(a, b)

    def test_blind_zero_transmissions_convention(self):
        report = compare(
            {"fingerprint": "x", "total_transmissions": 0,
             "total_packets_received_dup": 0},
            {"fingerprint": "x", "total_transmissions": 0,
             "total_packets_received_dup": 0},
        )
        assert report["transmission_reduction_pct"] == 0.0
