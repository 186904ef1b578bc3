"""Command-line driver: reports, exit codes, determinism, round trips."""

import json
import os

import numpy as np
import pytest

import syncgap as sg
from syncgap.cli import main

DATA = os.path.join(os.path.dirname(__file__), "data")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def fixture(name):
    return os.path.join(DATA, name)


class TestAnalyze:
    def test_twins_fixture(self, capsys):
        code, out, _err = run(capsys, "analyze", fixture("twins.edges"))
        assert code == 0
        rep = json.loads(out)
        assert rep["graph"]["nodes"] == 5
        assert not rep["graph"]["directed"]
        assert rep["graph"]["satisfies_a1"]
        assert abs(rep["spectrum"]["lambda2"]["re"] - 2.0) <= 1e-9
        assert rep["spectrum"]["lambda2"]["im"] == 0.0
        assert rep["spectrum"]["simple"]
        assert rep["spectrum"]["location"] == "whole"

    def test_disconnected_exits_2(self, capsys):
        code, _out, err = run(capsys, "analyze", fixture("disconnected.edges"))
        assert code == 2
        assert "NotConnected" in err

    def test_demo_location(self, capsys):
        code, out, _err = run(capsys, "analyze", fixture("demo.edges"))
        assert code == 0
        rep = json.loads(out)
        assert rep["spectrum"]["location"] == "slave"
        assert abs(rep["spectrum"]["lambda2"]["re"] - 1.0) <= 1e-9
        eigs = sorted(e["re"] for e in rep["spectrum"]["eigenvalues"])
        assert np.allclose(eigs, [0.0, 1.0, 1.5, 2.25, 3.0], atol=1e-9)

    def test_parse_error_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.edges"
        bad.write_text("1 2\n")
        code, _out, err = run(capsys, "analyze", str(bad))
        assert code == 2
        assert "ParseError" in err

    def test_output_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, out, _err = run(capsys, "analyze", fixture("p3.edges"),
                              "--output", str(out_path))
        assert code == 0
        assert out == ""
        rep = json.loads(out_path.read_text())
        assert abs(rep["spectrum"]["lambda2"]["re"] - 1.0) <= 1e-9


class TestClassify:
    def test_p3_partition_and_links(self, capsys):
        code, out, _err = run(capsys, "classify", fixture("p3.edges"))
        assert code == 0
        rep = json.loads(out)
        cls = rep["classification"]
        assert cls["mode"] == "undirected"
        assert cls["partition"]["g1"] == [1, 2]
        assert cls["partition"]["g2"] == [3]
        table = {(e["from"], e["to"]): e["label"] for e in cls["links"]}
        assert table[(1, 3)] == "improves"
        assert table[(3, 1)] == "improves"

    def test_demo_directed_tables(self, capsys):
        code, out, _err = run(capsys, "classify", fixture("demo.edges"))
        assert code == 0
        rep = json.loads(out)
        cls = rep["classification"]
        assert cls["mode"] == "directed"
        assert cls["location"] == "slave"
        assert cls["master_nodes"] == [1, 2, 3]
        assert cls["slave_nodes"] == [4, 5]
        back = {(e["from"], e["to"]): e for e in cls["backward_arcs"]}
        # unit-weight arc 4 -> 2 carries half the weight-2 slope of -1
        assert abs(back[(4, 2)]["slope"] - (-0.5)) <= 1e-9
        assert back[(4, 2)]["classification"] == "hinders"
        assert abs(back[(4, 2)]["slope"] - back[(4, 2)]["fd_slope"]) <= 1e-3
        fwd = {(e["from"], e["to"]): e for e in cls["forward_arcs"]}
        assert abs(fwd[(1, 4)]["slope"] - 0.5) <= 1e-9
        assert fwd[(1, 4)]["classification"] == "improves"
        assert cls["improving_nodes"]["nodes"] == [1, 2, 3]
        hind = cls["hindering"]
        assert hind is not None
        assert abs(hind["slope"] - (-1.0)) <= 1e-9
        assert {(a["from"], a["to"]) for a in hind["arcs"]} == {(4, 2), (5, 2)}

    def test_strongly_connected_exits_2(self, capsys):
        code, _out, err = run(capsys, "classify", fixture("cycle3.edges"))
        assert code == 2
        assert "NotTwoComponents" in err

    def test_threads_match_serial(self, capsys):
        code, serial, _ = run(capsys, "classify", fixture("demo.edges"))
        assert code == 0
        code, threaded, _ = run(capsys, "classify", fixture("demo.edges"),
                                "--threads", "4")
        assert code == 0
        assert serial == threaded

    def test_determinism_byte_identical(self, capsys):
        _code, first, _ = run(capsys, "classify", fixture("twins.edges"),
                              "--seed", "5")
        _code, second, _ = run(capsys, "classify", fixture("twins.edges"),
                               "--seed", "5")
        assert first == second

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "classify", fixture("demo.edges"),
                           "--format", "csv", "--no-oracle")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "direction,from,to,slope,fd_slope,label"
        # 6 forward arcs + 6 backward arcs
        assert len(lines) == 13
        code, out, _ = run(capsys, "analyze", fixture("p3.edges"),
                           "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "index,re,im,simple"

    def test_echo_roundtrip(self, capsys, tmp_path):
        _code, out, _ = run(capsys, "classify", fixture("twins.edges"))
        rep = json.loads(out)
        echo = rep["echo"]
        lines = [f"nodes {echo['nodes']}"]
        lines += [f"{u} {v} {w!r}" for u, v, w in echo["edges"]]
        p = tmp_path / "echo.edges"
        p.write_text("\n".join(lines) + "\n")
        g1 = sg.load_edge_list(fixture("twins.edges"))
        g2 = sg.load_edge_list(p)
        assert np.array_equal(sg.laplacian(g1).entries, sg.laplacian(g2).entries)


class TestOracle:
    def test_directed_arc(self, capsys):
        code, out, _ = run(capsys, "oracle", fixture("p3.edges"),
                           "--arc", "1", "3")
        assert code == 0
        rep = json.loads(out)
        assert abs(rep["analytic"]["re"] - 1.0) <= 1e-9
        assert rep["ok"]

    def test_undirected_pair(self, capsys):
        code, out, _ = run(capsys, "oracle", fixture("p3.edges"),
                           "--arc", "1", "3", "--undirected", "--weight", "0.5")
        assert code == 0
        rep = json.loads(out)
        assert abs(rep["analytic"]["re"] - 1.0) <= 1e-9  # 0.5 * (v1-v3)^2 = 1
        assert rep["ok"]

    def test_bad_arc_exits_2(self, capsys):
        code, _out, err = run(capsys, "oracle", fixture("p3.edges"),
                              "--arc", "1", "9")
        assert code == 2
        assert err


class TestSimulate:
    def _write_config(self, tmp_path, text):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(text)
        return str(cfg)

    def test_short_run_verdict_and_csv(self, capsys, tmp_path):
        cfg = self._write_config(tmp_path, (
            f"graph = {fixture('demo.edges')}\n"
            "alpha = 0.3\n"
            "t_end = 60\n"
            "seed = 2\n"
            "jitter = 1e-4\n"
        ))
        csv_path = tmp_path / "traj.csv"
        code, out, _ = run(capsys, "simulate", cfg, "--output", str(csv_path))
        assert code == 0
        verdict = json.loads(out)
        assert verdict["synchronized"] is True
        assert verdict["decay_rate"] < 0
        assert verdict["events_applied"] == []
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("t,sync_error,x_1_1")

    def test_event_recorded(self, capsys, tmp_path):
        cfg = self._write_config(tmp_path, (
            f"graph = {fixture('demo.edges')}\n"
            "alpha = 0.3\n"
            "t_end = 20\n"
            "event = 10 4 2 2.0\n"
        ))
        code, out, _ = run(capsys, "simulate", cfg,
                           "--output", str(tmp_path / "t.csv"))
        assert code == 0
        verdict = json.loads(out)
        assert verdict["events_applied"] == [{"t": 10.0, "arc": [4, 2], "weight": 2.0}]

    def test_alpha_zero_not_synchronized(self, capsys, tmp_path):
        cfg = self._write_config(tmp_path, (
            f"graph = {fixture('demo.edges')}\n"
            "alpha = 0\n"
            "t_end = 200\n"
            "seed = 2\n"
        ))
        code, out, _ = run(capsys, "simulate", cfg,
                           "--output", str(tmp_path / "t.csv"))
        assert code == 0
        assert json.loads(out)["synchronized"] is False

    def test_blowup_exits_3(self, capsys, tmp_path):
        cfg = self._write_config(tmp_path, (
            f"graph = {fixture('p3.edges')}\n"
            "alpha = 0\n"
            "a = 5.0\n"
            "t_end = 100\n"
        ))
        code, _out, err = run(capsys, "simulate", cfg,
                              "--output", str(tmp_path / "t.csv"))
        assert code == 3
        assert "BlowUp" in err


class TestFixtureFilesMatchBuilders:
    def test_data_files_agree_with_helpers(self):
        from helpers import equal_entry_graph, master_slave_demo, path_graph, twins_graph
        for name, builder in [("twins.edges", twins_graph),
                              ("equal_entry.edges", equal_entry_graph),
                              ("p3.edges", lambda: path_graph(3)),
                              ("demo.edges", master_slave_demo)]:
            g_file = sg.load_edge_list(fixture(name))
            g_built = builder()
            assert np.array_equal(sg.adjacency(g_file), sg.adjacency(g_built)), name
