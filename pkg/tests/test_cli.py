"""CLI: determinism, exit codes, output formats."""

import io
import json
from contextlib import redirect_stdout, redirect_stderr

import pytest

from lamplighter import cli


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        rc = cli.main(argv)
    return rc, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def specs(tmp_path_factory):
    root = tmp_path_factory.mktemp("specs")
    files = {}

    def put(name, payload):
        path = root / name
        path.write_text(json.dumps(payload))
        files[name] = str(path)

    put("c8.json", {"variant": "cyclic", "n": 8, "gens": [1]})
    put("c2.json", {"variant": "cyclic", "n": 2, "gens": [1], "letter": "c"})
    put("c4.json", {"variant": "cyclic", "n": 4, "gens": [1]})
    put("c4c.json", {"variant": "cyclic", "n": 4, "gens": [1], "letter": "c"})
    put("z.json", {"variant": "abelian", "rank": 1, "moduli": [], "gens": [[1]]})
    put("z12.json", {"variant": "abelian", "rank": 1, "moduli": [], "gens": [[1], [2]]})
    put(
        "ll_line.json",
        {
            "lamps": {"variant": "cyclic", "n": 2, "gens": [1], "letter": "a"},
            "base": {"variant": "abelian", "rank": 1, "moduli": [], "gens": [[1]]},
        },
    )
    put(
        "ll_fp82.json",
        {
            "lamps": {"variant": "cyclic", "n": 2, "gens": [1], "letter": "a"},
            "base": {
                "variant": "free_product",
                "H": {"variant": "cyclic", "n": 8, "gens": [1]},
                "K": {"variant": "cyclic", "n": 2, "gens": [1], "letter": "c"},
            },
        },
    )
    put("elem.json", {"lamps": [[[-1], 1], [[1], 1]], "position": [0]})
    put("elem_id.json", {"lamps": [], "position": [0]})
    return files


class TestWordlen:
    def test_line_example(self, specs):
        rc, out, _ = run(
            ["wordlen", "--group", specs["ll_line.json"], "--element", specs["elem.json"], "--verify"]
        )
        assert rc == 0 and out.splitlines()[0] == "6 exact"

    def test_identity(self, specs):
        rc, out, _ = run(
            ["wordlen", "--group", specs["ll_line.json"], "--element", specs["elem_id.json"]]
        )
        assert rc == 0 and out.splitlines()[0] == "0 exact"

    def test_malformed_element(self, specs, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"lamps": [["zzz", 1]], "position": [0]}')
        rc, _, err = run(["wordlen", "--group", specs["ll_line.json"], "--element", str(bad)])
        assert rc == 2 and "usage error" in err

    def test_generic_backend_flags_upper_bound(self, specs, tmp_path):
        king = tmp_path / "king.json"
        king.write_text(
            '{"lamps": {"variant": "cyclic", "n": 2, "gens": [1], "letter": "a"},'
            ' "base": {"variant": "abelian", "rank": 2, "moduli": [],'
            ' "gens": [[1,0],[0,1],[1,1],[1,-1]]}}'
        )
        elem = tmp_path / "king_elem.json"
        elem.write_text('{"lamps": [[[1, 1], 1]], "position": [0, 0]}')
        rc, out, _ = run(["wordlen", "--group", str(king), "--element", str(elem)])
        assert rc == 0 and out.splitlines()[0] == "<= 3 upper-bound"


class TestHamdiff:
    def test_cyclic_column(self, specs):
        rc, out, _ = run(["hamdiff", "--cyclic-range", "3:12"])
        assert rc == 0
        rows = [line.split(",") for line in out.strip().splitlines()[1:]]
        got = [int(r[2]) for r in rows]
        assert got == [n // 2 - 2 for n in range(3, 13)]

    def test_single_groups(self, specs):
        rc, out, _ = run(["hamdiff", "--group", specs["c2.json"]])
        assert rc == 0 and out.strip().splitlines()[1].split(",")[2] == "-1"

    def test_no_groups_usage_error(self):
        rc, _, err = run(["hamdiff"])
        assert rc == 2

    def test_size_cap_exit_code(self, tmp_path):
        big = tmp_path / "c30.json"
        big.write_text('{"variant": "cyclic", "n": 30, "gens": [1]}')
        rc, _, err = run(["hamdiff", "--group", str(big)])
        assert rc == 3 and "resource cap" in err


class TestVerdict:
    def test_section51(self, specs):
        rc, out, _ = run(["verdict", "--H", specs["c8.json"], "--K", specs["c2.json"], "--verify"])
        assert rc == 0
        record = json.loads(out)
        assert record["verdict"] == "uniformly_bounded" and record["sum"] == 1

    def test_unbounded_pair(self, specs):
        rc, out, _ = run(["verdict", "--H", specs["c4.json"], "--K", specs["c4c.json"]])
        record = json.loads(out)
        assert rc == 0 and record["verdict"] == "unbounded" and record["sum"] == 0

    def test_missing_file(self, specs):
        rc, _, err = run(["verdict", "--H", "/nope.json", "--K", specs["c2.json"]])
        assert rc == 2


class TestDepthProfile:
    def test_radius_zero_row(self, specs):
        rc, out, _ = run(
            ["depth-profile", "--group", specs["ll_line.json"], "--radius", "0", "--kmax", "2"]
        )
        assert rc == 0
        lines = out.strip().splitlines()
        assert lines[1].startswith("-;0,0,0")

    def test_partial_exit_code(self, specs):
        rc, out, _ = run(
            [
                "depth-profile", "--group", specs["ll_fp82.json"],
                "--radius", "8", "--kmax", "4", "--cap", "200",
            ]
        )
        assert rc == 3 and "partial_enumeration" in out

    def test_json_format(self, specs):
        rc, out, _ = run(
            [
                "depth-profile", "--group", specs["ll_line.json"],
                "--radius", "3", "--kmax", "3", "--format", "json",
            ]
        )
        payload = json.loads(out)
        assert rc == 0 and payload["complete"] and payload["rows"]


class TestQh:
    def test_certificate(self, specs):
        rc, out, _ = run(
            ["qh", "--group", specs["z12.json"], "--nmax", "2", "--M", "1",
             "--strategy", "ball-exact", "--verify"]
        )
        assert rc == 0 and json.loads(out)["kind"] == "qh_certificate"

    def test_refutation_table(self, specs):
        rc, out, _ = run(["qh", "--group", specs["z.json"], "--nmax", "4"])
        payload = json.loads(out)
        assert rc == 0 and payload["kind"] == "qh_refutation"
        assert [r[3] for r in payload["rows"]] == [1, 3, 5, 7]


class TestExportGraph:
    def test_cube_dot(self):
        rc, out, _ = run(["export-graph", "--cube", "4,3"])
        assert rc == 0 and out.count(" -- ") == 17

    def test_cycle_dot(self, specs):
        rc, out, _ = run(["export-graph", "--group", specs["c8.json"]])
        assert rc == 0 and out.count(" -- ") == 8

    def test_ball_adjacency(self, specs):
        rc, out, _ = run(
            ["export-graph", "--group", specs["c8.json"], "--radius", "2", "--format", "adj"]
        )
        assert rc == 0

    def test_infinite_needs_radius(self, specs):
        rc, _, err = run(["export-graph", "--group", specs["z.json"]])
        assert rc == 2


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, specs):
        cmds = [
            ["hamdiff", "--cyclic-range", "3:10"],
            ["verdict", "--H", specs["c8.json"], "--K", specs["c2.json"]],
            ["depth-profile", "--group", specs["ll_line.json"], "--radius", "4", "--kmax", "3"],
            ["qh", "--group", specs["z.json"], "--nmax", "3"],
            ["export-graph", "--cube", "3,3"],
        ]
        for cmd in cmds:
            assert run(cmd) == run(cmd)

    def test_out_file(self, specs, tmp_path):
        target = tmp_path / "graph.dot"
        rc, out, _ = run(["export-graph", "--cube", "2,2", "--out", str(target)])
        assert rc == 0 and out == "" and target.read_text().startswith("graph G")
