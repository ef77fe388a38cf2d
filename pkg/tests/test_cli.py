import os
import subprocess
import sys

import numpy as np
import pytest

from zfmm import pointio
from zfmm.cli import main


def run_cli(args):
    return main(list(args))


class TestPointIO:
    def test_round_trip_bytes(self, tmp_path, rng):
        pts = rng.normal(size=(100, 3)) + 0.1j * rng.normal(size=(100, 3))
        q = rng.normal(size=100) + 1j * rng.normal(size=100)
        p1 = tmp_path / "a.zfmm"
        p2 = tmp_path / "b.zfmm"
        pointio.write_points(p1, pts, q)
        rp, rq = pointio.read_points(p1)
        pointio.write_points(p2, rp, rq)
        assert p1.read_bytes() == p2.read_bytes()
        assert np.abs(rp - pts).max() == 0.0
        assert np.abs(rq - q).max() == 0.0

    def test_header_layout(self, tmp_path):
        pts = np.zeros((3, 2), complex)
        path = tmp_path / "c.zfmm"
        pointio.write_points(path, pts)
        raw = path.read_bytes()
        assert raw[:4] == b"ZFMM"
        assert len(raw) == pointio.HEADER.size + 3 * 2 * 2 * 8

    def test_result_round_trip(self, tmp_path, rng):
        u = rng.normal(size=64) + 1j * rng.normal(size=64)
        path = tmp_path / "r.zfmm"
        pointio.write_result(path, u, 2)
        assert np.abs(pointio.read_result(path) - u).max() == 0.0

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "pts.csv"
        rows = np.array([[1.0, 0.1, 2.0, -0.2], [0.5, 0.0, 1.5, 0.3]])
        np.savetxt(path, rows, delimiter=",")
        pts, q = pointio.read_points(path)
        assert q is None
        assert pts[0, 0] == 1.0 + 0.1j
        assert pts[1, 1] == 1.5 + 0.3j


class TestCommands:
    def test_gen_round_trip_and_defaults(self, tmp_path):
        out = tmp_path / "w2.zfmm"
        assert run_cli(["gen", "--family", "wobble2d", "--n", "1000",
                        "--out", str(out), "--charges"]) == 0
        pts, q = pointio.read_points(out)
        assert pts.shape == (1000, 2)
        assert q is not None
        # default parameters reproduce the library generator exactly
        from zfmm.oracle import gen_wobble2d

        assert np.abs(pts - gen_wobble2d(1000)).max() == 0.0

    def test_gen_seed_determinism(self, tmp_path):
        a, b = tmp_path / "a.zfmm", tmp_path / "b.zfmm"
        args = ["gen", "--family", "wobble2d", "--n", "200", "--charges",
                "--seed", "9"]
        run_cli(args + ["--out", str(a)])
        run_cli(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_gen_invalid_params(self, tmp_path):
        assert run_cli(["gen", "--family", "wobble2d", "--n", "0",
                        "--out", str(tmp_path / "x.zfmm")]) == 2
        assert run_cli(["gen", "--family", "wobble2d", "--n", "10", "--a", "-1",
                        "--out", str(tmp_path / "x.zfmm")]) == 2

    def test_eval_single_pair_matches_kernel(self, tmp_path):
        src = tmp_path / "s.zfmm"
        tgt = tmp_path / "t.zfmm"
        out = tmp_path / "u.zfmm"
        pointio.write_points(src, np.array([[0.2, 0.1]], complex), np.array([1.0 + 0j]))
        pointio.write_points(tgt, np.array([[4.0, 2.0]], complex))
        assert run_cli(["eval", "--kernel", "lap2d", "--eps", "1e-9",
                        "--src", str(src), "--targ", str(tgt), "--out", str(out)]) == 0
        u = pointio.read_result(out)
        r = np.sqrt((4.0 - 0.2) ** 2 + (2.0 - 0.1) ** 2)
        assert u[0] == pytest.approx(np.log(r), rel=1e-13)

    def test_eval_check_pipeline(self, tmp_path):
        pts_f = tmp_path / "pts.zfmm"
        run_cli(["gen", "--family", "wobble2d", "--n", "1500", "--charges",
                 "--out", str(pts_f)])
        uf = tmp_path / "u.zfmm"
        ud = tmp_path / "u0.zfmm"
        assert run_cli(["eval", "--kernel", "lap2d", "--eps", "1e-7",
                        "--src", str(pts_f), "--targ", str(pts_f),
                        "--out", str(uf)]) == 0
        assert run_cli(["direct", "--kernel", "lap2d", "--src", str(pts_f),
                        "--targ", str(pts_f), "--out", str(ud)]) == 0
        u = pointio.read_result(uf)
        u0 = pointio.read_result(ud)
        _, q = pointio.read_points(pts_f)
        from zfmm.oracle import rel_error

        assert rel_error(u, u0, q) <= 3e-7
        assert run_cli(["check", "--fmm-out", str(uf), "--direct-out", str(ud),
                        "--charges", str(pts_f)]) == 0

    def test_check_self_is_zero(self, tmp_path, capsys):
        pts_f = tmp_path / "p.zfmm"
        run_cli(["gen", "--family", "wobble2d", "--n", "50", "--charges",
                 "--out", str(pts_f)])
        u = tmp_path / "v.zfmm"
        pointio.write_result(u, np.ones(50, complex), 2)
        run_cli(["check", "--fmm-out", str(u), "--direct-out", str(u),
                 "--charges", str(pts_f)])
        outp = capsys.readouterr().out
        assert "relerr=0.0" in outp

    def test_lipschitz_exit_code(self, tmp_path):
        src = tmp_path / "bad.zfmm"
        rng = np.random.default_rng(0)
        re = rng.normal(size=(200, 2))
        pts = re + 0.9j * np.sin(3 * re)  # slope ~2.7: inadmissible
        pointio.write_points(src, pts, np.ones(200, complex))
        code = run_cli(["eval", "--kernel", "lap2d", "--eps", "1e-6",
                        "--src", str(src), "--targ", str(src),
                        "--out", str(tmp_path / "u.zfmm")])
        assert code == 3

    def test_threads_flag_deterministic(self, tmp_path):
        pts_f = tmp_path / "p.zfmm"
        run_cli(["gen", "--family", "wobble2d", "--n", "800", "--charges",
                 "--out", str(pts_f)])
        u1, u2 = tmp_path / "u1.zfmm", tmp_path / "u2.zfmm"
        base = ["eval", "--kernel", "lap2d", "--eps", "1e-7", "--deterministic",
                "--src", str(pts_f), "--targ", str(pts_f)]
        run_cli(base + ["--threads", "1", "--out", str(u1)])
        run_cli(base + ["--threads", "8", "--out", str(u2)])
        assert u1.read_bytes() == u2.read_bytes()

    def test_bench_csv(self, tmp_path):
        out = tmp_path / "bench.csv"
        assert run_cli(["bench", "--kernel", "lap2d", "--eps", "1e-6",
                        "--n-list", "400,800", "--out", str(out)]) == 0
        rows = out.read_text().strip().split("\n")
        assert rows[0] == "n,t_fmm_seconds,t_direct_seconds,relerr,P_max,k"
        assert len(rows) == 3
        for row in rows[1:]:
            rel = float(row.split(",")[3])
            assert rel <= 3e-6

    def test_console_entry_point(self, tmp_path):
        # the installed script must exist and respond to --help
        res = subprocess.run(
            [sys.executable, "-m", "zfmm.cli", "--help"],
            capture_output=True, text=True,
        )
        assert res.returncode == 0
        assert "gen" in res.stdout and "bench" in res.stdout


def test_term_limit_exit_code(tmp_path):
    pts_f = tmp_path / "p.zfmm"
    run_cli(["gen", "--family", "wobble2d", "--n", "3000", "--charges",
             "--out", str(pts_f)])
    code = run_cli(["eval", "--kernel", "helm2d", "--eps", "1e-9",
                    "--wavenumber", "500.0",
                    "--src", str(pts_f), "--targ", str(pts_f),
                    "--out", str(tmp_path / "u.zfmm")])
    assert code == 4
