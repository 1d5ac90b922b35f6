"""Contract tests for the locstat command-line tool.

Usage: test_cli.py <locstat-binary> <configs-dir>
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

BINARY = ""
CONFIGS = Path()

FAST_RATE = """\
name: cli_fast_rate
kind: rate
seed: 3
replications: 10
n_list: [200, 800]
model: {type: recursive, a: 0.5}
bandwidth: {rule: power, c: 1.0, exponent: 0.2}
rate:
  estimator: kernel_regression
  trend: [0.0, 1.0]
  grid: 11
  noise_scale: 0.0
"""


def run(*args, env=None, cwd=None):
    return subprocess.run([BINARY, *args], capture_output=True, text=True, env=env, cwd=cwd, timeout=600)


class CliContract(unittest.TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp(prefix="locstat-cli-"))
        self.cfg = self.tmp / "rate.yaml"
        self.cfg.write_text(FAST_RATE)

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_verify_passing_config_writes_report_and_manifest(self):
        out = self.tmp / "out"
        r = run("verify", "-c", str(self.cfg), "-o", str(out))
        self.assertEqual(r.returncode, 0, r.stderr + r.stdout)
        report = json.loads((out / "report.json").read_text())
        self.assertTrue(report["passed"])
        self.assertTrue((out / "report.csv").read_text().startswith("section,n,metric,value\n"))
        manifest = json.loads((out / "manifest.json").read_text())
        self.assertEqual(manifest["subcommand"], "verify")
        self.assertEqual(manifest["seed"], 3)
        self.assertEqual(manifest["config_hash"], report["provenance"]["config_hash"])
        self.assertIn("report.json", manifest["files"])
        self.assertIn("PASS", r.stdout)

    def test_builtin_negative_control_exits_one(self):
        r = run("verify", "--builtin-negative-control", "-o", str(self.tmp / "neg"))
        self.assertEqual(r.returncode, 1, r.stderr + r.stdout)
        self.assertIn("FAIL", r.stdout)

    def test_negative_control_config_exits_one(self):
        r = run("verify", "-c", str(CONFIGS / "negative_control.yaml"), "-o", str(self.tmp / "neg"))
        self.assertEqual(r.returncode, 1, r.stderr + r.stdout)

    def test_missing_config_exits_two(self):
        r = run("verify", "-c", str(self.tmp / "nope.yaml"))
        self.assertEqual(r.returncode, 2)

    def test_usage_errors_exit_two(self):
        self.assertEqual(run("frobnicate").returncode, 2)
        self.assertEqual(run("verify", "-c", str(self.cfg), "--bogus").returncode, 2)
        self.assertEqual(run().returncode, 2)
        self.assertEqual(run("verify").returncode, 2)
        self.assertEqual(run("verify", "-c", str(self.cfg), "--builtin-negative-control").returncode, 2)

    def test_bad_key_reports_line_number(self):
        bad = self.tmp / "bad.yaml"
        bad.write_text(FAST_RATE.replace("  grid: 11\n", "  grid: 11\n  gird: 3\n"))
        r = run("verify", "-c", str(bad), "-o", str(self.tmp / "o"))
        self.assertEqual(r.returncode, 2)
        self.assertIn(f"{bad}:12:", r.stderr)
        self.assertIn("/rate/gird", r.stderr)

    def test_yaml_syntax_error_exits_two(self):
        bad = self.tmp / "broken.yaml"
        bad.write_text("kind: rate\nmodel: {type: recursive\n")
        r = run("verify", "-c", str(bad), "-o", str(self.tmp / "o"))
        self.assertEqual(r.returncode, 2)
        self.assertIn("line", r.stderr)

    def test_output_directory_from_environment(self):
        env = dict(os.environ, LOCSTAT_OUT=str(self.tmp / "from-env"))
        r = run("verify", "-c", str(self.cfg), env=env)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue((self.tmp / "from-env" / "report.json").exists())

    def test_default_output_directory(self):
        env = {k: v for k, v in os.environ.items() if k != "LOCSTAT_OUT"}
        r = run("verify", "-c", str(self.cfg), env=env, cwd=self.tmp)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue((self.tmp / "locstat-out" / "report.json").exists())

    def test_reports_replay_byte_identically_across_jobs(self):
        a, b = self.tmp / "a", self.tmp / "b"
        cfg = CONFIGS / "rate_regression.yaml"
        self.assertEqual(run("verify", "-c", str(cfg), "-o", str(a), "-j", "1").returncode, 0)
        self.assertEqual(run("verify", "-c", str(cfg), "-o", str(b), "-j", "3").returncode, 0)
        for name in ("report.json", "report.csv"):
            self.assertEqual((a / name).read_bytes(), (b / name).read_bytes(), name)

    def test_seed_override(self):
        out = self.tmp / "seeded"
        self.assertEqual(run("verify", "-c", str(self.cfg), "-o", str(out), "-s", "99").returncode, 0)
        self.assertEqual(json.loads((out / "manifest.json").read_text())["seed"], 99)

    def test_simulate_depmeasure_estimate(self):
        for sub, cfg, files in (
            ("simulate", "simulate_tvarch.yaml", ["path.csv"]),
            ("depmeasure", "depmeasure_linear.yaml", ["delta.csv", "calculus.csv"]),
            ("estimate", "estimate_mestimate.yaml", ["estimate.csv"]),
        ):
            out = self.tmp / sub
            r = run(sub, "-c", str(CONFIGS / cfg), "-o", str(out))
            self.assertEqual(r.returncode, 0, r.stderr)
            for f in files + ["summary.json", "manifest.json"]:
                self.assertTrue((out / f).exists(), f"{sub}: {f}")
            self.assertEqual(json.loads((out / "manifest.json").read_text())["subcommand"], sub)

    def test_version_flag(self):
        r = run("--version")
        self.assertEqual(r.returncode, 0)
        self.assertRegex(r.stdout.strip(), r"^\d+\.\d+\.\d+$")


if __name__ == "__main__":
    BINARY = str(Path(sys.argv[1]).resolve())
    CONFIGS = Path(sys.argv[2])
    unittest.main(argv=[sys.argv[0], "-v"])
