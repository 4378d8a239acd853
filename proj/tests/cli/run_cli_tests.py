"""Command-line checks: exit codes, CSV schemas, golden outputs, determinism.

usage: run_cli_tests.py HEMLAB_EXE SOURCE_DIR [--update]
"""

import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest

EXE = None
SRC = None
UPDATE = False

GOLDEN = [
    ("series_two_bus.csv", ["series", "cases/two_bus.json", "--terms", "6"]),
    ("roots_two_bus_256.csv",
     ["roots", "cases/two_bus.json", "--terms", "10", "--precision-bits", "256"]),
    ("sweep_two_bus_cf.csv",
     ["sweep", "cases/two_bus_cf.json", "--embedding", "classical", "--from", "0", "--to", "2",
      "--steps", "4", "--terms", "30"]),
    ("solve_five_bus_ps.json", ["solve", "cases/five_bus_ps.json"]),
    ("snbp_two_bus.txt",
     ["snbp", "cases/two_bus.json", "--embedding", "classical", "--precision-bits", "256"]),
]


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("HEMLAB_PRECISION_BITS", None)
    if env:
        full_env.update(env)
    return subprocess.run([EXE, *args], cwd=SRC, capture_output=True, text=True, env=full_env)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class Golden(unittest.TestCase):
    def test_golden_outputs(self):
        for name, args in GOLDEN:
            with self.subTest(name=name):
                p = run(*args)
                self.assertEqual(p.returncode, 0, p.stderr)
                path = os.path.join(SRC, "tests", "cli", "golden", name)
                if UPDATE:
                    with open(path, "w") as f:
                        f.write(p.stdout)
                    continue
                with open(path) as f:
                    self.assertEqual(p.stdout, f.read())

    def test_deterministic(self):
        for args in (["solve", "cases/two_bus_98.json", "--embedding", "classical", "--history"],
                     ["roots", "cases/five_bus_lossy.json", "--terms", "20"]):
            a, b = run(*args), run(*args)
            self.assertEqual(a.stdout, b.stdout)


class Schemas(unittest.TestCase):
    def test_series_csv(self):
        p = run("series", "cases/five_bus_ps.json", "--terms", "4")
        self.assertEqual(p.returncode, 0)
        r = rows(p.stdout)
        self.assertEqual(list(r[0].keys()), ["n", "bus_id", "re", "im"])
        self.assertEqual(len(r), 4 * 5)
        self.assertEqual({int(x["n"]) for x in r}, {0, 1, 2, 3})

    def test_roots_csv(self):
        p = run("roots", "cases/two_bus.json", "--terms", "12")
        self.assertEqual(p.returncode, 0)
        r = rows(p.stdout)
        self.assertEqual(list(r[0].keys()), ["kind", "plane", "re", "im", "spurious", "M"])
        self.assertTrue(all(x["kind"] in ("pole", "zero") for x in r))
        self.assertTrue(all(x["plane"] in ("alpha", "inverse_alpha") for x in r))
        self.assertTrue(all(x["spurious"] in ("true", "false") for x in r))
        self.assertTrue(all(x["M"] == "5" for x in r))
        # Each alpha-plane root has its image in the inverse plane.
        for kind in ("pole", "zero"):
            a = [complex(float(x["re"]), float(x["im"])) for x in r
                 if x["kind"] == kind and x["plane"] == "alpha"]
            b = [complex(float(x["re"]), float(x["im"])) for x in r
                 if x["kind"] == kind and x["plane"] == "inverse_alpha"]
            self.assertEqual(len(a), len(b))
            for z, w in zip(a, b):
                self.assertLess(abs(1 / z - w), 1e-9 * abs(w) + 1e-15)

    def test_sweep_csv(self):
        p = run("sweep", "cases/two_bus.json", "--from", "0", "--to", "1", "--steps", "10",
                "--terms", "20")
        self.assertEqual(p.returncode, 0)
        r = rows(p.stdout)
        self.assertEqual(list(r[0].keys()), ["alpha", "bus", "vmag", "vang", "flagged"])
        self.assertEqual(len(r), 11 * 2)
        load = [float(x["vmag"]) for x in r if x["bus"] == "2"]
        self.assertTrue(all(b < a for a, b in zip(load, load[1:])))

    def test_cf_output(self):
        p = run("cf", "cases/two_bus_cf.json", "--embedding", "classical", "--samples", "6",
                "--precision-bits", "256")
        self.assertEqual(p.returncode, 0, p.stderr)
        lines = p.stdout.strip().splitlines()
        self.assertEqual(lines[0], "alpha_hat,cf")
        self.assertEqual(len(lines), 1 + 6 + 1)
        self.assertTrue(lines[-1].startswith("# bcc_estimate,"))
        cf = [float(x.split(",")[1]) for x in lines[1:-1]]
        self.assertTrue(all(b > a for a, b in zip(cf, cf[1:])))
        self.assertTrue(math.isfinite(float(lines[-1].split(",")[1])))

    def test_solve_json_and_out(self):
        with tempfile.TemporaryDirectory() as d:
            out = os.path.join(d, "r.json")
            p = run("solve", "cases/two_bus.json", "--precision-bits", "128", "--timings",
                    "--out", out)
            self.assertEqual(p.returncode, 0, p.stderr)
            with open(out) as f:
                j = json.load(f)
        self.assertEqual(j["status"], "CONVERGED")
        self.assertEqual(j["precision_bits"], 128)
        self.assertIn("timings", j)
        self.assertIn("re_text", j["voltages"][1])
        self.assertLess(j["mismatch"]["max_s"], 1e-6)

    def test_precision_env(self):
        p = run("solve", "cases/two_bus.json", env={"HEMLAB_PRECISION_BITS": "96"})
        self.assertEqual(json.loads(p.stdout)["precision_bits"], 96)
        p = run("solve", "cases/two_bus.json", "--precision-bits", "64",
                env={"HEMLAB_PRECISION_BITS": "96"})
        self.assertEqual(json.loads(p.stdout)["precision_bits"], 64)


class ExitCodes(unittest.TestCase):
    def test_converged_is_zero(self):
        self.assertEqual(run("solve", "cases/slack_only.json").returncode, 0)

    def test_not_converged_is_one_with_json_error(self):
        p = run("solve", "cases/two_bus_cf.json", "--embedding", "classical", "--alpha", "3")
        self.assertEqual(p.returncode, 1)
        self.assertNotEqual(json.loads(p.stdout)["status"], "CONVERGED")
        self.assertIn("error", json.loads(p.stderr))

    def test_shunt_cap_canonical_reports_real_pole(self):
        p = run("solve", "cases/shunt_cap_two_bus.json", "--embedding", "canonical")
        self.assertEqual(p.returncode, 1)
        j = json.loads(p.stdout)
        self.assertEqual(j["status"], "SINGULARITY_ON_PATH")
        self.assertAlmostEqual(j["real_pole"], 0.5, places=6)

    def test_missing_file(self):
        p = run("solve", "cases/no_such_case.json")
        self.assertEqual(p.returncode, 1)
        self.assertEqual(json.loads(p.stderr)["error"], "ParseError")

    def test_usage_errors(self):
        self.assertEqual(run("solve", "cases/two_bus.json", "--embedding", "bogus").returncode, 2)
        self.assertEqual(run("solve", "cases/two_bus.json", "--max-terms", "2").returncode, 2)
        self.assertEqual(run("sweep", "cases/two_bus.json").returncode, 2)
        self.assertEqual(run("frobnicate").returncode, 2)

    def test_snbp_without_load(self):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            with open(os.path.join(SRC, "cases", "two_bus.json")) as src:
                case = json.load(src)
            for b in case["buses"]:
                b.pop("p_load", None)
                b.pop("q_load", None)
            json.dump(case, f)
        try:
            p = run("snbp", f.name, "--terms", "4")
            self.assertEqual(p.returncode, 1)
            self.assertEqual(json.loads(p.stderr)["error"], "NoRealPole")
        finally:
            os.unlink(f.name)


if __name__ == "__main__":
    EXE = os.path.abspath(sys.argv[1])
    SRC = os.path.abspath(sys.argv[2])
    UPDATE = "--update" in sys.argv[3:]
    unittest.main(argv=[sys.argv[0], "-v"])
