"""End-to-end checks of the wedge command-line tool.

Usage: cli_test.py WEDGE_BINARY SCHEMA_DIR
"""

import csv
import io
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

BIN = ""
SCHEMAS = Path()
R23 = "0.66666666666666663"


def run(*args, cwd=None, env=None):
    return subprocess.run([BIN, *args], capture_output=True, text=True, cwd=cwd, env=env,
                          timeout=600)


def validator(name):
    registry = Registry()
    for path in SCHEMAS.glob("*.schema.json"):
        registry = registry.with_resource(path.name, Resource.from_contents(json.loads(path.read_text())))
    schema = json.loads((SCHEMAS / name).read_text())
    return jsonschema.Draft202012Validator(schema, registry=registry)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class Classify(unittest.TestCase):
    TABLE = [
        ("0.5", "1", R23, "1AbIIii"),
        ("17.5", "6", R23, "1Aa"),
        ("13.5", "6", R23, "1AbIIi"),
        ("1", "1", "2", "2AII"),
        ("1.5", "1", R23, "1AbIii"),
        ("3.25", "1.5", R23, "1AbIi"),
        ("2.5", "1", "2", "2AI"),
        ("-1", "1", R23, "1Bii"),
        ("-3", "1", R23, "1Bi"),
        ("-1", "1", "2", "2B"),
    ]

    def test_examples(self):
        v = validator("classify.schema.json")
        r = run("classify", "--eps", "0.5", "--delta", "1", "--R", "0.6667")
        self.assertEqual(r.returncode, 0, r.stderr)
        out = json.loads(r.stdout)
        v.validate(out)
        self.assertEqual(out["case"], "1AbIIii")
        r = run("classify", "--eps", "-1", "--delta", "1", "--R", "2")
        self.assertEqual(json.loads(r.stdout)["case"], "2B")
        self.assertEqual(run("classify", "--eps", "0", "--delta", "1", "--R", "0.5").returncode, 3)

    def test_all_cases(self):
        v = validator("classify.schema.json")
        for eps, delta, R, label in self.TABLE:
            with self.subTest(label=label):
                r = run("classify", "--eps", eps, "--delta", delta, "--R", R)
                self.assertEqual(r.returncode, 0, r.stderr)
                out = json.loads(r.stdout)
                v.validate(out)
                self.assertEqual(out["case"], label)

    def test_bad_input(self):
        self.assertEqual(run("classify", "--eps", "0.5", "--delta", "1", "--R", "1").returncode, 2)
        self.assertEqual(run("classify", "--eps", "0.5", "--delta", "-1", "--R", "2").returncode, 2)
        self.assertEqual(run("classify", "--eps", "0.5", "--delta", "1").returncode, 2)
        self.assertEqual(run("classify", "--bogus", "1").returncode, 2)


class Solve(unittest.TestCase):
    def test_default_case(self):
        v = validator("wedge.schema.json")
        with tempfile.TemporaryDirectory() as d:
            r = run("solve", "--eps", "0.5", "--delta", "1", "--R", R23, "--lambda", "0.05",
                    "--gamma", "0.05", "--out-dir", d)
            self.assertEqual(r.returncode, 0, r.stderr)
            w = json.loads(Path(d, "wedge.json").read_text())
            v.validate(w)
            self.assertEqual(w, json.loads(r.stdout))
            self.assertTrue(0 < w["q_star"] < 0.75 < w["q_upper"] < 1)
            table = rows(Path(d, "value.csv").read_text())
            self.assertEqual(list(table[0].keys()), ["q", "p", "n", "m", "ell", "G", "C_coeff"])
            self.assertEqual(len(table), 2048)
            self.assertEqual(float(table[0]["q"]), w["q_star"])
            self.assertEqual(float(table[-1]["q"]), w["q_upper"])

    def test_output_is_byte_identical(self):
        args = ["solve", "--eps", "1.5", "--delta", "1", "--R", R23, "--xi", "0.3", "--nodes", "256"]
        with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
            ra = run(*args, "--out-dir", a, env={**os.environ, "WEDGE_THREADS": "1"})
            rb = run(*args, "--out-dir", b, env={**os.environ, "WEDGE_THREADS": "4"})
            self.assertEqual(ra.returncode, 0, ra.stderr)
            self.assertEqual(ra.stdout, rb.stdout)
            for f in ("wedge.json", "value.csv"):
                self.assertEqual(Path(a, f).read_bytes(), Path(b, f).read_bytes())

    def test_seventeen_digits(self):
        r = run("solve", "--eps", "0.5", "--delta", "1", "--R", R23, "--xi", "0.1", "--out-dir",
                tempfile.gettempdir())
        self.assertIn('"xi": 0.10000000000000001', r.stdout)

    def test_ill_posed_gates(self):
        ev = validator("error.schema.json")
        r = run("solve", "--eps", "17.5", "--delta", "6", "--R", R23, "--xi", "1")
        self.assertEqual(r.returncode, 5)
        ev.validate(json.loads(r.stdout))

        c = json.loads(run("classify", "--eps", "13.5", "--delta", "6", "--R", R23).stdout)
        xi_under = c["thresholds"]["xi_under"]
        self.assertEqual(c["wellposedness"], "Conditional")
        r = run("solve", "--eps", "13.5", "--delta", "6", "--R", R23, "--xi", repr(0.5 * xi_under))
        self.assertEqual(r.returncode, 4)
        err = json.loads(r.stdout)
        ev.validate(err)
        self.assertEqual(err["error"], "IllPosedForThisXi")
        self.assertAlmostEqual(err["xi_under"], xi_under, delta=1e-12)
        self.assertIn(repr(xi_under)[:8], r.stderr)

    def test_cost_inputs(self):
        self.assertEqual(run("solve", "--eps", "0.5", "--delta", "1", "--R", R23).returncode, 2)
        self.assertEqual(run("solve", "--eps", "0.5", "--delta", "1", "--R", R23, "--xi", "0.1",
                             "--lambda", "0.1").returncode, 2)
        self.assertEqual(run("solve", "--eps", "0.5", "--delta", "1", "--R", R23, "--gamma",
                             "1.5").returncode, 2)


class Curves(unittest.TestCase):
    def test_default_family(self):
        r = run("curves", "--eps", "0.5", "--delta", "1", "--R", R23, "--r",
                "0.1,0.2,0.3,0.4,0.5,0.6,0.7")
        self.assertEqual(r.returncode, 0, r.stderr)
        data = rows(r.stdout)
        self.assertEqual(list(data[0].keys()), ["r", "q", "n", "m", "ell", "status"])
        self.assertEqual(len({row["r"] for row in data}), 7)
        self.assertTrue(all(row["status"] == "ok" for row in data))

    def test_all_hit_zero(self):
        r = run("curves", "--eps", "17.5", "--delta", "6", "--R", R23, "--r", "0.05,0.1,0.15,0.19")
        data = rows(r.stdout)
        self.assertEqual(len({row["r"] for row in data}), 4)
        self.assertTrue(all(row["status"] == "hit_zero" for row in data))
        # Every curve ends on the root of ell(q) = 1 + l1 q + l2 q^2 in (0, 1).
        k = 36 / 2 * (1 / 3)
        l1 = -17.5 / 3 + k
        l2 = 36 / 2 * (2 / 3) * (1 / 3) - k
        p_plus = (-l1 - (l1 * l1 - 4 * l2) ** 0.5) / (2 * l2)
        self.assertTrue(0 < p_plus < 1)
        ends = {row["r"]: float(row["q"]) for row in data}
        for q in ends.values():
            self.assertAlmostEqual(q, p_plus, delta=1e-6)

    def test_start_below_zero_is_marked(self):
        r = run("curves", "--eps", "17.5", "--delta", "6", "--R", R23, "--r", "0.7")
        self.assertEqual(r.returncode, 0)
        self.assertEqual(rows(r.stdout)[0]["status"], "invalid_start")

    def test_empty_list(self):
        r = run("curves", "--eps", "0.5", "--delta", "1", "--R", R23)
        self.assertEqual(r.returncode, 0)
        self.assertEqual(r.stdout, "r,q,n,m,ell,status\n")
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump({"eps": 0.5, "delta": 1, "R": 2 / 3, "r": []}, f)
        try:
            r = run("curves", "--config", f.name)
            self.assertEqual(r.returncode, 0, r.stderr)
            self.assertEqual(r.stdout, "r,q,n,m,ell,status\n")
        finally:
            os.unlink(f.name)


class Sweep(unittest.TestCase):
    def test_plateau_above_xi_bar(self):
        c = json.loads(run("classify", "--eps", "1.5", "--delta", "1", "--R", R23).stdout)
        xb = c["thresholds"]["xi_bar"]
        grid = ",".join(repr(f * xb) for f in (0.5, 1.0, 2.0, 4.0))
        r = run("sweep", "--axis", "xi", "--eps", "1.5", "--delta", "1", "--R", R23, "--grid", grid)
        self.assertEqual(r.returncode, 0, r.stderr)
        data = rows(r.stdout)
        self.assertEqual(len(data), 4)
        top = [float(row["q_upper"]) for row in data]
        self.assertLess(top[0], top[1])
        for t in top[2:]:
            self.assertAlmostEqual(t, top[1], delta=1e-8)

    def test_ill_posed_points_are_marked(self):
        c = json.loads(run("classify", "--eps", "13.5", "--delta", "6", "--R", R23).stdout)
        xu = c["thresholds"]["xi_under"]
        grid = ",".join(repr(f * xu) for f in (0.5, 2.0))
        r = run("sweep", "--axis", "xi", "--eps", "13.5", "--delta", "6", "--R", R23, "--grid", grid)
        self.assertEqual(r.returncode, 0, r.stderr)
        data = rows(r.stdout)
        self.assertEqual([row["status"] for row in data], ["ill_posed_for_xi", "ok"])
        self.assertEqual(data[0]["q_star"], "")

    def test_drift_axis(self):
        r = run("sweep", "--axis", "eps", "--delta", "1", "--R", R23, "--lambda", "0.05",
                "--gamma", "0.05", "--grid", "-0.3,0,0.3")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual([row["status"] for row in rows(r.stdout)], ["ok", "boundary", "ok"])

    def test_bad_axis(self):
        r = run("sweep", "--axis", "R", "--eps", "0.5", "--delta", "1", "--R", R23, "--grid", "0.1")
        self.assertEqual(r.returncode, 2)


class Simulate(unittest.TestCase):
    ARGS = ["simulate", "--eps", "0.5", "--delta", "1", "--R", R23, "--lambda", "0.05", "--gamma",
            "0.05", "--paths", "200", "--dt", "0.01", "--horizon", "5", "--seed", "7"]

    def test_schema_and_determinism(self):
        v = validator("simulate.schema.json")
        a = run(*self.ARGS)
        b = run(*self.ARGS, env={**os.environ, "WEDGE_THREADS": "3"})
        self.assertEqual(a.returncode, 0, a.stderr)
        self.assertEqual(a.stdout, b.stdout)
        out = json.loads(a.stdout)
        v.validate(out)
        self.assertEqual(out["result"]["first_action"], "NoTrade")
        self.assertEqual(out["result"]["insolvent_paths"], 0)

    def test_dt_study(self):
        v = validator("simulate.schema.json")
        r = run(*self.ARGS, "--dt-study", "0.02,0.01")
        self.assertEqual(r.returncode, 0, r.stderr)
        out = json.loads(r.stdout)
        v.validate(out)
        self.assertEqual([run_["dt"] for run_ in out["dt_study"]["runs"]], [0.02, 0.01])

    def test_bad_config(self):
        self.assertEqual(run(*self.ARGS[:-2], "--seed", "1.5").returncode, 2)
        self.assertEqual(run(*self.ARGS, "--horizon", "0.015").returncode, 2)
        self.assertEqual(run(*self.ARGS, "--x0", "1").returncode, 2)


class Config(unittest.TestCase):
    def config(self, payload):
        f = tempfile.NamedTemporaryFile("w", suffix=".json", delete=False)
        json.dump(payload, f)
        f.close()
        self.addCleanup(os.unlink, f.name)
        return f.name

    def test_config_matches_flags(self):
        payload = {"eps": 0.5, "delta": 1, "R": 2 / 3}
        validator("config.schema.json").validate(payload)
        a = run("classify", "--config", self.config(payload))
        b = run("classify", "--eps", "0.5", "--delta", "1", "--R", R23)
        self.assertEqual(a.returncode, 0, a.stderr)
        self.assertEqual(a.stdout, b.stdout)

    def test_flags_override_config(self):
        path = self.config({"eps": -1, "delta": 1, "R": 2})
        r = run("classify", "--config", path, "--eps", "1")
        self.assertEqual(json.loads(r.stdout)["case"], "2AII")

    def test_unknown_key_rejected(self):
        payload = {"eps": 0.5, "delta": 1, "R": 2 / 3, "colour": "red"}
        with self.assertRaises(jsonschema.ValidationError):
            validator("config.schema.json").validate(payload)
        r = run("classify", "--config", self.config(payload))
        self.assertEqual(r.returncode, 2)
        self.assertIn("colour", r.stderr)

    def test_wrong_types_rejected(self):
        for payload in ({"eps": "0.5", "delta": 1, "R": 2}, {"eps": 0.5, "delta": 1, "R": 2, "paths": 1.5}):
            with self.subTest(payload=payload):
                self.assertEqual(run("classify", "--config", self.config(payload)).returncode, 2)
        bad = Path(self.config({})).with_suffix(".txt")
        bad.write_text("{not json")
        self.addCleanup(bad.unlink)
        self.assertEqual(run("classify", "--config", str(bad)).returncode, 2)
        self.assertEqual(run("classify", "--config", "/nonexistent.json").returncode, 2)


if __name__ == "__main__":
    BIN = os.path.abspath(sys.argv[1])
    SCHEMAS = Path(sys.argv[2])
    unittest.main(argv=[sys.argv[0], "-v"])
