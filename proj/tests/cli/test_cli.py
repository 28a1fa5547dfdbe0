"""End-to-end checks of the formlab command line."""

import json
import os
import subprocess
import sys
import tempfile
import unittest

import jsonschema

CLI = os.environ["FORMLAB_CLI"]
SCHEMA_PATH = os.environ["FORMLAB_SCHEMA"]

with open(SCHEMA_PATH) as fh:
    SCHEMA = json.load(fh)
jsonschema.Draft202012Validator.check_schema(SCHEMA)
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)

E1 = {"weights": [0.5, 0.5], "matrix": [[0, 1], [1, 0]]}
ROW_SUM_11 = {"weights": [1, 1], "matrix": [[0.6, 0.5], [0.5, 0.6]]}


def run(*args):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=300)
    assert proc.returncode in (0, 1, 2, 3), proc.returncode
    return proc


class CliTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, text):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w") as fh:
            fh.write(text)
        return path

    def report(self, *args, code=0):
        proc = run(*args)
        self.assertEqual(proc.returncode, code, proc.stderr)
        doc = json.loads(proc.stdout)
        VALIDATOR.validate(doc)
        self.assertEqual(json.loads(json.dumps(doc)), doc)
        return doc

    def test_validate_e1(self):
        doc = self.report("validate", self.write("e1.json", json.dumps(E1)), "--seed", 3)
        res = doc["result"]
        for key in ("symmetric", "dunford_schwartz", "sub_markovian", "markovian"):
            self.assertTrue(res[key], key)
        self.assertEqual(doc["seed"], 3)

    def test_validate_row_sum_above_one(self):
        res = self.report("validate", self.write("bad.json", json.dumps(ROW_SUM_11)))["result"]
        self.assertFalse(res["dunford_schwartz"])
        self.assertFalse(res["conditions"]["linf_rows"]["holds"])
        self.assertEqual(res["conditions"]["linf_rows"]["i"], 0)

    def test_seed_recorded_when_defaulted(self):
        doc = self.report("validate", self.write("e1.json", json.dumps(E1)))
        self.assertIsInstance(doc["seed"], int)

    def test_truncated_json(self):
        proc = run("validate", self.write("t.json", '{"weights": [0.5,'))
        self.assertEqual(proc.returncode, 2)
        self.assertIn("at byte", proc.stderr)

    def test_missing_file_and_bad_args(self):
        self.assertEqual(run("validate", os.path.join(self.tmp.name, "none.json")).returncode, 2)
        self.assertEqual(run("angle", "--p", "0.5").returncode, 2)
        self.assertEqual(run("no-such-command").returncode, 2)

    def test_reports_match_schema(self):
        e1 = self.write("e1.json", json.dumps(E1))
        self.report("modulus", e1, "--seed", 1)
        self.report("disintegrate", e1, "--seed", 1)
        self.report("angle", "--p", 4, "--seed", 1)
        self.report("semigroup", "--operator", e1, "--t", 0.5, "--seed", 1)
        doc = self.report("check-form", "--operator", e1, "--p", 3, "--seed", 1)
        self.assertEqual(doc["verdict"], "pass")

    def test_check_z2_above_angle_violates(self):
        doc = self.report("check-z2", "--p", 3, "--phi", 1.3, "--lambda-grid", 24, "--seed", 1, code=1)
        self.assertEqual(doc["verdict"], "violated")

    def test_report_file_output(self):
        out = os.path.join(self.tmp.name, "r.json")
        proc = run("angle", "--p", 3, "--seed", 2, "-o", out)
        self.assertEqual(proc.returncode, 0)
        with open(out) as fh:
            VALIDATOR.validate(json.load(fh))

    def test_report_csv_brackets_p3(self):
        proc = run("report-csv", "--p", 3, "--phi-min", 1.0, "--phi-max", 1.4, "--step", 0.05, "--seed", 1)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        lines = proc.stdout.strip().splitlines()
        self.assertEqual(lines[0], "phi,min_value")
        for line in lines[1:]:
            phi, value = map(float, line.split(","))
            if phi <= 1.2:
                self.assertGreaterEqual(value, -1e-9)
            elif phi >= 1.25:
                self.assertLess(value, 0.0)

    def test_report_csv_invalid_range(self):
        self.assertEqual(run("report-csv", "--p", 3, "--phi-min", 1, "--phi-max", 0.5).returncode, 2)
        self.assertEqual(run("report-csv", "--p", 3, "--phi-min", 1, "--phi-max", 1.2, "--step", 0).returncode, 2)

    def test_verify_scope_is_deterministic(self):
        out = os.path.join(self.tmp.name, "v.json")
        first = run("verify", "--scope", "bilinear", "-o", out)
        second = run("verify", "--scope", "bilinear")
        self.assertEqual(first.returncode, 0, first.stderr)
        self.assertEqual(first.stdout, second.stdout)
        with open(out) as fh:
            doc = json.load(fh)
        VALIDATOR.validate(doc)
        self.assertTrue(all(s["module"] == "bilinear" for s in doc["suites"]))
        self.assertEqual(run("verify", "--scope", "nope").returncode, 2)


if __name__ == "__main__":
    sys.exit(unittest.main())
