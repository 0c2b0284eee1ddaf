#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""End-to-end checks of the parflow command line."""

import json
import os
import struct
import subprocess
import sys
import tempfile
import unittest

import jsonschema

BIN = None


def parflow(*args):
    return subprocess.run([BIN, *args], capture_output=True, text=True)


def write_pft1(path, dims, values):
    with open(path, "wb") as f:
        f.write(b"PFT1" + struct.pack("<BB", 0, len(dims)))
        f.write(struct.pack(f"<{len(dims)}Q", *dims))
        f.write(struct.pack(f"<{len(values)}d", *values))


def read_pft1(path):
    with open(path, "rb") as f:
        data = f.read()
    assert data[:4] == b"PFT1" and data[4] == 0
    ndim = data[5]
    dims = struct.unpack_from(f"<{ndim}Q", data, 6)
    count = 1
    for n in dims:
        count *= n
    values = struct.unpack_from(f"<{count}d", data, 6 + 8 * ndim)
    assert len(data) == 6 + 8 * ndim + 8 * count
    return list(dims), list(values)


class Cli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def test_verify_default_passes(self):
        r = parflow("verify")
        self.assertEqual(r.returncode, 0, r.stderr)
        lines = r.stdout.strip().splitlines()
        self.assertEqual(lines[0].split(",")[0], "backend")
        self.assertEqual(len(lines), 5)

    def test_json_report_matches_schema(self):
        schema = json.loads(parflow("schema").stdout)
        r = parflow("bench", "--L", "8,16", "--R", "2", "--d", "4", "--format", "json", "--repeats", "2")
        self.assertEqual(r.returncode, 0, r.stderr)
        jsonschema.validate(json.loads(r.stdout), schema)
        r = parflow("verify", "--L", "12", "--d", "3", "--format", "json", "--out", self.path("v.json"))
        self.assertEqual(r.returncode, 0, r.stderr)
        with open(self.path("v.json")) as f:
            doc = json.load(f)
        jsonschema.validate(doc, schema)
        self.assertTrue(doc["passed"])

    def test_config_file_and_flag_override(self):
        with open(self.path("c.json"), "w") as f:
            json.dump({"L": [10], "R": 1, "d": 3, "backends": ["sigdelta"], "format": "json"}, f)
        r = parflow("verify", "--config", self.path("c.json"), "--d", "5")
        self.assertEqual(r.returncode, 0, r.stderr)
        doc = json.loads(r.stdout)
        self.assertEqual({row["backend"] for row in doc["rows"]}, {"seq", "sigdelta"})
        self.assertTrue(all(row["d"] == 5 for row in doc["rows"]))

    def test_exit_codes(self):
        self.assertEqual(parflow("verify", "--L", "40", "--tolerance", "1e-300").returncode, 1)
        self.assertEqual(parflow("verify", "--backend", "gpu").returncode, 2)
        self.assertEqual(parflow("verify", "--R", "0").returncode, 2)
        self.assertEqual(parflow("bench", "--L", "0").returncode, 2)
        self.assertEqual(parflow("verify", "--no-such-flag").returncode, 2)
        with open(self.path("bad.json"), "w") as f:
            f.write('{"Lx": 3}')
        self.assertEqual(parflow("verify", "--config", self.path("bad.json")).returncode, 2)
        self.assertEqual(parflow("run").returncode, 2)
        self.assertEqual(parflow("run", "--out", self.path("s.pft1"), "--input-a", self.path("missing")).returncode, 2)

    def test_run_from_files_matches_a_python_recurrence(self):
        L, R, d = 6, 2, 3
        vals = lambda off: [0.1 * ((i * 7 + off) % 11 - 5) for i in range(L * R * d)]
        a, at, b = vals(1), vals(4), vals(9)
        for name, v in (("a", a), ("at", at), ("b", b)):
            write_pft1(self.path(name + ".pft1"), [L, R, d], v)
        r = parflow("run", "--backend", "sigdelta", "--chunk-len", "4", "--out", self.path("s.pft1"),
                    "--input-a", self.path("a.pft1"), "--input-atilde", self.path("at.pft1"),
                    "--input-b", self.path("b.pft1"), "--trajectory", self.path("t.pft1"))
        self.assertEqual(r.returncode, 0, r.stderr)
        dims, got = read_pft1(self.path("s.pft1"))
        self.assertEqual(dims, [d, d])

        s = [[float(i == j) for j in range(d)] for i in range(d)]
        states = [s]
        for k in range(L):
            col = lambda t, i, m: t[(k * R + i) * d + m]
            # S += S A B^T + Ã B^T, with A[m][i] = col(a, i, m)
            new = [row[:] for row in s]
            for r_ in range(d):
                for c in range(d):
                    acc = 0.0
                    for i in range(R):
                        sa = sum(s[r_][m] * col(a, i, m) for m in range(d))
                        acc += (sa + col(at, i, r_)) * col(b, i, c)
                    new[r_][c] += acc
            s = new
            states.append(s)
        flat = [v for row in s for v in row]
        for x, y in zip(got, flat):
            self.assertAlmostEqual(x, y, delta=1e-12 * max(1.0, abs(y)))

        tdims, traj = read_pft1(self.path("t.pft1"))
        self.assertEqual(tdims, [3, d, d])
        for slot, step in enumerate((0, 4, 6)):
            want = [v for row in states[step] for v in row]
            for x, y in zip(traj[slot * d * d:(slot + 1) * d * d], want):
                self.assertAlmostEqual(x, y, delta=1e-12 * max(1.0, abs(y)))

    def test_malformed_input_leaves_no_output(self):
        write_pft1(self.path("a.pft1"), [2, 1, 2], [0.0] * 4)
        write_pft1(self.path("b.pft1"), [2, 1, 2], [0.0] * 4)
        with open(self.path("bad.pft1"), "wb") as f:
            f.write(b"PFT1\x00\x03" + struct.pack("<3Q", 2, 1, 2) + b"\x00" * 9)
        out = self.path("out.pft1")
        r = parflow("run", "--out", out, "--input-a", self.path("a.pft1"), "--input-atilde", self.path("bad.pft1"),
                    "--input-b", self.path("b.pft1"))
        self.assertEqual(r.returncode, 3)
        self.assertIn("bad.pft1", r.stderr)
        self.assertFalse(os.path.exists(out))
        self.assertEqual(sorted(os.listdir(self.dir)), ["a.pft1", "b.pft1", "bad.pft1"])

    def test_identical_configs_identical_columns(self):
        args = ("verify", "--L", "20,33", "--R", "3", "--d", "6", "--chunk-len", "7")
        keep = lambda out: [line.split(",")[8:] for line in out.strip().splitlines()]
        self.assertEqual(keep(parflow(*args).stdout), keep(parflow(*args).stdout))


if __name__ == "__main__":
    BIN = sys.argv.pop(1)
    unittest.main()
