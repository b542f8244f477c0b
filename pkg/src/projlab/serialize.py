"""JSON and CSV plumbing shared by the report types and the CLI.

Matrices serialize to row-major nested lists; complex entries as [re, im]
pairs.  All writers are deterministic: fixed key order, repr-exact floats,
'\\n' line endings.
"""

from __future__ import annotations

import json

import numpy as np


def complex_matrix_to_json(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def complex_matrix_from_json(data):
    return np.array([[complex(re, im) for re, im in row] for row in data])


def real_matrix_to_json(M):
    M = np.asarray(M, dtype=float)
    return [[float(v) for v in row] for row in M]


def real_matrix_from_json(data):
    return np.array(data, dtype=float)


def dump_json(obj, path):
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows):
    """Plain deterministic CSV: '.' decimals, '\\n' endings, header row."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)
