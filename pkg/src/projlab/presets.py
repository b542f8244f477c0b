"""Named flow generators and self-similar test sets used across the CLI and
the test suite."""

from __future__ import annotations

import numpy as np

from .dimension import IFSSystem, Similarity

# One-parameter Mobius flow generators (traceless 2x2 complex).
MOBIUS_GENERATORS = {
    # rotations z -> e^{it} z about the origin
    "o2": np.array([[0.5j, 0.0], [0.0, -0.5j]]),
    # rotation flow fixing +-1; the infinite orbit is the imaginary axis
    "elliptic": np.array([[0.0, 0.5j], [0.5j, 0.0]]),
    # the flow t -> (cos t z - sin t)/(sin t z + cos t); fixes +-i
    "circular": np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex),
    "translation": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    "dilation": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    # spiral flow fixing +-1; the infinite orbit is a logarithmic spiral
    "loxodromic": np.array([[0.0, 0.5 + 0.5j], [0.5 + 0.5j, 0.0]]),
}

# One-parameter projective flow generators (3x3 real), with optional
# conjugators carrying a family back to its natural coordinates.
_ROTATION = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
_POINT_SOURCE_CONJ = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
_ANISO = np.diag([2.0, 3.0, 0.0])
_ANISO_CONJ = np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 1.0], [0.0, 1.0, -1.0]])

PROJECTIVE_GENERATORS = {
    "rotation": _ROTATION,
    "shear": np.array([[0.0, -1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    "zshear": np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
    "zrotation": np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
    # the generator printed for projections from the light source (0, 1);
    # identical to the z-rotation flow, which keeps the source fixed
    "pointsource-printed": np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
    # rotations conjugated by the map sending (0, 1) to the vertical source
    "pointsource-corrected": _POINT_SOURCE_CONJ @ _ROTATION @ np.linalg.inv(_POINT_SOURCE_CONJ),
    "aniso23": _ANISO,
    # same flow conjugated so one of its curved orbits passes through the source
    "aniso23-conjugated": _ANISO_CONJ @ _ANISO @ np.linalg.inv(_ANISO_CONJ),
}

PROJECTIVE_CONJUGATORS = {
    "pointsource-corrected": _POINT_SOURCE_CONJ,
    "aniso23-conjugated": _ANISO_CONJ,
}


def _corner_system(name, ratio):
    t = 1.0 - ratio
    return IFSSystem(
        maps=tuple(
            Similarity(ratio, 0.0, dx, dy) for dx in (0.0, t) for dy in (0.0, t)
        ),
        name=name,
    )


def ifs_preset(name):
    """Built-in self-similar systems (all satisfy the open-set condition:
    the corner systems map the open unit square into disjoint sub-squares,
    the segment systems map an open interval into disjoint halves)."""
    if name == "cantor9":
        # four corners of the unit square at ratio 1/9; dimension log4/log9
        return _corner_system("cantor9", 1.0 / 9.0)
    if name == "c14":
        # four corners at ratio 1/4: the classical unrectifiable dust, dimension 1
        return _corner_system("c14", 0.25)
    if name == "segment":
        # the unit segment on the x-axis
        return IFSSystem(
            maps=(Similarity(0.5, 0.0, 0.0, 0.0), Similarity(0.5, 0.0, 0.5, 0.0)),
            name="segment",
        )
    if name == "vsegment":
        # vertical segment {0} x [-1/2, 1/2]
        return IFSSystem(
            maps=(Similarity(0.5, 0.0, 0.0, -0.25), Similarity(0.5, 0.0, 0.0, 0.25)),
            name="vsegment",
        )
    if name == "square":
        # the filled unit square, dimension 2
        return _corner_system("square", 0.5)
    if name == "singleton":
        return IFSSystem(maps=(Similarity(0.5, 0.0, 0.0, 0.0),), name="singleton")
    raise KeyError("unknown set preset %r" % name)


IFS_PRESETS = ("cantor9", "c14", "segment", "vsegment", "square", "singleton")
