"""Bundled demonstration corpus.

One piecewise-affine map on [0, 3] with a two-piece partition V_1 = [0, 1],
V_2 = [2, 3] and the matrix ((0 1)(1 1)); the standard walk-through target
for every command.
"""

from __future__ import annotations

import json
from importlib import resources

from .piecewise import Partition, PiecewiseAffineMap
from .transition import TransitionMatrix, validate_matrix


def example32_path():
    return resources.files("chaoscert").joinpath("data/example32.json")


def example32_bundle() -> dict:
    with example32_path().open("r", encoding="utf-8") as fh:
        return json.load(fh)


def example32_matrix() -> TransitionMatrix:
    return validate_matrix(example32_bundle()["matrix"])


def example32_map() -> PiecewiseAffineMap:
    return PiecewiseAffineMap.from_config(example32_bundle()["map"])


def example32_partition() -> Partition:
    return Partition.from_config(example32_bundle()["partition"])
