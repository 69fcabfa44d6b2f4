"""JSON file formats for instances, solutions and trees.

Round trip is exact: parse(emit(x)) == x for both formats.  Timing and
other run metadata live only under the solution's "meta" key so that
everything outside it is deterministic.
"""

from __future__ import annotations

import json

import numpy as np

from .gadgets import RootedTree
from .metric import MetricSpace
from .model import Ball, NukcInstance, NukcSolution


class FormatError(ValueError):
    """Malformed instance or solution document."""


def instance_to_obj(instance: NukcInstance, coords=None) -> dict:
    points = (
        {"coords": [list(map(float, row)) for row in coords]}
        if coords is not None
        else {"matrix": [list(map(float, row)) for row in instance.space.dist]}
    )
    obj = {
        "points": points,
        "classes": [
            {"k": c.multiplicity, "r": c.radius} for c in instance.classes
        ],
    }
    if instance.space.labels is not None:
        obj["labels"] = list(instance.space.labels)
    return obj


def instance_from_obj(obj: dict) -> NukcInstance:
    if not isinstance(obj, dict):
        raise FormatError("instance document must be a JSON object")
    points = obj.get("points")
    if not isinstance(points, dict):
        raise FormatError('instance needs a "points" object')
    has_coords = "coords" in points
    has_matrix = "matrix" in points
    if has_coords and has_matrix:
        raise FormatError('points must carry "coords" or "matrix", not both')
    if has_coords:
        space = MetricSpace.from_coords(np.asarray(points["coords"], dtype=float))
    elif has_matrix:
        space = MetricSpace(np.asarray(points["matrix"], dtype=float), check=True)
    else:
        raise FormatError('points must carry "coords" or "matrix"')
    labels = obj.get("labels")
    if labels is not None:
        space.labels = list(labels)
        if len(space.labels) != space.n:
            raise FormatError("labels length must match the number of points")
    classes = obj.get("classes")
    if not isinstance(classes, list) or not classes:
        raise FormatError('instance needs a non-empty "classes" list')
    parsed = []
    for i, c in enumerate(classes):
        try:
            parsed.append((int(c["k"]), float(c["r"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f'class {i} needs integer "k" and numeric "r"') from exc
    return NukcInstance(space, parsed)


def solution_to_obj(solution: NukcSolution, outliers=None, meta=None) -> dict:
    obj = {
        "balls": [
            {"center": b.center, "class": b.class_index, "radius": b.radius_used}
            for b in solution.balls
        ],
        "outliers": sorted(int(p) for p in (outliers or [])),
    }
    if meta is not None:
        obj["meta"] = meta
    return obj


def solution_from_obj(obj: dict):
    if not isinstance(obj, dict) or not isinstance(obj.get("balls"), list):
        raise FormatError('solution document needs a "balls" list')
    balls = []
    for i, b in enumerate(obj["balls"]):
        try:
            balls.append(Ball(int(b["center"]), int(b["class"]), float(b["radius"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(
                f'ball {i} needs "center", "class" and "radius"'
            ) from exc
    outliers = obj.get("outliers", [])
    if not isinstance(outliers, list):
        raise FormatError('"outliers" must be a list of point ids')
    return NukcSolution(balls), [int(p) for p in outliers]


def tree_to_obj(tree: RootedTree) -> dict:
    return {"parents": [None] + [int(p) for p in tree.parents[1:]]}


def tree_from_obj(obj: dict) -> RootedTree:
    if not isinstance(obj, dict) or not isinstance(obj.get("parents"), list):
        raise FormatError('tree document needs a "parents" list')
    parents = obj["parents"]
    return RootedTree([None] + [int(p) for p in parents[1:]])


def dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
