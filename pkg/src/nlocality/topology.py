"""Network wiring: which party input selects the observable of each qubit slot.

A qubit slot is ``(source, side)`` with side 0 for the first qubit (A) of a
source and side 1 for the second (B). Strategies store one Bloch vector per
slot per input bit in an array of shape ``(n, 2, 2, 3)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

KINDS = ("star", "chain", "chsh")


@dataclass(frozen=True)
class Topology:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("a network needs at least one source")
        if self.kind == "chsh" and self.n != 1:
            raise ValueError("the CHSH scenario has exactly one source")
        if self.kind == "chain" and self.n < 2:
            raise ValueError("a chain needs at least two sources")

    @classmethod
    def star(cls, n):
        return cls("star", n)

    @classmethod
    def chain(cls, n):
        return cls("chain", n)

    @classmethod
    def chsh(cls):
        return cls("chsh", 1)

    @property
    def parties(self):
        return self.n + 1

    @property
    def input_names(self):
        if self.kind == "chain":
            return ("x", "y", "z")
        if self.kind == "chsh":
            return ("x", "y")
        return tuple(f"x{i + 1}" for i in range(self.n)) + ("z",)

    @cached_property
    def input_domain(self):
        return list(itertools.product((0, 1), repeat=len(self.input_names)))

    def slot_input(self, source, side):
        """Index into the input bit tuple that selects this slot's observable."""
        if self.kind == "chain":
            if source == 0 and side == 0:
                return 0
            if source == self.n - 1 and side == 1:
                return 1
            return 2
        return source if side == 0 else self.n

    def is_external(self, source, side):
        if self.kind == "chain":
            return (source, side) in ((0, 0), (self.n - 1, 1))
        return side == 0

    def slot_party(self, source, side):
        if self.kind == "chain":
            if (source, side) == (0, 0):
                return "A"
            if (source, side) == (self.n - 1, 1):
                return "B"
            return f"C{source + side}"
        if self.kind == "chsh":
            return "A" if side == 0 else "B"
        return f"A{source + 1}" if side == 0 else "C"

    @cached_property
    def slots(self):
        return [(i, s) for i in range(self.n) for s in (0, 1)]

    def __str__(self):
        return f"{self.kind}({self.n})"


def _unit_rows(v, tol=1e-9):
    norms = np.linalg.norm(v, axis=-1)
    bad = np.abs(norms - 1.0) > tol
    if np.any(bad):
        raise ValueError(f"Bloch vectors must be unit length, got norms {norms[bad]}")


@dataclass
class NetworkStrategy:
    """Per-slot dichotomic observables for a topology.

    ``vectors[i, side, bit]`` is the Bloch vector measured on qubit ``side`` of
    source ``i`` when the owning party's input is ``bit``.
    """

    topology: Topology
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        shape = (self.topology.n, 2, 2, 3)
        if self.vectors.shape != shape:
            raise ValueError(f"strategy for {self.topology} needs shape {shape}, got {self.vectors.shape}")
        _unit_rows(self.vectors)

    def select(self, inputs):
        """Bloch vectors ``(n, 2, 3)`` chosen by a full input bit tuple."""
        topo = self.topology
        if len(inputs) != len(topo.input_names):
            raise ValueError(f"{topo} takes {len(topo.input_names)} input bits, got {len(inputs)}")
        out = np.empty((topo.n, 2, 3))
        for i, side in topo.slots:
            out[i, side] = self.vectors[i, side, inputs[topo.slot_input(i, side)]]
        return out

    def to_json(self):
        topo = self.topology
        return [
            {
                "party": topo.slot_party(i, side),
                "source": i + 1,
                "side": "AB"[side],
                "input0": self.vectors[i, side, 0].tolist(),
                "input1": self.vectors[i, side, 1].tolist(),
            }
            for i, side in topo.slots
        ]

    @classmethod
    def from_json(cls, topology, records):
        vectors = np.full((topology.n, 2, 2, 3), np.nan)
        for rec in records:
            i = int(rec["source"]) - 1
            if "side" in rec:
                side = "AB".index(rec["side"])
            else:
                side = 0 if rec["party"] == topology.slot_party(i, 0) else 1
            if not 0 <= i < topology.n:
                raise ValueError(f"slot source {i + 1} outside 1..{topology.n}")
            vectors[i, side, 0] = rec["input0"]
            vectors[i, side, 1] = rec["input1"]
        if np.isnan(vectors).any():
            raise ValueError("strategy does not cover every qubit slot")
        return cls(topology, vectors)

    def dumps(self):
        return json.dumps({"topology": self.topology.kind, "n": self.topology.n, "slots": self.to_json()}, indent=2)

    @classmethod
    def loads(cls, text):
        obj = json.loads(text)
        return cls.from_json(Topology(obj["topology"], int(obj["n"])), obj["slots"])
