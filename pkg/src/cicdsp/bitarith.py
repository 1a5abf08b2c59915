"""Gate-level adder and subtractor models.

Every arithmetic unit here is built as an explicit DAG of AND/OR/XOR/NOT
gates (:class:`GateNetwork`) and then evaluated, so the same structure
answers two questions: does the netlist compute the right numbers, and how
many gate levels deep is it.  Evaluation is vectorized -- wire values may be
plain ``0``/``1`` ints or numpy arrays of them -- which makes exhaustive
equivalence sweeps cheap.

Conventions: bit 0 is the LSB; carry generate is ``g = a AND b`` and carry
propagate is ``p = a OR b`` (sum bits still use XOR; both conventions agree
on every carry).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

AND, OR, XOR, NOT = "and", "or", "xor", "not"

ADDER_KINDS = ("ha", "pfa", "spfa", "csa", "rca", "mcla", "rcas")

# Group size for the carry-lookahead blocks; widths are zero-padded at the
# MSB end to a multiple of this.
MCLA_GROUP = 4


class BitVector:
    """An immutable vector of bits, index 0 = LSB."""

    __slots__ = ("bits",)

    def __init__(self, bits: Sequence[int]):
        bits = tuple(int(b) for b in bits)
        if not bits:
            raise ValueError("BitVector needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("BitVector is immutable")

    @classmethod
    def from_unsigned(cls, v: int, width: int) -> "BitVector":
        if width < 1:
            raise ValueError("width must be >= 1")
        if not 0 <= v < 1 << width:
            raise ValueError(f"{v} does not fit in {width} unsigned bits")
        return cls([(v >> i) & 1 for i in range(width)])

    def to_unsigned(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    @property
    def width(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, BitVector) and self.bits == other.bits

    def __hash__(self) -> int:
        return hash(self.bits)

    def __repr__(self) -> str:
        return f"BitVector({''.join(str(b) for b in reversed(self.bits))})"


@dataclass(frozen=True)
class CarrySignals:
    """Per-group generate/propagate bits of a lookahead block."""

    g: tuple
    p: tuple
    group_g: int
    group_p: int


@dataclass
class GateNetwork:
    """A combinational DAG: primary inputs, gates in topological order, named outputs.

    Wires are integer ids.  Ids ``0..len(inputs)-1`` are the primary inputs;
    each gate appends one new wire.  Gate operands always refer to earlier
    wires, so a single forward pass evaluates the whole network.
    """

    inputs: list = field(default_factory=list)
    gates: list = field(default_factory=list)  # (op, a, b_or_None)
    outputs: dict = field(default_factory=dict)

    def add_input(self, name: str) -> int:
        if name in self.inputs:
            raise ValueError(f"duplicate input {name}")
        self.inputs.append(name)
        return len(self.inputs) - 1

    def _wire_count(self) -> int:
        return len(self.inputs) + len(self.gates)

    def add_gate(self, op: str, a: int, b: int | None = None) -> int:
        if op not in (AND, OR, XOR, NOT):
            raise ValueError(f"unknown gate op {op!r}")
        n = self._wire_count()
        if not 0 <= a < n or (b is not None and not 0 <= b < n):
            raise ValueError("gate operand must be an earlier wire")
        if (b is None) != (op == NOT):
            raise ValueError("NOT takes one operand, other gates take two")
        self.gates.append((op, a, b))
        return n

    def set_output(self, name: str, wire: int) -> None:
        if not 0 <= wire < self._wire_count():
            raise ValueError("output refers to a non-existent wire")
        self.outputs[name] = wire

    def evaluate(self, assignments: dict) -> dict:
        """Evaluate all outputs given values for every primary input.

        Input values may be ints or equally-shaped numpy integer arrays;
        arrays propagate elementwise, evaluating the network over a whole
        batch at once.
        """
        missing = [n for n in self.inputs if n not in assignments]
        if missing:
            raise ValueError(f"missing input values: {missing}")
        values: list = [assignments[n] for n in self.inputs]
        for op, a, b in self.gates:
            x = values[a]
            if op == NOT:
                values.append(1 - x)
                continue
            y = values[b]
            if op == AND:
                values.append(x & y)
            elif op == OR:
                values.append(x | y)
            else:
                values.append(x ^ y)
        return {name: values[w] for name, w in self.outputs.items()}

    def depth(self) -> int:
        """Longest input-to-output path, counting every gate as one level."""
        level = [0] * self._wire_count()
        base = len(self.inputs)
        for i, (op, a, b) in enumerate(self.gates):
            d = level[a]
            if b is not None:
                d = max(d, level[b])
            level[base + i] = d + 1
        if not self.outputs:
            return 0
        return max(level[w] for w in self.outputs.values())


# ---------------------------------------------------------------------------
# Netlist builders
# ---------------------------------------------------------------------------

def _tree(net: GateNetwork, op: str, wires: list) -> int:
    """Balanced reduction tree over ``wires`` (must be non-empty)."""
    while len(wires) > 1:
        nxt = []
        for i in range(0, len(wires) - 1, 2):
            nxt.append(net.add_gate(op, wires[i], wires[i + 1]))
        if len(wires) % 2:
            nxt.append(wires[-1])
        wires = nxt
    return wires[0]


def _full_adder(net: GateNetwork, a: int, b: int, c: int) -> tuple:
    """Full-adder cell: s = a^b^c, cout = (a AND b) OR ((a OR b) AND c)."""
    axb = net.add_gate(XOR, a, b)
    s = net.add_gate(XOR, axb, c)
    g = net.add_gate(AND, a, b)
    p = net.add_gate(OR, a, b)
    pc = net.add_gate(AND, p, c)
    cout = net.add_gate(OR, g, pc)
    return s, cout


def build_ha() -> GateNetwork:
    net = GateNetwork()
    a = net.add_input("a")
    b = net.add_input("b")
    net.set_output("s", net.add_gate(XOR, a, b))
    net.set_output("c", net.add_gate(AND, a, b))
    return net


def build_pfa(with_cout: bool = True) -> GateNetwork:
    net = GateNetwork()
    a = net.add_input("a")
    b = net.add_input("b")
    c = net.add_input("cin")
    s, cout = _full_adder(net, a, b, c)
    net.set_output("s", s)
    if with_cout:
        net.set_output("cout", cout)
    return net


def build_csa(width: int) -> GateNetwork:
    """Carry-save compressor: three width-bit addends to sum + carry vectors.

    One disjoint full adder per bit position; no carry propagation, so the
    depth is that of a single full adder regardless of width.
    """
    net = GateNetwork()
    xs = [net.add_input(f"x{i}") for i in range(width)]
    ys = [net.add_input(f"y{i}") for i in range(width)]
    zs = [net.add_input(f"z{i}") for i in range(width)]
    for i in range(width):
        s, c = _full_adder(net, xs[i], ys[i], zs[i])
        net.set_output(f"s{i}", s)
        # carry vector bit lands one position up; bit 0 of c is constant 0
        net.set_output(f"c{i + 1}", c)
    return net


def build_rca(width: int) -> GateNetwork:
    """Ripple-carry adder: a chain of full adders LSB to MSB."""
    net = GateNetwork()
    avs = [net.add_input(f"a{i}") for i in range(width)]
    bvs = [net.add_input(f"b{i}") for i in range(width)]
    c = net.add_input("cin")
    for i in range(width):
        s, c = _full_adder(net, avs[i], bvs[i], c)
        net.set_output(f"s{i}", s)
    net.set_output("cout", c)
    return net


def build_rcas(width: int) -> GateNetwork:
    """Ripple-carry adder/subtractor.

    XOR gates conditionally invert the second operand; the control bit also
    feeds the carry-in, so sub=1 computes ``a + NOT(b) + 1``.
    """
    net = GateNetwork()
    avs = [net.add_input(f"a{i}") for i in range(width)]
    bvs = [net.add_input(f"b{i}") for i in range(width)]
    sub = net.add_input("sub")
    xbs = [net.add_gate(XOR, b, sub) for b in bvs]
    c = sub
    for i in range(width):
        s, c = _full_adder(net, avs[i], xbs[i], c)
        net.set_output(f"s{i}", s)
    net.set_output("cout", c)
    return net


def build_mcla(width: int) -> GateNetwork:
    """Carry-lookahead adder built from 4-bit generate/propagate groups.

    Within a group the four carries come from the expanded sum-of-products
    lookahead equations; each group exports a group propagate (the AND of
    its p bits) and a group generate, and the inter-group carry ripples as
    ``c_next = G + P*c_in``.  Widths not divisible by 4 get zero-padded
    input bits at the MSB end.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    padded = -(-width // MCLA_GROUP) * MCLA_GROUP
    net = GateNetwork()
    avs = [net.add_input(f"a{i}") for i in range(padded)]
    bvs = [net.add_input(f"b{i}") for i in range(padded)]
    cin = net.add_input("cin")

    gs = [net.add_gate(AND, avs[i], bvs[i]) for i in range(padded)]
    ps = [net.add_gate(OR, avs[i], bvs[i]) for i in range(padded)]

    group_carry = cin
    for gi in range(padded // MCLA_GROUP):
        lo = gi * MCLA_GROUP
        g = gs[lo:lo + MCLA_GROUP]
        p = ps[lo:lo + MCLA_GROUP]
        # carries into bit positions lo..lo+3 of this group
        carries = [group_carry]
        for k in range(1, MCLA_GROUP):
            # c_k = g_{k-1} + p_{k-1} g_{k-2} + ... + p_{k-1}..p_0 c_in
            terms = [g[k - 1]]
            for t in range(k - 2, -1, -1):
                terms.append(_tree(net, AND, p[t + 1:k] + [g[t]]))
            terms.append(_tree(net, AND, p[0:k] + [group_carry]))
            carries.append(_tree(net, OR, terms))
        for k in range(MCLA_GROUP):
            axb = net.add_gate(XOR, avs[lo + k], bvs[lo + k])
            net.set_output(f"s{lo + k}", net.add_gate(XOR, axb, carries[k]))
        pg = _tree(net, AND, list(p))
        terms = [g[MCLA_GROUP - 1]]
        for t in range(MCLA_GROUP - 2, -1, -1):
            terms.append(_tree(net, AND, p[t + 1:] + [g[t]]))
        gg = _tree(net, OR, terms)
        net.set_output(f"pg{gi}", pg)
        net.set_output(f"gg{gi}", gg)
        for k in range(MCLA_GROUP):
            net.set_output(f"g{gi}_{k}", g[k])
            net.set_output(f"p{gi}_{k}", p[k])
        pc = net.add_gate(AND, pg, group_carry)
        group_carry = net.add_gate(OR, gg, pc)
    net.set_output("cout", group_carry)
    return net


def build_adder(kind: str, width: int) -> GateNetwork:
    kind = kind.lower()
    if kind == "ha":
        return build_ha()
    if kind == "pfa":
        return build_pfa()
    if kind == "spfa":
        # PFA used at the MSB position: carry-out left unconnected
        return build_pfa(with_cout=False)
    if kind == "csa":
        return build_csa(width)
    if kind == "rca":
        return build_rca(width)
    if kind == "rcas":
        return build_rcas(width)
    if kind == "mcla":
        return build_mcla(width)
    raise ValueError(f"unknown adder kind {kind!r}")


# ---------------------------------------------------------------------------
# Functional operations (evaluate the netlists)
# ---------------------------------------------------------------------------

def ha(a: int, b: int) -> tuple:
    """Half adder: (sum, carry)."""
    _check_bits(a, b)
    return a ^ b, a & b


def pfa(a: int, b: int, cin: int) -> tuple:
    """Full adder ("partial full adder"): (sum, carry-out)."""
    _check_bits(a, b, cin)
    return a ^ b ^ cin, (a & b) | ((a | b) & cin)


def _check_bits(*bits) -> None:
    for x in bits:
        if x not in (0, 1):
            raise ValueError(f"expected a bit, got {x!r}")


def _require_equal_widths(*vecs: BitVector) -> int:
    w = vecs[0].width
    if any(v.width != w for v in vecs):
        raise ValueError("width mismatch between bit vectors")
    return w


def _vector_inputs(prefix: str, v: BitVector) -> dict:
    return {f"{prefix}{i}": bit for i, bit in enumerate(v.bits)}


def csa_compress(x: BitVector, y: BitVector, z: BitVector) -> tuple:
    """Compress three addends into (sum, carry) with ``s + c == x + y + z``.

    The carry vector is one bit wider than the inputs; its LSB is always 0
    because every majority bit lands one position up.
    """
    w = _require_equal_widths(x, y, z)
    net = build_csa(w)
    vals = {**_vector_inputs("x", x), **_vector_inputs("y", y), **_vector_inputs("z", z)}
    out = net.evaluate(vals)
    s = BitVector([out[f"s{i}"] for i in range(w)])
    c = BitVector([0] + [out[f"c{i + 1}"] for i in range(w)])
    return s, c


def rca_add(a: BitVector, b: BitVector, cin: int = 0) -> tuple:
    """Ripple-carry addition: (sum, carry-out), unsigned contract."""
    _check_bits(cin)
    w = _require_equal_widths(a, b)
    net = build_rca(w)
    out = net.evaluate({**_vector_inputs("a", a), **_vector_inputs("b", b), "cin": cin})
    return BitVector([out[f"s{i}"] for i in range(w)]), out["cout"]


def mcla_add(a: BitVector, b: BitVector, cin: int = 0) -> tuple:
    """Lookahead addition: (sum, carry-out, per-group carry signals)."""
    _check_bits(cin)
    w = _require_equal_widths(a, b)
    net = build_mcla(w)
    padded = -(-w // MCLA_GROUP) * MCLA_GROUP
    vals = {"cin": cin}
    for i in range(padded):
        vals[f"a{i}"] = a[i] if i < w else 0
        vals[f"b{i}"] = b[i] if i < w else 0
    out = net.evaluate(vals)
    groups = []
    for gi in range(padded // MCLA_GROUP):
        groups.append(CarrySignals(
            g=tuple(out[f"g{gi}_{k}"] for k in range(MCLA_GROUP)),
            p=tuple(out[f"p{gi}_{k}"] for k in range(MCLA_GROUP)),
            group_g=out[f"gg{gi}"],
            group_p=out[f"pg{gi}"],
        ))
    # pad bits are zero, so the carry out of the real MSB shows up as the
    # sum bit at the first padded position
    cout = out["cout"] if w == padded else out[f"s{w}"]
    return BitVector([out[f"s{i}"] for i in range(w)]), cout, groups


def rcas(a: BitVector, b: BitVector, sub: int) -> tuple:
    """Add (sub=0) or subtract (sub=1) via conditional inversion: (result, cout)."""
    _check_bits(sub)
    w = _require_equal_widths(a, b)
    net = build_rcas(w)
    out = net.evaluate({**_vector_inputs("a", a), **_vector_inputs("b", b), "sub": sub})
    return BitVector([out[f"s{i}"] for i in range(w)]), out["cout"]


def logic_depth(kind: str, width: int) -> int:
    """Gate levels on the longest path of the named adder at ``width`` bits."""
    if width < 1:
        raise ValueError("width must be >= 1")
    return build_adder(kind, width).depth()


# ---------------------------------------------------------------------------
# Equivalence checking against plain integer arithmetic
# ---------------------------------------------------------------------------

def _bit_columns(values: np.ndarray, width: int) -> dict:
    return {i: ((values >> i) & 1).astype(np.uint8) for i in range(width)}


def check_equivalence(kind: str, width: int, mode: str = "exhaustive",
                      trials: int = 100_000, seed: int = 0) -> dict:
    """Compare a netlist against integer arithmetic over many operand sets.

    Exhaustive mode sweeps every operand combination (guarded to width <= 12);
    random mode draws ``trials`` uniform operand sets.  Returns a report dict
    with the number of cases checked and mismatches found (0 expected).
    """
    kind = kind.lower()
    if kind not in ADDER_KINDS:
        raise ValueError(f"unknown adder kind {kind!r}")
    if mode not in ("exhaustive", "random"):
        raise ValueError(f"mode must be exhaustive or random, got {mode!r}")
    if mode == "exhaustive" and kind in ("csa", "rca", "mcla", "rcas") and width > 12:
        raise ValueError("exhaustive mode is limited to width <= 12")

    if kind in ("ha", "pfa", "spfa"):
        return _check_cell(kind)

    net = build_adder(kind, width)
    rng = np.random.default_rng(seed)
    if kind == "csa":
        if mode == "exhaustive":
            n = 1 << width
            xs, ys, zs = np.meshgrid(np.arange(n), np.arange(n), np.arange(n),
                                     indexing="ij")
            xs, ys, zs = xs.ravel(), ys.ravel(), zs.ravel()
        else:
            xs = rng.integers(0, 1 << width, trials, dtype=np.int64)
            ys = rng.integers(0, 1 << width, trials, dtype=np.int64)
            zs = rng.integers(0, 1 << width, trials, dtype=np.int64)
        vals = {}
        for pre, arr in (("x", xs), ("y", ys), ("z", zs)):
            for i, col in _bit_columns(arr.astype(np.int64), width).items():
                vals[f"{pre}{i}"] = col
        out = net.evaluate(vals)
        s = sum(out[f"s{i}"].astype(np.int64) << i for i in range(width))
        c = sum(out[f"c{i + 1}"].astype(np.int64) << (i + 1) for i in range(width))
        mism = int(np.count_nonzero(s + c != xs + ys + zs))
        cases = len(xs)
    else:
        padded = -(-width // MCLA_GROUP) * MCLA_GROUP if kind == "mcla" else width
        if mode == "exhaustive":
            n = 1 << width
            a, b, cbit = np.meshgrid(np.arange(n), np.arange(n), np.arange(2),
                                     indexing="ij")
            a, b, cbit = a.ravel(), b.ravel(), cbit.ravel()
        else:
            a = rng.integers(0, 1 << width, trials, dtype=np.int64)
            b = rng.integers(0, 1 << width, trials, dtype=np.int64)
            cbit = rng.integers(0, 2, trials, dtype=np.int64)
        vals = {}
        for i, col in _bit_columns(a.astype(np.int64), width).items():
            vals[f"a{i}"] = col
        for i, col in _bit_columns(b.astype(np.int64), width).items():
            vals[f"b{i}"] = col
        if kind == "mcla":
            zero = np.zeros(len(a), dtype=np.uint8)
            for i in range(width, padded):
                vals[f"a{i}"] = zero
                vals[f"b{i}"] = zero
        vals["sub" if kind == "rcas" else "cin"] = cbit.astype(np.uint8)
        out = net.evaluate(vals)
        s = sum(out[f"s{i}"].astype(np.int64) << i for i in range(width))
        if kind == "mcla" and width != padded:
            cout = out[f"s{width}"].astype(np.int64)
        else:
            cout = out["cout"].astype(np.int64)
        if kind == "rcas":
            # sub=0: a+b; sub=1: a-b (mod 2^w), cout per a + ~b + 1
            ref = np.where(cbit == 0, a + b, a + ((1 << width) - 1 - b) + 1)
        else:
            ref = a + b + cbit
        got = s + (cout << width)
        mism = int(np.count_nonzero(got != ref))
        cases = len(a)
    return {
        "kind": kind,
        "width": width,
        "mode": mode,
        "depth": net.depth(),
        "equivalence_trials": cases,
        "mismatches": mism,
    }


def _check_cell(kind: str) -> dict:
    mism = 0
    cases = 0
    if kind == "ha":
        for a in (0, 1):
            for b in (0, 1):
                s, c = ha(a, b)
                mism += (s + 2 * c) != a + b
                cases += 1
        depth = build_ha().depth()
    else:
        for a in (0, 1):
            for b in (0, 1):
                for cin in (0, 1):
                    s, c = pfa(a, b, cin)
                    mism += (s + 2 * c) != a + b + cin
                    cases += 1
        depth = build_adder(kind, 1).depth()
    return {
        "kind": kind,
        "width": 1,
        "mode": "exhaustive",
        "depth": depth,
        "equivalence_trials": cases,
        "mismatches": int(mism),
    }
