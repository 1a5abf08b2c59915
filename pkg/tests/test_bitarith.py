import numpy as np
import pytest

from cicdsp import bitarith as ba
from cicdsp.bitarith import BitVector
from cicdsp.fixword import FixedWord


def bv(v, w):
    return BitVector.from_unsigned(v, w)


# -- cell truth tables -------------------------------------------------------

@pytest.mark.parametrize("a,b,s,c", [
    (0, 0, 0, 0), (0, 1, 1, 0), (1, 0, 1, 0), (1, 1, 0, 1),
])
def test_ha_truth_table(a, b, s, c):
    assert ba.ha(a, b) == (s, c)


@pytest.mark.parametrize("a,b,cin,s,cout", [
    (0, 0, 0, 0, 0), (0, 0, 1, 1, 0), (0, 1, 0, 1, 0), (0, 1, 1, 0, 1),
    (1, 0, 0, 1, 0), (1, 0, 1, 0, 1), (1, 1, 0, 0, 1), (1, 1, 1, 1, 1),
])
def test_pfa_truth_table(a, b, cin, s, cout):
    assert ba.pfa(a, b, cin) == (s, cout)


def test_bit_validation():
    with pytest.raises(ValueError):
        ba.ha(2, 0)
    with pytest.raises(ValueError):
        ba.pfa(0, 1, -1)


# -- carry-save compressor ---------------------------------------------------

def test_csa_single_full_adder():
    s, c = ba.csa_compress(bv(1, 1), bv(1, 1), bv(1, 1))
    assert s.to_unsigned() == 1 and c.to_unsigned() == 2


def test_csa_example():
    s, c = ba.csa_compress(bv(5, 3), bv(3, 3), bv(6, 3))
    assert (s.to_unsigned(), c.to_unsigned()) == (0, 14)


def test_csa_zero():
    s, c = ba.csa_compress(bv(0, 2), bv(0, 2), bv(0, 2))
    assert s.to_unsigned() == 0 and c.to_unsigned() == 0


def test_csa_exhaustive_width4():
    rep = ba.check_equivalence("csa", 4, "exhaustive")
    assert rep["mismatches"] == 0 and rep["equivalence_trials"] == 16**3


# -- ripple and lookahead adders --------------------------------------------

def test_rca_examples():
    s, c = ba.rca_add(bv(7, 4), bv(8, 4), 0)
    assert s.to_unsigned() == 15 and c == 0
    s, c = ba.rca_add(bv(15, 4), bv(1, 4), 0)
    assert s.to_unsigned() == 0 and c == 1


def test_rca_exhaustive_width8():
    rep = ba.check_equivalence("rca", 8, "exhaustive")
    assert rep["mismatches"] == 0 and rep["equivalence_trials"] == 2 * 256 * 256


def test_mcla_group_signals():
    s, cout, groups = ba.mcla_add(bv(0b1111, 4), bv(0b0001, 4), 0)
    assert s.to_unsigned() == 0 and cout == 1
    g = groups[0]
    assert g.g == (1, 0, 0, 0) and g.p == (1, 1, 1, 1)
    assert g.group_p == 1 and g.group_g == 1


def test_mcla_zero():
    s, cout, groups = ba.mcla_add(bv(0, 4), bv(0, 4), 0)
    assert s.to_unsigned() == 0 and cout == 0
    assert groups[0].group_p == 0 and groups[0].group_g == 0


def test_mcla_matches_rca_exhaustive_width8():
    rep = ba.check_equivalence("mcla", 8, "exhaustive")
    assert rep["mismatches"] == 0


def test_mcla_equals_rca_unpadded_width():
    # width 6 pads to 8 internally; results must still match the ripple chain
    for a in range(0, 64, 7):
        for b in range(0, 64, 5):
            for cin in (0, 1):
                s1, c1 = ba.rca_add(bv(a, 6), bv(b, 6), cin)
                s2, c2, _ = ba.mcla_add(bv(a, 6), bv(b, 6), cin)
                assert (s1, c1) == (s2, c2)


def test_rcas_examples():
    r, _ = ba.rcas(bv(5, 4), bv(3, 4), 1)
    assert r.to_unsigned() == 2
    r, _ = ba.rcas(bv(5, 4), bv(3, 4), 0)
    assert r.to_unsigned() == 8
    r, _ = ba.rcas(bv(0, 4), bv(1, 4), 1)
    assert r.to_unsigned() == 0b1111


def test_rcas_matches_wrap_sub_exhaustive_width6():
    for a in range(64):
        for b in range(64):
            r, _ = ba.rcas(bv(a, 6), bv(b, 6), 1)
            want = FixedWord.from_integer(a, 6).wrap_sub(FixedWord.from_integer(b, 6))
            assert r.to_unsigned() == want.unsigned


def test_random_trials_width25():
    for kind in ("rca", "mcla", "rcas"):
        rep = ba.check_equivalence(kind, 25, "random", trials=100_000, seed=7)
        assert rep["mismatches"] == 0, kind


def test_width_mismatch_rejected():
    with pytest.raises(ValueError):
        ba.rca_add(bv(1, 4), bv(1, 5), 0)
    with pytest.raises(ValueError):
        ba.csa_compress(bv(1, 4), bv(1, 4), bv(1, 3))


# -- depth -------------------------------------------------------------------

def test_depth_ha():
    assert ba.logic_depth("ha", 1) == 1


def test_depth_csa_constant():
    depths = {ba.logic_depth("csa", w) for w in (1, 4, 8, 16, 25)}
    assert len(depths) == 1
    assert depths.pop() == ba.logic_depth("pfa", 1)


def test_depth_rca_strictly_increasing():
    ds = [ba.logic_depth("rca", w) for w in range(1, 26)]
    assert all(b > a for a, b in zip(ds, ds[1:]))


def test_depth_mcla_beats_rca_at_25():
    assert ba.logic_depth("mcla", 25) < ba.logic_depth("rca", 25)


def test_depth_unknown_kind():
    with pytest.raises(ValueError):
        ba.logic_depth("cla", 8)


# -- network structural contracts -------------------------------------------

def test_network_rejects_forward_reference():
    net = ba.GateNetwork()
    a = net.add_input("a")
    with pytest.raises(ValueError):
        net.add_gate(ba.AND, a, 5)


def test_network_vectorized_evaluation():
    net = ba.build_rca(8)
    rng = np.random.default_rng(0)
    a = rng.integers(0, 256, 500)
    b = rng.integers(0, 256, 500)
    vals = {f"a{i}": ((a >> i) & 1).astype(np.uint8) for i in range(8)}
    vals.update({f"b{i}": ((b >> i) & 1).astype(np.uint8) for i in range(8)})
    vals["cin"] = np.zeros(500, dtype=np.uint8)
    out = net.evaluate(vals)
    s = sum(out[f"s{i}"].astype(np.int64) << i for i in range(8))
    assert np.array_equal(s + (out["cout"].astype(np.int64) << 8), a + b)


def test_spfa_has_sum_only():
    net = ba.build_adder("spfa", 1)
    assert set(net.outputs) == {"s"}
