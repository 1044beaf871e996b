"""Group models: normal forms, group law, word lengths."""

import pytest
from hypothesis import given, strategies as st

from lamplighter import groups as G
from lamplighter.groups import word_length_in_group as wl


@pytest.fixture(scope="module")
def c8():
    return G.make_cyclic(8, [1])


@pytest.fixture(scope="module")
def c2():
    return G.make_cyclic(2, [1], letter="c")


@pytest.fixture(scope="module")
def fp82(c8, c2):
    return G.make_free_product(c8, c2)


class TestFiniteTables:
    def test_cyclic_table_laws(self, c8):
        t = c8.table
        assert t.order == 8 and t.identity == 0
        assert t.mul[3][5] == 0 and t.inv[3] == 5

    def test_bad_table_rejected(self):
        with pytest.raises(ValueError):
            G.FiniteGroupTable(2, ((0, 0), (1, 1)), 0, (0, 1))

    def test_direct_product(self):
        t = G.direct_product_table(G.cyclic_table(2), G.cyclic_table(3))
        assert t.order == 6 and t.is_abelian()

    def test_make_cyclic_rejects_nongenerating(self):
        with pytest.raises(ValueError):
            G.make_cyclic(6, [2])

    def test_make_cyclic_symmetrizes(self, c8):
        assert set(c8.gens.elements) == {1, 7}


class TestMultiplyInvert:
    def test_integers_add(self):
        z = G.make_abelian(1, [], [[1]])
        assert (z.element((3,)) * z.element((4,))).payload == (7,)

    def test_free_cancellation(self):
        f = G.make_free(1, "t")
        t = f.element((1,))
        assert (t * t.inverse()).payload == ()

    def test_free_product_merge(self, fp82):
        # (b3 c)(c b) = b4: the c letters cancel at the seam
        a = fp82.element(((0, 3), (1, 1)))
        b = fp82.element(((1, 1), (0, 1)))
        assert fp82.payload_str((a * b).payload) == "b4"

    def test_invert_examples(self, c8):
        assert c8.inv_payload(3) == 5
        f2 = G.make_free(2)
        ab_inv = f2.inv_payload(f2.parse_payload("aB"))
        assert f2.payload_str(ab_inv) == "bA"

    def test_model_mismatch_rejected(self, c8, c2):
        with pytest.raises(ValueError):
            G.multiply(c8.element(1), c2.element(1))


class TestWordLength:
    def test_identity(self, fp82):
        assert wl(fp82.identity) == 0

    def test_octagon_antipode(self, c8):
        assert wl(c8.element(4)) == 4

    def test_free_product_sum(self, fp82):
        bcb = fp82.element(((0, 1), (1, 1), (0, 1)))
        assert wl(bcb) == 3

    def test_nonstandard_gens_bfs(self):
        z = G.make_abelian(1, [], [[2], [3]])
        assert wl(z.element((1,))) == 2  # 3 - 2
        assert wl(z.element((6,))) == 2  # 3 + 3

    def test_mixed_abelian(self):
        m = G.make_abelian(1, [2], [[1, 0], [0, 1]])
        assert wl(m.element((3, 1))) == 4


class TestJsonSpecs:
    def test_round_trip_variants(self):
        specs = [
            {"variant": "cyclic", "n": 8, "gens": [1]},
            {"variant": "abelian", "rank": 2, "moduli": [], "gens": [[1, 0], [0, 1]]},
            {"variant": "free", "rank": 2},
            {
                "variant": "free_product",
                "H": {"variant": "cyclic", "n": 8, "gens": [1]},
                "K": {"variant": "cyclic", "n": 2, "gens": [1], "letter": "c"},
            },
        ]
        expected = {"cyclic": "finite", "abelian": "abelian",
                    "free": "free", "free_product": "free_product"}
        for spec in specs:
            model = G.parse_group_spec(spec)
            assert model.variant == expected[spec["variant"]]

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            G.parse_group_spec({"variant": "braid"})


free_words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8).map(tuple)


class TestProperties:
    @given(free_words)
    def test_normalize_idempotent(self, w):
        f2 = G.make_free(2)
        once = f2.normalize_payload(w)
        assert f2.normalize_payload(once) == once

    @given(free_words, free_words)
    def test_length_of_inverse(self, a, b):
        f2 = G.make_free(2)
        x = f2.element(a) * f2.element(b)
        assert wl(x) == wl(x.inverse())

    @given(free_words, free_words)
    def test_triangle_inequality(self, a, b):
        f2 = G.make_free(2)
        x, y = f2.element(a), f2.element(b)
        assert wl(x * y) <= wl(x) + wl(y)

    @given(st.integers(0, 7), st.integers(0, 1), st.integers(0, 7))
    def test_free_product_associative(self, i, j, k):
        fp = G.make_free_product(G.make_cyclic(8, [1]), G.make_cyclic(2, [1], letter="c"))
        xs = [fp.element(((0, i),)), fp.element(((1, j),)), fp.element(((0, k),))]
        a, b, c = xs
        assert ((a * b) * c).payload == (a * (b * c)).payload

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 7)), max_size=6))
    def test_free_product_normal_form_alternates(self, letters):
        fp = G.make_free_product(G.make_cyclic(8, [1]), G.make_cyclic(2, [1], letter="c"))
        try:
            nf = fp.normalize_payload(tuple(letters))
        except ValueError:
            return  # out-of-range letter index
        for (f1, x1), (f2, _x2) in zip(nf, nf[1:]):
            assert f1 != f2
        for f, x in nf:
            assert x != fp.factors[f].table.identity

    def test_normal_form_length_matches_bfs(self):
        # free-product lengths agree with breadth-first enumeration to radius 6
        from lamplighter.graphs import cayley_ball

        fp = G.make_free_product(G.make_cyclic(8, [1]), G.make_cyclic(2, [1], letter="c"))
        ball = cayley_ball(fp, 6)
        dist = ball.graph.distances_from(0)
        for i, p in enumerate(ball.elements):
            assert dist[i] == fp.length_payload(p)
