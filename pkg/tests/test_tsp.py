"""Exact TSP solvers: Held-Karp, oracle, tree closed form, petal recursion."""

import random

import pytest
from hypothesis import given, strategies as st

from lamplighter import graphs as Gr, groups as G, tsp as T
from lamplighter.errors import BoundExceededError, ResourceCapError


def inst(graph, s, t, req, w=None):
    return T.TspInstance(graph, s, t, frozenset(req), w or {})


@pytest.fixture(scope="module")
def octagon():
    return Gr.finite_cayley_graph(G.make_cyclic(8, [1]))


@pytest.fixture(scope="module")
def fp82():
    return G.make_free_product(G.make_cyclic(8, [1]), G.make_cyclic(2, [1], letter="c"))


class TestSolveExact:
    def test_cycle_closed_is_order(self, octagon):
        assert T.solve_exact(inst(octagon, 0, 0, range(8))).length == 8

    def test_cycle_to_antipode(self, octagon):
        # |G| + floor(|G|/2) - 2 on the 8-cycle
        assert T.solve_exact(inst(octagon, 0, 4, range(8))).length == 10

    def test_trivial(self, octagon):
        assert T.solve_exact(inst(octagon, 0, 0, {0})).length == 0

    def test_service_weights_add(self, octagon):
        a = T.solve_exact(inst(octagon, 0, 2, {1, 2}))
        b = T.solve_exact(inst(octagon, 0, 2, {1, 2}, {1: 5, 2: 7}))
        assert b.length == a.length + 12

    def test_required_cap(self):
        g = Gr.path_graph(30)
        with pytest.raises(ResourceCapError):
            T.solve_exact(inst(g, 0, 0, range(25)))

    def test_deterministic_walk(self, octagon):
        a = T.solve_exact(inst(octagon, 0, 4, range(8)))
        b = T.solve_exact(inst(octagon, 0, 4, range(8)))
        assert a == b

    def test_numpy_path_agrees_with_python(self):
        g = Gr.cube_graph([4, 4])
        req = set(range(12))
        lo = T._held_karp_python
        hi = T._held_karp_numpy
        others = sorted(req - {0})
        dist = {v: g.distances_from(v) for v in set(others) | {0}}
        k = len(others)
        Ds = [dist[0][r] for r in others]
        D = [[dist[others[i]][others[j]] for j in range(k)] for i in range(k)]
        a, b = lo(k, Ds, D), hi(k, Ds, D)
        full = (1 << k) - 1
        assert [a[full][i] for i in range(k)] == [int(b[full][i]) for i in range(k)]


class TestOracle:
    def test_path_out_and_back(self):
        g = Gr.path_graph(3)
        assert T.brute_force_oracle(inst(g, 1, 1, {0, 1, 2}), 10).length == 4

    def test_single_vertex(self):
        g = Gr.FiniteGraph(1, ((),))
        assert T.brute_force_oracle(inst(g, 0, 0, {0}), 2).length == 0

    def test_four_cycle_hamiltonian(self):
        g = Gr.cycle_graph(4)
        assert T.brute_force_oracle(inst(g, 0, 1, range(4)), 10).length == 3

    def test_bound_exceeded(self):
        g = Gr.path_graph(5)
        with pytest.raises(BoundExceededError):
            T.brute_force_oracle(inst(g, 0, 0, range(5)), 3)

    def test_cross_validation_randomized(self):
        rng = random.Random(20260811)
        for trial in range(120):
            n = rng.randint(2, 10)
            edges = {(i, rng.randrange(i)) for i in range(1, n)}
            extra = rng.randint(0, n)
            while extra:
                u, v = rng.randrange(n), rng.randrange(n)
                if u != v:
                    edges.add((max(u, v), min(u, v)))
                    extra -= 1
            g = Gr.from_edges(n, [(u, v) for u, v in edges])
            req = set(rng.sample(range(n), rng.randint(1, min(n, 6))))
            w = {}
            if trial % 2:
                w = {r: rng.randint(0, 3) for r in rng.sample(sorted(req), len(req) // 2)}
            i = inst(g, rng.randrange(n), rng.randrange(n), req, w)
            fast = T.solve_exact(i)
            slow = T.brute_force_oracle(i, 40)
            assert fast.length == slow.length, (n, sorted(edges), req, w)


class TestInvariants:
    @given(
        st.sets(st.integers(0, 8), min_size=1, max_size=5),
        st.integers(0, 8),
        st.integers(0, 8),
    )
    def test_symmetry_of_closed_instances(self, req, a, b):
        g = Gr.cube_graph([3, 3])
        fwd = T.solve_exact(T.TspInstance(g, a, b, frozenset(req))).length
        rev = T.solve_exact(T.TspInstance(g, b, a, frozenset(req))).length
        assert fwd == rev  # undirected graph: reversed walks are walks

    @given(st.sets(st.integers(0, 8), min_size=1, max_size=4), st.integers(0, 8))
    def test_translation_free_of_weights(self, req, end):
        g = Gr.cube_graph([3, 3])
        w = {r: 2 for r in req}
        plain = T.solve_exact(T.TspInstance(g, 0, end, frozenset(req))).length
        loaded = T.solve_exact(T.TspInstance(g, 0, end, frozenset(req), w)).length
        assert loaded == plain + 2 * len(req)

    def test_lower_bound(self):
        rng = random.Random(7)
        g = Gr.cube_graph([3, 3])
        for _ in range(40):
            req = set(rng.sample(range(9), rng.randint(1, 5))) | {0}
            w = {r: rng.randint(0, 2) for r in req}
            sol = T.solve_exact(inst(g, 0, rng.randrange(9), req, w))
            assert sol.length >= len(req) - 1 + sum(w.values())

    def test_monotone_in_required(self):
        rng = random.Random(8)
        g = Gr.cube_graph([3, 3])
        for _ in range(40):
            small = set(rng.sample(range(9), 3))
            big = small | set(rng.sample(range(9), 3))
            end = rng.randrange(9)
            a = T.solve_exact(inst(g, 0, end, small)).length
            b = T.solve_exact(inst(g, 0, end, big)).length
            assert a <= b


class TestTreeFormula:
    def test_examples(self):
        f1 = G.make_free(1, "t")
        assert T.ts_tree((), (1, 1), [(1,), (1, 1), (-1,)], f1) == 4
        assert T.ts_tree((), (1, 1), [(1, 1)], f1) == 2
        f2 = G.make_free(2)
        assert T.ts_tree((), (), [(1,), (-1,), (2,), (-2,)], f2) == 8

    def test_against_exact_on_hull(self):
        rng = random.Random(11)
        for rank, letters in ((1, "t"), (2, "ab")):
            model = G.make_free(rank)
            ball = Gr.cayley_ball(model, 4)
            for _ in range(60):
                sup = rng.sample(range(ball.graph.n), rng.randint(1, 5))
                sup = [ball.elements[i] for i in sup]
                end = rng.choice(sup + [()])
                i = inst(
                    ball.graph,
                    0,
                    ball.vertex_of(end),
                    {ball.vertex_of(p) for p in sup},
                )
                assert T.ts_tree((), end, sup, model) == T.solve_exact(i).length

    def test_walk_realizes_value(self):
        f2 = G.make_free(2)
        H = [(1, 2), (-2,), (1,)]
        val = T.ts_tree((), (1,), H, f2)
        cost, walk = T.ts_tree_walk((), (1,), H, f2)
        assert cost == val and walk[0] == () and walk[-1] == (1,)
        for h in H:
            assert f2.normalize_payload(h) in walk


class TestPetals:
    def test_support_in_octagon(self, fp82):
        dec = T.petal_decomposition(fp82, (), [((0, 2),), ()])
        for petal in dec.petals:
            assert all(s == petal.attachment for s in petal.support)

    def test_prefix_routing(self, fp82):
        dec = T.petal_decomposition(fp82, (), [((0, 1), (1, 1), (0, 2))])
        hit = [p for p in dec.petals if p.support]
        assert len(hit) == 1 and hit[0].attachment == ((0, 1),)

    def test_eight_petals_cyclic_order(self, fp82):
        dec = T.petal_decomposition(fp82, (), [])
        assert len(dec.petals) == 8
        assert dec.petals[0].attachment == ()
        assert dec.petals[4].attachment == ((0, 4),)  # furthermost vertex

    def test_far_copy_anchor(self, fp82):
        anchor = ((1, 1), (0, 3))  # c b3: in the octagon c.H
        dec = T.petal_decomposition(fp82, anchor, [()])
        assert dec.petals[0].attachment == ((1, 1),)
        assert dec.petals[0].support == ((),)


class TestFreeProductTs:
    def test_trivial(self, fp82):
        assert T.ts_free_product(fp82, (), (), [()]) == 0

    def test_octagon_closed(self, fp82):
        octagon = [((0, i),) if i else () for i in range(8)]
        assert T.ts_free_product(fp82, (), (), octagon) == 8

    @pytest.mark.parametrize(
        "H,K",
        [(2, 2), (4, 2), (8, 2)],
        ids=["Z2*Z2", "Z4*Z2", "Z8*Z2"],
    )
    def test_matches_ball_exact(self, H, K):
        model = G.make_free_product(
            G.make_cyclic(H, [1]), G.make_cyclic(K, [1], letter="c")
        )
        r = 5
        ball = Gr.cayley_ball(model, r)
        rng = random.Random(100 + H)
        for _ in range(60):
            pool = [p for p in ball.elements if model.length_payload(p) <= r - 2]
            sup = rng.sample(pool, min(len(pool), rng.randint(1, 5)))
            end = rng.choice(sup)
            i = inst(
                ball.graph,
                0,
                ball.vertex_of(end),
                {ball.vertex_of(p) for p in sup},
            )
            assert T.ts_free_product(fp := model, (), end, sup) == T.solve_exact(i).length

    def test_walk_matches_value(self, fp82):
        rng = random.Random(5)
        ball = Gr.cayley_ball(fp82, 4)
        gens = set(fp82.gens.elements)
        for _ in range(40):
            pool = [p for p in ball.elements if fp82.length_payload(p) <= 2]
            sup = rng.sample(pool, rng.randint(1, 4))
            end = rng.choice(sup + [()])
            val = T.ts_free_product(fp82, (), end, sup)
            cost, walk = T.ts_free_product_walk(fp82, (), end, sup)
            assert cost == val
            assert walk[0] == () and walk[-1] == fp82.normalize_payload(end)
            for a, b in zip(walk, walk[1:]):
                assert fp82.mul_payload(fp82.inv_payload(a), b) in gens
            for p in sup:
                assert fp82.normalize_payload(p) in walk

    def test_translation_invariance(self, fp82):
        sup = [((0, 2),), ((0, 4), (1, 1))]
        shift = ((1, 1), (0, 3))
        base = T.ts_free_product(fp82, (), ((0, 4),), sup)
        shifted = T.ts_free_product(
            fp82,
            shift,
            fp82.mul_payload(shift, ((0, 4),)),
            [fp82.mul_payload(shift, p) for p in sup],
        )
        assert base == shifted
