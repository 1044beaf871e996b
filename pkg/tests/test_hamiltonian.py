"""Hamiltonicity: deciders, the Hamiltonian difference, spanning walks,
cubes of graphs, Nash-Williams bases, quasi-Hamiltonian certificates."""

import random

import pytest

from lamplighter import graphs as Gr, groups as G, hamiltonian as H, tsp as T


class TestHamiltonianPath:
    def test_c4_adjacent_pair(self):
        g = Gr.cycle_graph(4)
        path = H.hamiltonian_path(g, 0, 1)
        assert path is not None and len(path) == 4

    def test_c4_antipodal_absent(self):
        assert H.hamiltonian_path(Gr.cycle_graph(4), 0, 2) is None

    def test_grid_same_color_absent(self):
        # Cube(4,3): equal-color endpoints admit no Hamiltonian path (parity)
        g = Gr.cube_graph([4, 3])
        u = next(i for i in range(g.n) if g.labels[i] == (1, 1))
        v = next(i for i in range(g.n) if g.labels[i] == (1, 3))
        assert H.hamiltonian_path(g, u, v) is None

    def test_single_vertex(self):
        g = Gr.FiniteGraph(1, ((),))
        assert H.hamiltonian_path(g, 0, 0) == (0,)

    def test_path_is_valid(self):
        g = Gr.cube_graph([3, 4])
        p = H.hamiltonian_path(g, 0, 1)
        if p is not None:
            assert sorted(p) == list(range(g.n))
            assert all(b in g.adj[a] for a, b in zip(p, p[1:]))


class TestAnalyze:
    def test_c5(self):
        r = H.analyze(Gr.cycle_graph(5))
        assert r.has_hamiltonian_cycle and not r.hamiltonian_connected

    def test_k4(self):
        g = Gr.finite_cayley_graph(G.make_cyclic(4, [1, 2, 3]))
        assert H.analyze(g).hamiltonian_connected

    def test_c6_bipartite_not_laceable(self):
        # even cycles of length >= 6 are not laceable: no Hamiltonian path
        # joins the antipodal cross pair
        r = H.analyze(Gr.cycle_graph(6))
        assert r.bipartite and r.hamiltonian_laceable is False

    def test_c4_laceable(self):
        r = H.analyze(Gr.cycle_graph(4))
        assert r.bipartite and r.hamiltonian_laceable

    def test_implications(self):
        for g in (Gr.cycle_graph(5), Gr.cube_graph([2, 3]),
                  Gr.finite_cayley_graph(G.make_cyclic(4, [1, 2, 3]))):
            r = H.analyze(g)
            if g.n >= 3 and r.hamiltonian_connected:
                assert r.has_hamiltonian_cycle
                assert not r.bipartite
            for (u, v), path in r.witnesses.items():
                assert path[0] == u and path[-1] == v
                assert sorted(path) == list(range(g.n))


class TestHamiltonianDifference:
    @pytest.mark.parametrize("n", range(3, 17))
    def test_cycles_closed_form(self, n):
        assert H.hamiltonian_difference(G.make_cyclic(n, [1])) == n // 2 - 2

    def test_two_element_group(self):
        assert H.hamiltonian_difference(G.make_cyclic(2, [1])) == -1

    def test_hamiltonian_connected_gives_minus_one(self):
        assert H.hamiltonian_difference(G.make_cyclic(4, [1, 2, 3])) == -1

    def test_lower_bound_always(self):
        for n in range(2, 10):
            assert H.hamiltonian_difference(G.make_cyclic(n, [1])) >= -1


class TestGridSpanning:
    def test_square_diagonal_needs_repeat(self):
        w = H.grid_spanning_path(2, 2, (1, 1), (2, 2))
        assert len(w) == 5

    def test_square_adjacent_hamiltonian(self):
        w = H.grid_spanning_path(2, 2, (1, 1), (1, 2))
        assert len(w) == 4

    def test_three_by_three_center_corner(self):
        w = H.grid_spanning_path(3, 3, (2, 2), (1, 1))
        assert len(w) <= 11

    def test_rejects_thin(self):
        with pytest.raises(ValueError):
            H.grid_spanning_path(1, 5, (1, 1), (1, 2))

    def test_bound_and_validity_sample(self):
        rng = random.Random(2)
        for _ in range(25):
            m1, m2 = rng.randint(2, 6), rng.randint(2, 6)
            s = (rng.randint(1, m1), rng.randint(1, m2))
            t = (rng.randint(1, m1), rng.randint(1, m2))
            w = H.grid_spanning_path(m1, m2, s, t)
            assert w[0] == s and w[-1] == t and len(w) <= m1 * m2 + 2
            assert {(i, j) for i in range(1, m1 + 1) for j in range(1, m2 + 1)} == set(w)
            for a, b in zip(w, w[1:]):
                assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


class TestCubeSpanning:
    def test_cube_222_corner_to_corner(self):
        w = H.cube_spanning_path([2, 2, 2], (1, 1, 1), (2, 2, 2))
        assert len(w) == 8  # Hamiltonian on the 3-cube

    def test_tall_grids(self):
        for n in range(2, 7):
            w = H.cube_spanning_path([n, 2], (1, 1), (n, 2))
            assert len(w) <= 2 * n + 2

    def test_322_closed(self):
        w = H.cube_spanning_path([3, 2, 2], (1, 1, 1), (1, 1, 1))
        assert len(w) <= 14

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            H.cube_spanning_path([7], (1,), (3,))
        with pytest.raises(ValueError):
            H.cube_spanning_path([5, 1], (1, 1), (3, 1))

    def test_ones_dropped(self):
        w = H.cube_spanning_path([2, 1, 3], (1, 1, 1), (2, 1, 3))
        assert len(w) <= 8 and all(p[1] == 1 for p in w)


class TestCubeOfGraph:
    def test_star_leaf_to_leaf(self):
        star = Gr.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        p = H.cube3_hamiltonian_path(star, 1, 2)
        assert sorted(p) == [0, 1, 2, 3]

    def test_path_already_hamiltonian(self):
        g = Gr.path_graph(5)
        assert H.cube3_hamiltonian_path(g, 0, 4) == (0, 1, 2, 3, 4)

    def test_equal_endpoints_rejected(self):
        with pytest.raises(ValueError):
            H.cube3_hamiltonian_path(Gr.path_graph(3), 1, 1)

    def test_random_trees_and_graphs(self):
        rng = random.Random(99)
        for trial in range(60):
            n = rng.randint(2, 12)
            edges = [(i, rng.randrange(i)) for i in range(1, n)]
            if trial % 2:
                for _ in range(rng.randint(0, 3)):
                    u, v = rng.randrange(n), rng.randrange(n)
                    if u != v:
                        edges.append((max(u, v), min(u, v)))
            g = Gr.from_edges(n, edges)
            u, v = rng.sample(range(n), 2)
            p = H.cube3_hamiltonian_path(g, u, v)
            assert p[0] == u and p[-1] == v and sorted(p) == list(range(n))
            for a, b in zip(p, p[1:]):
                assert g.distances_from(a)[b] <= 3


class TestNashWilliams:
    def test_z2_standard(self):
        basis = H.nash_williams_basis(G.make_abelian(2, [], [[1, 0], [0, 1]]))
        assert basis.a == ((1, 0), (0, 1)) and basis.m == ()
        assert not basis.degenerate

    def test_z_two_three(self):
        basis = H.nash_williams_basis(G.make_abelian(1, [], [[2], [3]]))
        assert basis.a == ((2,),) and basis.b == ((3,),) and basis.m == (2,)

    def test_z_cross_z2(self):
        basis = H.nash_williams_basis(G.make_abelian(1, [2], [[1, 0], [0, 1]]))
        assert basis.a == ((1, 0),) and basis.m == (2,)

    def test_line_degenerate(self):
        basis = H.nash_williams_basis(G.make_abelian(1, [], [[1]]))
        assert basis.degenerate

    def test_decomposition_unique(self):
        model = G.make_abelian(1, [], [[2], [3]])
        basis = H.nash_williams_basis(model)
        for g in range(-8, 9):
            ps, qs = H.nw_decompose(model, basis, (g,))
            assert 2 * ps[0] + 3 * qs[0] == g
            assert 0 <= qs[0] < 2


class TestQhCertificates:
    def test_z2_box(self):
        model = G.make_abelian(2, [], [[1, 0], [0, 1]])
        cert = H.qh_certificate(model, 2, M=2)
        assert all(w.max_excess <= 2 for w in cert.witnesses)
        H.verify_qh_certificate(model, cert)

    def test_z_one_two_exact(self):
        model = G.make_abelian(1, [], [[1], [2]])
        cert = H.qh_certificate(model, 3, M=1, strategy="ball-exact")
        assert all(w.max_excess <= 1 for w in cert.witnesses)
        H.verify_qh_certificate(model, cert)

    def test_cube_strategy(self):
        model = G.make_free_product(
            G.make_cyclic(8, [1]), G.make_cyclic(2, [1], letter="c")
        )
        cert = H.qh_certificate(model, 1, M=1, strategy="cube")
        assert cert.witnesses[0].max_excess <= 1
        H.verify_qh_certificate(model, cert)

    def test_line_refutation(self):
        ref = H.qh_certificate(G.make_abelian(1, [], [[1]]), 4)
        assert isinstance(ref, H.QhRefutation)
        assert [row[3] for row in ref.rows] == [1, 3, 5, 7]  # 2n - 1

    def test_free_refutation_grows(self):
        ref = H.qh_certificate(G.make_free(2), 3)
        closed = [row[3] for row in ref.rows]
        assert closed == sorted(closed) and closed[0] < closed[-1]

    def test_auto_dispatch(self):
        assert H.qh_certificate(G.make_abelian(1, [], [[1]]), 2).strategy == "refute"
        assert (
            H.qh_certificate(G.make_abelian(2, [], [[1, 0], [0, 1]]), 1).strategy
            == "abelian-box"
        )

    def test_kings_moves_ball_hamiltonian_connected(self):
        # square balls under king's moves: spanning paths repeat only the
        # origin, and only for the closed endpoint
        model = G.make_abelian(2, [], [[1, 0], [0, 1], [1, 1], [1, -1]])
        cert = H.qh_certificate(model, 1, M=1, strategy="ball-exact")
        wit = cert.witnesses[0]
        assert wit.set_size == 9 and wit.max_excess == 1
        closed = wit.walks["0,0"]
        assert len(closed) == 10
        assert all(len(w) == 9 for key, w in wit.walks.items() if key != "0,0")
        H.verify_qh_certificate(model, cert)

    def test_json_round_trip_is_deterministic(self):
        model = G.make_abelian(2, [], [[1, 0], [0, 1]])
        a = H.qh_certificate(model, 1, M=2).to_json()
        b = H.qh_certificate(model, 1, M=2).to_json()
        assert a == b
