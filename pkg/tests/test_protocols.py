import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleport3 import closed_forms as cf
from teleport3.analysis import average_fidelity
from teleport3.errors import ConfigurationError, LabelError
from teleport3.protocols import (
    DEFAULT_TABLES,
    TABLE_GHZ_P0,
    TABLE_GHZ_P1,
    TABLE_W_P0,
    TABLE_W_P1,
    CorrectionTable,
    outcome_weighted_fidelity,
    p0_model,
    p1_ghz_model,
    p1_w_model,
    run_p0,
    run_p1_ghz,
    run_p1_w,
    total_probability,
)
from teleport3.states import BlochAngles, ghz_state, pauli, w_ket, w_state

angles = st.builds(BlochAngles, st.floats(0, math.pi), st.floats(0, 2 * math.pi, exclude_max=True))
nus = st.floats(0, math.pi / 2)

SQ = 1 / math.sqrt(2)
BELL = [np.array(v) for v in ([SQ, 0, 0, SQ], [SQ, 0, 0, -SQ], [0, SQ, SQ, 0], [0, SQ, -SQ, 0])]


def brute_p0(resource_ket, a, nu, table):
    """Statevector pipeline written out with bare tensor contractions."""
    psi = np.kron(a.ket(), resource_ket).reshape(4, 2, 2)  # (qubits 1-2, qubit 3, qubit 4)
    cindy = [np.array([math.sin(nu), math.cos(nu)]), np.array([math.cos(nu), -math.sin(nu)])]
    out = {}
    for j, b in enumerate(BELL, 1):
        for k, c in enumerate(cindy, 1):
            v = np.einsum("x,y,xyz->z", b.conj(), c.conj(), psi)
            v = pauli(table.label(j, k)) @ v
            p = float(np.vdot(v, v).real)
            out[(j, k)] = (p, abs(np.vdot(a.ket(), v)) ** 2)
    return out


class TestTables:
    def test_verbatim_defaults(self):
        assert TABLE_GHZ_P0.to_text() == "1 1 I\n1 2 Z\n2 1 Z\n2 2 I\n3 1 X\n3 2 Y\n4 1 Y\n4 2 X\n"
        assert [TABLE_W_P0.label(j, k) for j, k in TABLE_W_P0.keys()] == list("XXYYIIZZ")
        assert [TABLE_W_P1.label(j) for j in range(1, 5)] == list("XYIZ")
        assert set(DEFAULT_TABLES) == {"ghz-p0", "w-p0", "w-p1", "ghz-p1"}

    @pytest.mark.parametrize("table", list(DEFAULT_TABLES.values()), ids=list(DEFAULT_TABLES))
    def test_round_trip(self, table, tmp_path):
        path = tmp_path / "t.txt"
        table.save(path)
        assert CorrectionTable.load(path).entries == table.entries
        assert path.read_bytes().count(b"\r") == 0

    def test_comments_and_case(self):
        t = CorrectionTable.from_text("# header\n1 - x\n2 - y  # trailing\n\n3 - i\n4 - z\n")
        assert t.entries == TABLE_W_P1.entries

    @pytest.mark.parametrize(
        "text",
        [
            "1 - X\n2 - Y\n3 - I\n",  # missing row
            "1 - X\n2 - Y\n3 - I\n4 - H\n",  # unknown Pauli
            "1 - X\n1 - Y\n3 - I\n4 - Z\n",  # duplicate
            "1 - X\n2 - Y\n3 - I\n5 - Z\n",  # j out of range
            "1 X\n2 - Y\n3 - I\n4 - Z\n",  # wrong arity
            "a - X\n2 - Y\n3 - I\n4 - Z\n",  # not an integer
            "1 1 X\n2 - Y\n3 - I\n4 - Z\n",  # mixed kinds
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(ConfigurationError):
            CorrectionTable.from_text(text)

    def test_kind_mismatch(self):
        with pytest.raises(ConfigurationError):
            run_p0(ghz_state(), BlochAngles(0.3), 0.2, table=TABLE_W_P1)
        with pytest.raises(ConfigurationError):
            run_p1_w(3, BlochAngles(0.3), 4, table=TABLE_W_P0)

    def test_replace(self):
        t = TABLE_W_P1.replace((2, None), "Z")
        assert t.label(2) == "Z" and TABLE_W_P1.label(2) == "Y"
        with pytest.raises(ConfigurationError):
            TABLE_W_P1.replace((2, 1), "Z")


class TestP0:
    @settings(max_examples=25, deadline=None)
    @given(angles)
    def test_ghz_perfect_at_quarter_pi(self, a):
        for r in run_p0(ghz_state(), a, math.pi / 4):
            assert r.branch_probability == pytest.approx(1 / 8, abs=1e-12)
            assert r.fidelity == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0, math.pi), nus)
    def test_w_perfect_copy_branch(self, theta, nu):
        r = run_p0(w_state(), BlochAngles(theta, 0.0), math.pi / 2, table=TABLE_W_P0)[0]
        assert (r.j, r.k) == (1, 1)
        assert r.fidelity == pytest.approx(1.0, abs=1e-12)
        c2 = math.cos(theta / 2) ** 2
        assert r.branch_probability == pytest.approx((1 + c2) / 6 / (1 + c2), abs=1e-12)

    def test_ghz_basis_input(self):
        # |0> with nu = 0: half the Cindy outcomes are impossible, the rest perfect.
        recs = run_p0(ghz_state(), BlochAngles(0, 0), 0.0)
        for r in recs:
            if (r.j, r.k) in ((1, 1), (2, 1), (3, 2), (4, 2)):
                assert r.degenerate and r.output_state is None and r.weighted_fidelity == 0
            else:
                assert r.branch_probability == pytest.approx(0.25, abs=1e-12)
                assert r.fidelity == pytest.approx(1, abs=1e-12)
        assert total_probability(recs) == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("theta", np.linspace(0.1, math.pi - 0.1, 5))
    @pytest.mark.parametrize("nu", np.linspace(0, math.pi / 2, 5))
    def test_w_branch_grid(self, theta, nu):
        phi = 1.3
        for r in run_p0(w_state(), BlochAngles(theta, phi), nu, table=TABLE_W_P0):
            if r.stage_probabilities[1] > 1e-9:
                assert r.fidelity == pytest.approx(cf.w_branch_fidelity(r.j, r.k, theta, phi, nu), abs=1e-12)
            assert r.stage_probabilities[0] == pytest.approx(cf.w_bell_probability(r.j, theta), abs=1e-12)
            assert r.stage_probabilities[1] == pytest.approx(cf.w_cindy_probability(r.j, r.k, theta, phi, nu), abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(angles, nus, st.sampled_from(["ghz", "w"]))
    def test_matches_brute_force(self, a, nu, kind):
        ket = np.zeros(8)
        if kind == "ghz":
            res, table = ghz_state(), TABLE_GHZ_P0
            ket[[0, 7]] = SQ
        else:
            res, table = w_state(), TABLE_W_P0
            ket[[1, 2, 4]] = 1 / math.sqrt(3)
        ref = brute_p0(ket, a, nu, table)
        for r in run_p0(res, a, nu, table=table):
            p, wf = ref[(r.j, r.k)]
            assert r.branch_probability == pytest.approx(p, abs=1e-12)
            assert r.weighted_fidelity == pytest.approx(wf, abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(angles, nus, st.floats(0, 1))
    def test_closure_and_fast_path(self, a, nu, w):
        from teleport3.analysis import resource_state

        res = resource_state("ghz", w)
        recs = run_p0(res, a, nu)
        assert total_probability(recs) == pytest.approx(1, abs=1e-10)
        for r in recs:
            if r.output_state is not None:
                m = r.output_state.matrix
                assert abs(np.trace(m) - 1) < 1e-10
                assert np.min(np.linalg.eigvalsh(m)) > -1e-9
        prob, weighted = p0_model(res, nu).evaluate(a.theta, a.phi)
        np.testing.assert_allclose(prob, [r.branch_probability for r in recs], atol=1e-12)
        np.testing.assert_allclose(weighted, [r.weighted_fidelity for r in recs], atol=1e-12)

    def test_wrong_labels(self):
        with pytest.raises(LabelError):
            run_p0(ghz_state(labels=(1, 2, 3)), BlochAngles(0.2), 0.1)


class TestP1:
    @pytest.mark.parametrize("n", [3, 5])
    def test_equator_probabilities(self, n):
        recs = run_p1_w(n, BlochAngles(math.pi / 2, 0.4), n + 1)
        for r in recs:
            assert r.branch_probability == pytest.approx(0.25, abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(angles)
    def test_receiver_symmetry(self, a):
        r3 = run_p1_w(3, a, 3)
        r4 = run_p1_w(3, a, 4)
        for x, y in zip(r3, r4):
            assert x.fidelity == pytest.approx(y.fidelity, abs=1e-12)
            assert x.branch_probability == pytest.approx(y.branch_probability, abs=1e-12)

    @settings(max_examples=15, deadline=None)
    @given(angles, st.integers(3, 5), st.data())
    def test_density_matches_statevector(self, a, n, data):
        receiver = data.draw(st.integers(3, n + 1))
        dens = run_p1_w(n, a, receiver, method="density")
        sv = run_p1_w(n, a, receiver, method="statevector")
        for x, y in zip(dens, sv):
            assert x.branch_probability == pytest.approx(y.branch_probability, abs=1e-12)
            assert x.weighted_fidelity == pytest.approx(y.weighted_fidelity, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 6, 10])
    def test_oracle(self, n):
        theta = 1.2
        for r in run_p1_w(n, BlochAngles(theta, 2.5), n + 1):
            assert r.branch_probability == pytest.approx(cf.wn_bell_probability(r.j, theta, n), abs=1e-12)
            assert r.fidelity == pytest.approx(cf.w_p1_branch_fidelity(r.j, theta, n), abs=1e-12)

    def test_ghz_north_pole(self):
        recs = run_p1_ghz(BlochAngles(0, 0), 4)
        assert recs[0].fidelity == pytest.approx(1, abs=1e-12)
        assert outcome_weighted_fidelity(recs) == pytest.approx(1, abs=1e-12)

    def test_ghz_identity_corrections_fall_short(self):
        # Psi outcomes flip the receiver; uncorrected they score only 1/2 on average.
        ident = CorrectionTable({(j, None): "I" for j in range(1, 5)})
        assert average_fidelity(p1_ghz_model(4, ident)) == pytest.approx(0.5, abs=1e-9)
        assert average_fidelity(p1_ghz_model(4, TABLE_GHZ_P1)) == pytest.approx(2 / 3, abs=1e-9)

    def test_receiver_range(self):
        with pytest.raises(ConfigurationError):
            run_p1_w(3, BlochAngles(0.1), 5)
        with pytest.raises(ConfigurationError):
            run_p1_w(17, BlochAngles(0.1), 4)

    def test_large_n_model(self):
        m = p1_w_model(16, 17)
        assert average_fidelity(m) == pytest.approx(20 / 48, abs=1e-9)
        assert np.count_nonzero(w_ket(16)) == 16


class TestCorrectionDominance:
    def _random_tables(self, count, seed):
        rng = np.random.default_rng(seed)
        keys = TABLE_W_P0.keys()
        for _ in range(count):
            labels = rng.choice(list("IXYZ"), size=len(keys))
            yield CorrectionTable(dict(zip(keys, labels)))

    def _raw_scores(self, nu):
        """Sphere-averaged weighted fidelity of every (branch, Pauli) pair."""
        from teleport3.analysis import branch_averages

        scores = {}
        for p in "IXYZ":
            t = CorrectionTable({key: p for key in TABLE_W_P0.keys()})
            _, weighted = branch_averages(p0_model(w_state(), nu, t))
            for key, v in zip(t.keys(), weighted):
                scores[(key, p)] = v
        return scores

    def test_spot_check_quarter_pi(self):
        nu = math.pi / 4
        ref = average_fidelity(p0_model(w_state(), nu, TABLE_W_P0))
        for t in self._random_tables(256, 11):
            assert average_fidelity(p0_model(w_state(), nu, t)) <= ref + 1e-12

    def test_exhaustive_quarter_pi(self):
        # The average is a sum of per-branch terms, so the best of 4^8 tables is
        # the per-branch best.
        scores = self._raw_scores(math.pi / 4)
        best = sum(max(scores[(key, p)] for p in "IXYZ") for key in TABLE_W_P0.keys())
        assert best == pytest.approx(7 / 9, abs=1e-12)

    def test_counterexample_at_zero(self):
        # Away from the middle of the nu range another table beats the default one.
        alt = CorrectionTable.from_text("1 1 I\n1 2 X\n2 1 I\n2 2 Y\n3 1 X\n3 2 I\n4 1 X\n4 2 Z\n")
        assert average_fidelity(p0_model(w_state(), 0.0, TABLE_W_P0)) == pytest.approx(7 / 9, abs=1e-12)
        assert average_fidelity(p0_model(w_state(), 0.0, alt)) == pytest.approx(8 / 9, abs=1e-12)
        scores = self._raw_scores(0.0)
        best = sum(max(scores[(key, p)] for p in "IXYZ") for key in TABLE_W_P0.keys())
        assert best == pytest.approx(8 / 9, abs=1e-12)
