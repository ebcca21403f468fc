from itertools import combinations

import numpy as np
import pytest

from gamemac.capacity import (
    OptimizerConfig,
    PseudoTelepathyHypothesisError,
    best_vertex_rate_at_pi,
    bruteforce_classical_game_value,
    channel_for,
    classical_capacity_exact,
    classical_upper_bound,
    maximize_over_pi,
    pseudo_telepathy_box,
    pseudo_telepathy_capacity,
    quantum_lower_bound_chsh,
    resource_dependent_bound,
    simplex_grid,
    sweep,
    vertex_count,
    vertex_file_bound,
)
from gamemac.channels import noise_f, type_ii
from gamemac.correlations import (
    EnumerationCapExceeded,
    box_to_csv,
    local_deterministic_boxes,
    pr_box,
    tsirelson_box,
)
from gamemac.games import chsh_game, magic_square_game, mpp_game
from gamemac.infotheory import ProductDistribution, entropy

CFG = OptimizerConfig(seed=0)


@pytest.fixture(scope="module")
def chsh_type2_full():
    """Exact classical result for the noiseless-on-win/fully-noisy-on-loss channel."""
    return classical_capacity_exact(type_ii(chsh_game(), 1.0), CFG)


def test_simplex_grid_covers_vertices():
    pts = simplex_grid(2, 0.25)
    assert len(pts) == 5
    assert all(abs(p.sum() - 1.0) < 1e-12 for p in pts)
    pts3 = simplex_grid(3, 0.5)
    assert len(pts3) == 6  # compositions of 2 into 3 parts


def test_maximize_over_pi_recovers_entropy_max():
    val, pi, diag = maximize_over_pi(lambda p: entropy(p.joint()), 2, 2, CFG)
    assert val == pytest.approx(2.0, abs=1e-9)
    assert np.allclose(pi.joint(), 0.25, atol=1e-5)
    assert diag["grid_best"] <= val


def test_maximize_over_pi_deterministic_across_runs():
    rng_obj = lambda p: entropy(p.joint()) - 0.5 * p.joint().max()
    a = maximize_over_pi(rng_obj, 2, 2, CFG)
    b = maximize_over_pi(rng_obj, 2, 2, CFG)
    assert a[0] == b[0]
    assert all(np.array_equal(x, y) for x, y in zip(a[1].factors, b[1].factors))


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    assert OptimizerConfig().step_for(2) == 0.05
    assert OptimizerConfig().step_for(3) == 0.1
    assert OptimizerConfig(grid_step=0.2).step_for(2) == 0.2


def test_vertex_counts():
    assert vertex_count(chsh_game()) == 256
    assert vertex_count(magic_square_game()) == 24**3 * 24**3


def test_classical_exact_chsh_value(chsh_type2_full):
    # frozen from the vertex enumeration; the coarse reference is 1.44
    assert chsh_type2_full.value == pytest.approx(1.4352809, abs=1e-4)
    assert chsh_type2_full.kind == "exact"
    assert chsh_type2_full.resource == "L"
    assert chsh_type2_full.argmax_encoder.startswith("vertex:")
    assert chsh_type2_full.diagnostics["vertices"] == 256


def test_classical_exact_beats_every_vertex_at_its_pi(chsh_type2_full):
    ch = type_ii(chsh_game(), 1.0)
    best_at_pi = best_vertex_rate_at_pi(ch, chsh_type2_full.argmax_pi)
    assert best_at_pi == pytest.approx(chsh_type2_full.value, abs=1e-9)


def test_classical_exact_refuses_magic_square():
    with pytest.raises(EnumerationCapExceeded) as err:
        classical_capacity_exact(type_ii(magic_square_game(), 1.0), CFG)
    assert "classical_upper_bound" in str(err.value)


def test_best_vertex_rate_cap():
    with pytest.raises(EnumerationCapExceeded):
        best_vertex_rate_at_pi(
            type_ii(magic_square_game(), 1.0), ProductDistribution.uniform(2, 3)
        )


def test_bruteforce_game_values():
    omega, strats = bruteforce_classical_game_value(chsh_game())
    assert omega == 0.75
    assert len(strats) == 2
    # the returned strategy actually achieves the value
    game = chsh_game()
    wins = sum(
        game.wins(q, (strats[0][q[0]], strats[1][q[1]])) for q in game.question_tuples()
    )
    assert wins / 4 == omega
    assert bruteforce_classical_game_value(magic_square_game())[0] == 8 / 9
    assert bruteforce_classical_game_value(mpp_game(3))[0] == 7 / 8


def test_mpp_game_value_formula():
    # 3/4 + 2^-(ceil(n/2)+1), checked by brute force for small n
    for n in (2, 3, 4):
        omega, _ = bruteforce_classical_game_value(mpp_game(n))
        assert omega == 0.75 + 2.0 ** -(-(-n // 2) + 1)


def test_bruteforce_cap():
    with pytest.raises(EnumerationCapExceeded):
        bruteforce_classical_game_value(mpp_game(3), cap=10)


def test_classical_upper_bound_chsh():
    ch = type_ii(chsh_game(), 1.0)
    result = classical_upper_bound(ch, 0.75, CFG)
    assert result.value == pytest.approx(1.6276, abs=1e-3)
    assert result.kind == "upper-bound"
    assert result.diagnostics["r_max"] == 3


def test_classical_upper_bound_dominates_exact(chsh_type2_full):
    bound = classical_upper_bound(type_ii(chsh_game(), 1.0), 0.75, CFG)
    assert bound.value >= chsh_type2_full.value - 1e-9


def test_classical_bound_is_resource_bound_with_subset_mass():
    ch = type_ii(chsh_game(), 0.8)
    r_max = 3

    def subset_mass(pm):
        return float(np.sort(pm)[::-1][:r_max].sum())

    via_generic = resource_dependent_bound(ch, subset_mass, CFG)
    via_classical = classical_upper_bound(ch, 0.75, CFG).value
    assert via_generic == pytest.approx(via_classical, abs=1e-12)


def test_resource_bound_with_perfect_resource_hits_ceiling():
    # max_omega = 1 makes the bound log2(delta) - f_w exactly
    ch = type_ii(chsh_game(), 0.7)
    val = resource_dependent_bound(ch, 1.0, CFG)
    assert val == pytest.approx(2.0 - ch.f_w, abs=1e-9)


def test_resource_bound_monotone_in_omega():
    ch = type_ii(chsh_game(), 0.9)
    vals = [resource_dependent_bound(ch, w, CFG) for w in (0.5, 0.75, 1.0)]
    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12


def test_subset_mass_matches_exhaustive_subsets():
    # sorted top-r mass equals the max over all r-subsets
    rng = np.random.default_rng(5)
    pm = rng.dirichlet(np.ones(4))
    for r in (1, 2, 3):
        sorted_mass = np.sort(pm)[::-1][:r].sum()
        brute = max(sum(pm[list(s)]) for s in combinations(range(4), r))
        assert sorted_mass == pytest.approx(brute, abs=1e-15)


def test_classical_upper_bound_validates_omega():
    with pytest.raises(ValueError):
        classical_upper_bound(type_ii(chsh_game(), 1.0), 0.0)


@pytest.mark.parametrize(
    "game,delta",
    [(chsh_game(), 4), (magic_square_game(), 9), (mpp_game(3), 8)],
)
def test_pseudo_telepathy_capacity_closed_form(game, delta):
    box = pseudo_telepathy_box(game)
    for eta in (0.4, 0.75, 1.0):
        ch = type_ii(game, eta)
        result = pseudo_telepathy_capacity(ch, box)
        assert result.value == pytest.approx(np.log2(delta) - noise_f(delta, eta), abs=1e-12)
        assert result.kind == "exact"
        assert abs(result.diagnostics["direct_sum_rate"] - result.value) <= 1e-9


def test_pseudo_telepathy_resources():
    chsh = type_ii(chsh_game(), 0.8)
    assert pseudo_telepathy_capacity(chsh, pr_box()).resource == "NS"
    ms = type_ii(magic_square_game(), 0.8)
    assert pseudo_telepathy_capacity(ms, pseudo_telepathy_box(magic_square_game())).resource == "Q"


def test_pseudo_telepathy_rejects_imperfect_box():
    ch = type_ii(chsh_game(), 0.8)
    with pytest.raises(PseudoTelepathyHypothesisError):
        pseudo_telepathy_capacity(ch, tsirelson_box())


def test_pseudo_telepathy_rejects_nonuniform_support():
    # a signal-free box that wins CHSH but skews its output marginal
    from gamemac.correlations import CorrelationBox

    table = np.zeros((4, 4))
    for q1 in range(2):
        for q2 in range(2):
            target = q1 & q2
            # weight 0.75/0.25 between the two winning answer pairs
            table[q1 * 2 + q2, 0 * 2 + (0 ^ target)] = 0.75
            table[q1 * 2 + q2, 1 * 2 + (1 ^ target)] = 0.25
    skewed = CorrelationBox(2, 2, 2, table, name="skewed")
    with pytest.raises(PseudoTelepathyHypothesisError) as err:
        pseudo_telepathy_capacity(type_ii(chsh_game(), 0.8), skewed)
    assert "uniform" in str(err.value)


def test_quantum_lower_bound_chsh():
    result = quantum_lower_bound_chsh(type_ii(chsh_game(), 1.0), CFG)
    assert result.kind == "lower-bound"
    assert result.resource == "Q"
    # noiseless winning branch: rate = 2 - f(4, cos^2(pi/8)) at uniform pi
    expected = 2.0 - noise_f(4, np.cos(np.pi / 8) ** 2)
    assert result.value == pytest.approx(expected, abs=1e-6)


def test_quantum_lower_bound_requires_chsh():
    with pytest.raises(ValueError):
        quantum_lower_bound_chsh(type_ii(mpp_game(3), 1.0), CFG)


def test_vertex_file_bound_matches_exact_for_local_vertices(tmp_path, chsh_type2_full):
    # all 16 local vertices through E* reproduce the exact classical value
    from gamemac.games import unpack_index

    path = tmp_path / "local.csv"
    with open(path, "w") as fh:
        for box in local_deterministic_boxes(2, 2, 2):
            fh.write(f"{box.n},{box.d},{box.D}\n")
            for qi in range(4):
                ai = int(np.argmax(box.table[qi]))
                q = unpack_index(qi, 2, 2)
                a = unpack_index(ai, 2, 2)
                fh.write(f"{q[0]},{q[1]},{a[0]},{a[1]},1\n")
    ch = type_ii(chsh_game(), 1.0)
    result = vertex_file_bound(ch, path, CFG)
    assert result.diagnostics["boxes"] == 16
    assert result.value <= chsh_type2_full.value + 1e-9
    assert result.value >= chsh_type2_full.value - 1e-3


def test_vertex_file_bound_pr_vertex(tmp_path):
    path = tmp_path / "pr.csv"
    box_to_csv(pr_box(), path)
    ch = type_ii(chsh_game(), 0.9)
    result = vertex_file_bound(ch, path, CFG, resource="NS")
    assert result.value == pytest.approx(2.0 - noise_f(4, 0.9), abs=1e-6)
    assert result.resource == "NS"


def test_vertex_file_bound_scenario_mismatch(tmp_path):
    path = tmp_path / "pr.csv"
    box_to_csv(pr_box(), path)
    with pytest.raises(ValueError):
        vertex_file_bound(type_ii(magic_square_game(), 0.9), path, CFG)


def test_channel_for_clamps_degenerate_eta():
    with pytest.warns(UserWarning):
        ch = channel_for(chsh_game(), 1, 1.0)
    assert ch.f_w < ch.f_l
    with pytest.warns(UserWarning):
        ch = channel_for(chsh_game(), 2, 0.0)
    assert ch.f_w < ch.f_l
    with pytest.raises(ValueError):
        channel_for(chsh_game(), 3, 0.5)


def test_sweep_rows_and_errors():
    rows = sweep(chsh_game(), 2, [0.5, 1.0], ["NS-exact", "L-bound"], CFG)
    assert len(rows) == 4
    assert rows[0].resource == "NS-exact"
    assert rows[0].value == pytest.approx(2.0 - noise_f(4, 0.5), abs=1e-12)
    assert rows[3].kind == "upper-bound"
    with pytest.raises(ValueError):
        sweep(chsh_game(), 2, [0.5], ["Q-exact"], CFG)
    with pytest.raises(ValueError):
        sweep(chsh_game(), 2, [0.5], ["bogus"], CFG)


def test_sweep_q_exact_for_magic_square():
    rows = sweep(magic_square_game(), 2, [0.8], ["Q-exact"], CFG)
    assert rows[0].value == pytest.approx(np.log2(9) - noise_f(9, 0.8), abs=1e-12)
