import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landscape_clt.disorder import ConfigurationError, DisorderSpec, UnsupportedOperation, rademacher, std_normal
from landscape_clt.landscapes import (Assignment, BranchingWalk, DirectedPolymer, DisorderField,
                                      EnumerationRefused, Equicorrelated, HamiltonianCycles,
                                      OffspringLaw, PopulationCapExceeded, SpanningTrees, SpinGlass,
                                      brw_generate, brw_vnk, canonical_cycle, equicorrelated_energies,
                                      make_model)
from landscape_clt.rng import RngStream
from landscape_clt.stats import ks_critical, ks_distance
from landscape_clt.disorder import normal_cdf

from _oracles import brw_expected_vn1, hamiltonian_cycles_as_edge_sets, spanning_trees_by_edge_subsets

SMALL_MODELS = [
    Assignment(4), HamiltonianCycles(5), SpanningTrees(5), DirectedPolymer(6, 1), DirectedPolymer(4, 2),
    DirectedPolymer(3, 3),
]


def _ids(m):
    return m.describe()


# -- sizes and constants ------------------------------------------------------------

def test_base_sizes():
    assert Assignment(3).base_size() == 6
    assert HamiltonianCycles(4).base_size() == 3
    assert SpanningTrees(4).base_size() == 16
    assert DirectedPolymer(5, 2).base_size() == 4**5
    assert SpinGlass.sk(6).base_size() == 64
    assert Assignment(30).base_size() == math.factorial(30)


def test_scaling_constants():
    assert Assignment(100).scaling_cn() == 10
    assert DirectedPolymer(4, 1).scaling_cn() == pytest.approx(math.pi**0.25)
    assert DirectedPolymer(4, 1).scaling_cn() == pytest.approx(1.3313, abs=1e-4)
    assert DirectedPolymer(10, 2).scaling_cn() == pytest.approx(math.sqrt(math.pi * 10 / math.log(10)))
    assert DirectedPolymer(9, 3).scaling_cn() == 3
    assert SpinGlass.sk(4).scaling_cn() == pytest.approx(math.sqrt(6))
    assert HamiltonianCycles(8).scaling_cn() == 2
    assert SpanningTrees(8).scaling_cn() == 2


def test_s_n_squared_closed_forms():
    assert Assignment(3).s_n_squared() == 12
    assert SpanningTrees(3).s_n_squared() == 6
    assert HamiltonianCycles(4).s_n_squared() == 6


@pytest.mark.parametrize("model", SMALL_MODELS, ids=_ids)
def test_s_n_squared_equals_summed_overlaps(model):
    # Var[sum_w X(w)] = sum over ordered pairs of r / n_terms
    overlaps = model.overlap_matrix(model.all_configs())
    assert float(model.s_n_squared()) == pytest.approx(overlaps.sum() / model.n_terms, rel=1e-12)


def test_s_n_squared_unsupported_models():
    with pytest.raises(ConfigurationError):
        SpinGlass.sk(4).s_n_squared()
    with pytest.raises(ConfigurationError):
        BranchingWalk(3, OffspringLaw.constant(2)).s_n_squared()


def test_invalid_sizes_are_rejected():
    for build in (lambda: HamiltonianCycles(2), lambda: Assignment(0), lambda: DirectedPolymer(3, 0),
                  lambda: SpinGlass.sk(1), lambda: DirectedPolymer(1, 2).scaling_cn()):
        with pytest.raises(ConfigurationError):
            build()


# -- enumeration -----------------------------------------------------------------------

def test_enumeration_counts():
    assert len(Assignment(3).all_configs()) == 6
    assert len(DirectedPolymer(3, 1).all_configs()) == 8
    trees = SpanningTrees(4).all_configs()
    assert len(trees) == 16
    assert all(SpanningTrees(4).validate(t) for t in trees)
    assert len({tuple(map(tuple, t)) for t in trees}) == 16


@pytest.mark.parametrize("n", [3, 4, 5])
def test_spanning_trees_match_edge_subset_oracle(n):
    mine = {frozenset(map(tuple, t.tolist())) for t in SpanningTrees(n).all_configs()}
    assert mine == set(spanning_trees_by_edge_subsets(n))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_hamiltonian_cycles_match_oracle(n):
    model = HamiltonianCycles(n)
    mine = {frozenset(frozenset(e) for e in model.edges(c[None])[0].tolist()) for c in model.all_configs()}
    assert mine == set(hamiltonian_cycles_as_edge_sets(n))


def test_enumeration_limit_names_the_count():
    with pytest.raises(EnumerationRefused, match="3628800"):
        Assignment(10).all_configs(limit=1000)


def test_enumerate_configs_yields_each_once():
    seen = [tuple(c) for c in Assignment(4).enumerate_configs()]
    assert len(seen) == len(set(seen)) == 24


# -- sampling ---------------------------------------------------------------------------

def _frequencies_uniform(keys, size, draws):
    counts = Counter(keys)
    assert len(counts) == size
    p = 1 / size
    se = math.sqrt(p * (1 - p) / draws)
    return all(abs(c / draws - p) <= 4 * se for c in counts.values())


def test_spanning_tree_sampling_is_uniform():
    draws = 10**5
    trees = SpanningTrees(4).sample_configs(RngStream(41), draws)
    assert _frequencies_uniform([t.tobytes() for t in trees], 16, draws)


def test_hamiltonian_sampling_is_uniform():
    draws = 10**5
    cycles = HamiltonianCycles(4).sample_configs(RngStream(42), draws)
    assert _frequencies_uniform([c.tobytes() for c in cycles], 3, draws)


def test_assignment_sampling_is_uniform():
    draws = 10**5
    perms = Assignment(3).sample_configs(RngStream(43), draws)
    assert _frequencies_uniform([p.tobytes() for p in perms], 6, draws)


@pytest.mark.parametrize("model", SMALL_MODELS + [SpinGlass.sk(5)], ids=_ids)
def test_samples_are_valid(model):
    for c in model.sample_configs(RngStream(44), 200):
        assert model.validate(c)


def test_sampling_is_reproducible():
    a = Assignment(12).sample_configs(RngStream(9, 3), 50)
    b = Assignment(12).sample_configs(RngStream(9, 3), 50)
    assert np.array_equal(a, b)


# -- energies ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", SMALL_MODELS, ids=_ids)
def test_energies_are_normalized_sums_of_distinct_weights(model):
    # distinct keys and a sqrt(n_terms) divisor give exact mean 0 and variance 1
    keys = model.element_keys(model.all_configs())
    assert keys.shape[1] == model.n_terms
    assert all(len(set(row)) == model.n_terms for row in keys.tolist())
    field = model.new_field(rademacher(), RngStream(0), constant=1.0)
    assert np.allclose(model.energies(model.all_configs(), field), math.sqrt(model.n_terms))


@pytest.mark.parametrize("model", SMALL_MODELS + [SpinGlass.sk(4)], ids=_ids)
def test_zero_disorder_gives_zero_energy(model):
    field = model.new_field(rademacher(), RngStream(0), constant=0.0)
    assert np.all(model.energies(model.all_configs(), field) == 0)


def test_energy_moments_across_disorder():
    model = Assignment(5)
    config = model.all_configs()[17]
    reps = 20_000
    values = np.array([model.energy(config, model.new_field(std_normal(), RngStream(7, i))) for i in range(reps)])
    assert abs(values.mean()) < 4 / math.sqrt(reps)
    assert values.var() == pytest.approx(1, rel=0.03)


def test_assignment_energy_by_hand():
    model = Assignment(3)
    field = model.new_field(std_normal(), RngStream(8))
    xi = field.dense(9).reshape(3, 3)
    perm = np.array([2, 0, 1])
    assert model.energy(perm, field) == pytest.approx((xi[0, 2] + xi[1, 0] + xi[2, 1]) / math.sqrt(3))


def test_sampled_energies_match_direct_evaluation():
    model = Assignment(10)
    stream = RngStream(3, 4)
    energies = model.replicate_energies(std_normal(), stream, 500)
    configs = model.sample_configs(stream.child("configs"), 500)
    field = model.new_field(std_normal(), stream.child("disorder"))
    assert np.allclose(energies, model.energies(configs, field), atol=1e-12)


def test_field_values_are_pure():
    field = DisorderField(std_normal(), RngStream(2, 2))
    keys = np.array([5, 1, 99, 5])
    v = field.values(keys)
    assert v[0] == v[3] == field.value(5)
    assert np.array_equal(field.values(keys[::-1]), v[::-1])


def test_spin_glass_global_flip_symmetry():
    model = SpinGlass.sk(7)
    field = model.new_field(std_normal(), RngStream(9))
    configs = model.all_configs()
    assert np.array_equal(model.energies(configs, field), model.energies(-configs, field))


@pytest.mark.parametrize("model", [SpinGlass.sk(n) for n in (4, 8, 11, 14)] + [SpinGlass.ea((4, 4)),
                                                                              SpinGlass.ea((3, 4))],
                         ids=_ids)
def test_spin_glass_energies_sum_to_zero(model):
    for i in range(3):
        field = model.new_field(std_normal(), RngStream(10, i))
        assert abs(model.energies(model.all_configs(), field).sum()) < 1e-10


def test_spin_glass_needs_symmetric_couplings():
    with pytest.raises(ConfigurationError):
        SpinGlass.sk(4).new_field(DisorderSpec("centered_exponential"), RngStream(0))


def test_ea_box_edges():
    model = SpinGlass.ea((3, 4))
    assert model.n_edges == 2 * 4 + 3 * 3
    assert model.vertices == 12


# -- overlaps ----------------------------------------------------------------------------

def test_self_overlaps():
    assert Assignment(5).overlap(np.arange(5), np.arange(5)) == 5
    t = SpanningTrees(6).sample_config(RngStream(1))
    assert SpanningTrees(6).overlap(t, t) == 5
    c = HamiltonianCycles(6).sample_config(RngStream(1))
    assert HamiltonianCycles(6).overlap(c, c) == 6
    p = DirectedPolymer(7, 2).sample_config(RngStream(1))
    assert DirectedPolymer(7, 2).overlap(p, p) == 7
    s = SpinGlass.sk(5).sample_config(RngStream(1))
    assert SpinGlass.sk(5).overlap(s, s) == 1.0


def test_distinct_cycles_of_k4_share_two_edges():
    model = HamiltonianCycles(4)
    cycles = model.all_configs()
    for i in range(3):
        for j in range(3):
            if i != j:
                assert model.overlap(cycles[i], cycles[j]) == 2


def test_distinct_trees_of_k3_share_one_edge():
    model = SpanningTrees(3)
    trees = model.all_configs()
    for i in range(3):
        for j in range(3):
            if i != j:
                assert model.overlap(trees[i], trees[j]) == 1


@pytest.mark.parametrize("model", SMALL_MODELS, ids=_ids)
def test_overlap_is_symmetric_and_bounded(model):
    m = model.overlap_matrix(model.all_configs())
    assert np.array_equal(m, m.T)
    assert np.all(np.diag(m) == model.n_terms)
    assert m.max() <= model.n_terms and m.min() >= 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 12), st.data())
def test_polymer_overlap_matches_path_comparison(d, n, data):
    model = DirectedPolymer(n, d)
    steps = st.lists(st.integers(0, 2 * d - 1), min_size=n, max_size=n)
    a, b = np.array(data.draw(steps)), np.array(data.draw(steps))
    pos_a = pos_b = (0,) * d
    shared = 0
    for sa, sb in zip(a, b):
        pos_a = tuple(x + (1 - 2 * (sa % 2)) * (i == sa // 2) for i, x in enumerate(pos_a))
        pos_b = tuple(x + (1 - 2 * (sb % 2)) * (i == sb // 2) for i, x in enumerate(pos_b))
        shared += pos_a == pos_b
    assert model.overlap(a, b) == shared
    assert model.overlap(a, b) == model.overlap(b, a)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 9), st.data())
def test_canonical_form_is_dihedral_invariant(n, data):
    cyc = np.array(data.draw(st.permutations(range(n))))
    shift = data.draw(st.integers(0, n - 1))
    image = np.roll(cyc, shift)
    if data.draw(st.booleans()):
        image = image[::-1]
    assert np.array_equal(canonical_cycle(image), canonical_cycle(cyc))
    assert HamiltonianCycles(n).validate(canonical_cycle(cyc))


def test_config_text_round_trip():
    for model in SMALL_MODELS:
        c = model.sample_config(RngStream(2))
        assert np.array_equal(model.parse_config(model.format_config(c)), c)
    with pytest.raises(ValueError):
        Assignment(3).parse_config("assignment 4 0 1 2 3")


# -- branching random walk -------------------------------------------------------------------

def test_offspring_law_validation():
    for text in ("0:0.5,2:0.5", "1:1.0", "1:0.5,2:0.4"):
        with pytest.raises(ConfigurationError):
            OffspringLaw.parse(text)
    law = OffspringLaw.parse("1:0.5,2:0.5")
    assert law.mean == 1.5 and law.gamma2 == 1.0


def test_binary_tree_sizes():
    tree = brw_generate(OffspringLaw.constant(2), 6, rademacher(), RngStream(0))
    assert [tree.size(g) for g in range(7)] == [2**g for g in range(7)]


def test_expected_generation_size():
    law = OffspringLaw.parse("1:0.5,2:0.5")
    sizes = np.array([brw_generate(law, 8, rademacher(), RngStream(50, i)).size(8) for i in range(10**4)])
    se = sizes.std(ddof=1) / math.sqrt(len(sizes))
    assert abs(sizes.mean() - 1.5**8) <= 3 * se


def test_overlap_is_generation_of_last_common_ancestor():
    tree = brw_generate(OffspringLaw.parse("1:0.3,2:0.4,3:0.3"), 6, rademacher(), RngStream(51))
    g = 6
    for i in range(0, tree.size(g), 3):
        for j in range(0, tree.size(g), 5):
            a, b = tree.ancestors(g, i), tree.ancestors(g, j)
            common = max([h + 1 for h in range(g) if a[h] == b[h]], default=0)
            assert tree.overlap(g, i, j) == common


def test_energies_are_prefix_sums():
    tree = brw_generate(OffspringLaw.constant(2), 4, std_normal(), RngStream(52))
    i = 13
    line = tree.ancestors(4, i)
    steps = [tree.positions[h + 1][line[h]] - (tree.positions[h][line[h - 1]] if h else 0.0) for h in range(4)]
    assert tree.energies(4)[i] == pytest.approx(sum(steps) / 2)


def test_vnk_small_trees():
    binary = OffspringLaw.constant(2)
    tree = brw_generate(binary, 2, rademacher(), RngStream(0))
    assert brw_vnk(tree, 1, 1) == 0
    assert brw_vnk(tree, 2, 1) == pytest.approx(0.25)


def test_vnk_matches_pair_enumeration():
    tree = brw_generate(OffspringLaw.parse("1:0.4,2:0.3,3:0.3"), 5, rademacher(), RngStream(53))
    size = tree.size(5)
    total = sum(tree.overlap(5, i, j) ** 2 for i in range(size) for j in range(size) if i != j)
    assert brw_vnk(tree, 5, 2) == pytest.approx(total / tree.offspring.mean**10)


@pytest.mark.parametrize("k", [1, 2])
def test_expected_vnk(k):
    law = OffspringLaw.parse("1:0.5,2:0.5")
    n = 7
    v = np.array([brw_vnk(brw_generate(law, n + 1, rademacher(), RngStream(54, i)), n + 1, k)
                  for i in range(10**4)])
    expected = law.gamma2 * sum(i**k / law.mean ** (i + 2) for i in range(1, n + 1))
    if k == 1:
        assert expected == pytest.approx(brw_expected_vn1(law.gamma2, law.mean, n + 1))
    se = v.std(ddof=1) / math.sqrt(len(v))
    assert abs(v.mean() - expected) <= 3 * se


def test_population_cap():
    with pytest.raises(PopulationCapExceeded):
        brw_generate(OffspringLaw.constant(3), 10, rademacher(), RngStream(0), cap=1000)


def test_brw_model_interface():
    model = BranchingWalk(5, OffspringLaw.constant(2))
    with pytest.raises(UnsupportedOperation):
        model.base_size()
    with pytest.raises(UnsupportedOperation):
        model.sample_configs(RngStream(0), 3)
    assert model.expected_size() == 32
    e = model.replicate_energies(rademacher(), RngStream(3), 0)
    assert len(e) == 32
    assert len(model.replicate_energies(rademacher(), RngStream(3), 100)) == 100


# -- equicorrelated ------------------------------------------------------------------------------------

def test_equicorrelated_pair_correlation():
    eps, reps = 0.3, 20_000
    pairs = np.array([equicorrelated_energies(2, eps, RngStream(60, i)) for i in range(reps)])
    r = pairs[:, 0] @ pairs[:, 1] / reps
    # E[X1 X2] = eps, Var[X1 X2] = 1 + eps^2
    assert abs(r - eps) < 4 * math.sqrt((1 + eps**2) / reps)


def test_equicorrelated_small_eps_decorrelates():
    reps = 20_000
    pairs = np.array([equicorrelated_energies(2, 1e-6, RngStream(61, i)) for i in range(reps)])
    assert abs(np.corrcoef(pairs.T)[0, 1]) < 4 / math.sqrt(reps)


def test_equicorrelated_marginal_is_standard_normal():
    x = np.array([equicorrelated_energies(1, 0.4, RngStream(62, i))[0] for i in range(10**4)])
    assert ks_distance(x, normal_cdf) < ks_critical(len(x), 0.01)


def test_equicorrelated_eps_rules():
    assert Equicorrelated(16).eps == 1 / 16
    assert Equicorrelated(16, "1/sqrt(n)").eps == 0.25
    assert Equicorrelated(16, "0.2").scaling_cn() == pytest.approx(math.sqrt(5))
    for bad in ("1/n^2", "1.5"):
        with pytest.raises(ConfigurationError):
            Equicorrelated(16, bad)
    with pytest.raises(ConfigurationError):
        equicorrelated_energies(3, 0.0, RngStream(0))


def test_make_model_dispatch():
    assert make_model("polymer", 5, d=2).describe() == "polymer(n=5, d=2)"
    assert make_model("spin_glass", 0, graph="ea", box=(2, 3)).n_edges == 7
    assert make_model("brw", 4, offspring="1:0.5,2:0.5").expected_size() == 1.5**4
    for kwargs in ({"kind": "tsp", "n": 4}, {"kind": "spin_glass", "n": 4, "graph": "torus"},
                   {"kind": "spin_glass", "n": 4, "graph": "ea"}):
        with pytest.raises(ConfigurationError):
            make_model(**kwargs)
