import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdmol import sspgraphd as ssp
from hdmol import vsa
from hdmol.structures import Atom, MoleculeGraph, build_edges

from conftest import B, PB, naive_circ_conv, naive_dft, naive_idft

coords = st.floats(-10, 10, allow_nan=False)
points = st.tuples(coords, coords, coords)


def oracle_frac_power(a, e):
    return naive_idft(np.exp(1j * e * np.angle(naive_dft(a))))


def oracle_position(p, basis):
    x, y, z = (c / basis.length_scale for c in p)
    S = naive_circ_conv(oracle_frac_power(basis.X, x), oracle_frac_power(basis.Y, y))
    return naive_circ_conv(S, oracle_frac_power(basis.Z, z))


def oracle_object(g, i, H):
    nbrs = [e.j if e.i == i else e.i for e in g.edges if i in (e.i, e.j)]
    own = H[g.atoms[i].element]
    if not nbrs:
        return own
    nm = sum(H[g.atoms[j].element] for j in nbrs)
    return naive_circ_conv(own, nm / np.linalg.norm(nm))


def oracle_graph(g, cb, basis):
    return 0.5 * sum(naive_circ_conv(oracle_object(g, i, cb.H), oracle_position(a.position, basis))
                     for i, a in enumerate(g.atoms))


def random_graph(rng, n, name="r"):
    atoms = [Atom(int(rng.integers(1, 119)), tuple(rng.uniform(0, 5, 3))) for _ in range(n)]
    return MoleculeGraph(name, atoms, build_edges(atoms, 4.0))


@pytest.fixture(scope="module")
def tiny():
    return ssp.make_codebook(seed=3, dim=8), ssp.make_basis(seed=3, dim=8)


@pytest.fixture(scope="module")
def small():
    return ssp.make_codebook(seed=4, dim=256), ssp.make_basis(seed=4, dim=256)


def test_basis_unitary_and_quasi_orthogonal():
    basis = ssp.make_basis(seed=1)
    axes = (basis.X, basis.Y, basis.Z)
    assert all(vsa.is_unitary(a, atol=1e-9) for a in axes)
    for a in range(3):
        for b in range(a + 1, 3):
            assert abs(vsa.similarity(axes[a], axes[b])) < 0.05


def test_codebook_unitary(tiny):
    cb, _ = tiny
    assert cb.H.shape == (119, 8)
    assert all(vsa.is_unitary(cb.H[z], atol=1e-9) for z in range(1, 119))


def test_origin_is_identity(small):
    _, basis = small
    np.testing.assert_allclose(ssp.encode_position((0, 0, 0), basis), vsa.unit_impulse(256), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(points, points)
def test_position_encoding_is_additive(a, b):
    basis = ssp.make_basis(seed=6, dim=128)
    lhs = ssp.encode_position(np.add(a, b), basis)
    rhs = vsa.circ_conv(ssp.encode_position(a, basis), ssp.encode_position(b, basis))
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-9)
    assert vsa.is_unitary(lhs, atol=1e-6)


def test_position_matches_spectral_phase_oracle(small):
    _, basis = small
    phases = [np.angle(np.fft.fft(a)) for a in (basis.X, basis.Y, basis.Z)]
    spectrum = np.exp(1j * (1 * phases[0] + 2 * phases[1] + 3 * phases[2]))
    np.testing.assert_allclose(ssp.encode_position((1, 2, 3), basis), np.fft.ifft(spectrum).real,
                               rtol=0, atol=1e-9)
    np.testing.assert_allclose(ssp.encode_position((1, 2, 3), basis),
                               vsa.circ_conv(vsa.circ_conv(vsa.frac_power(basis.X, 1), vsa.frac_power(basis.Y, 2)),
                                             vsa.frac_power(basis.Z, 3)), rtol=0, atol=1e-9)


def test_length_scale_divides_coordinates():
    b1 = ssp.make_basis(seed=2, dim=64, length_scale=1.0)
    b2 = ssp.make_basis(seed=2, dim=64, length_scale=2.0)
    np.testing.assert_allclose(ssp.encode_position((2, 4, 6), b2), ssp.encode_position((1, 2, 3), b1),
                               atol=1e-12)


@pytest.mark.parametrize("p", [(np.nan, 0, 0), (0, np.inf, 0), (1, 2)])
def test_position_rejects_bad_input(small, p):
    with pytest.raises(ValueError):
        ssp.encode_position(p, small[1])


def test_spatial_memory_examples(small):
    cb, basis = small
    obj = cb.H[7]
    np.testing.assert_allclose(ssp.encode_spatial_memory([(obj, (0, 0, 0))], basis), obj, atol=1e-12)
    one = ssp.encode_spatial_memory([(obj, (1, 2, 0.5))], basis)
    two = ssp.encode_spatial_memory([(obj, (1, 2, 0.5)), (obj, (1, 2, 0.5))], basis)
    np.testing.assert_allclose(two, 2 * one, atol=1e-12)
    with pytest.raises(ValueError):
        ssp.encode_spatial_memory([], basis)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 118), points), min_size=1, max_size=6), st.integers(0, 5))
def test_spatial_memory_is_linear(items, cut):
    cb, basis = ssp.make_codebook(seed=8, dim=64), ssp.make_basis(seed=8, dim=64)
    objs = [(cb.H[z], p) for z, p in items]
    whole = ssp.encode_spatial_memory(objs, basis)
    if 0 < cut < len(objs):
        parts = ssp.encode_spatial_memory(objs[:cut], basis) + ssp.encode_spatial_memory(objs[cut:], basis)
        np.testing.assert_allclose(whole, parts, atol=1e-12)
    direct = sum(vsa.circ_conv(o, ssp.encode_position(p, basis)) for o, p in objs)
    np.testing.assert_allclose(whole, direct, atol=1e-12)


def test_isolated_atom_object_is_element_vector(tiny):
    cb, _ = tiny
    g = MoleculeGraph("one", [Atom(6, (0, 0, 0))])
    np.testing.assert_array_equal(ssp.object_vector(g, 0, cb), cb.H[6])


def test_pbb2_lead_object_collapses(pbb2):
    cb = ssp.make_codebook(seed=1, dim=512)
    np.testing.assert_allclose(ssp.object_vector(pbb2, 0, cb), vsa.circ_conv(cb.H[PB], cb.H[B]), atol=1e-9)


def test_object_vector_three_neighbours(tiny):
    cb, _ = tiny
    atoms = [Atom(14, (0, 0, 0)), Atom(8, (1.6, 0, 0)), Atom(8, (0, 1.6, 0)), Atom(26, (0, 0, 1.6))]
    g = MoleculeGraph("si", atoms, build_edges(atoms, 2.0))
    assert len(g.neighbors(0)) == 3
    np.testing.assert_allclose(ssp.object_vector(g, 0, cb), oracle_object(g, 0, cb.H), rtol=0, atol=1e-12)
    with pytest.raises(IndexError):
        ssp.object_vector(g, 4, cb)


def test_single_atom_at_origin_is_half_element(tiny):
    cb, basis = tiny
    g = MoleculeGraph("one", [Atom(6, (0, 0, 0))])
    np.testing.assert_allclose(ssp.encode_sspgraphd(g, cb, basis), 0.5 * cb.H[6], atol=1e-15)


def test_pbb2_full_encoding_brute_force(pbb2, tiny):
    cb, basis = tiny
    np.testing.assert_allclose(ssp.encode_sspgraphd(pbb2, cb, basis), oracle_graph(pbb2, cb, basis),
                               rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 6))
def test_graph_encoding_matches_expansion(seed, n):
    cb, basis = ssp.make_codebook(seed % 97, dim=8), ssp.make_basis(seed % 89, dim=8)
    g = random_graph(vsa.make_rng(seed), n)
    np.testing.assert_allclose(ssp.encode_sspgraphd(g, cb, basis), oracle_graph(g, cb, basis),
                               rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32), st.tuples(*[st.floats(-3, 3)] * 3))
def test_translation_equivariance(seed, delta):
    cb, basis = ssp.make_codebook(seed=5, dim=256), ssp.make_basis(seed=5, dim=256)
    g = random_graph(vsa.make_rng(seed), 5)
    moved = ssp.encode_sspgraphd(g.translated(delta), cb, basis)
    expected = vsa.circ_conv(ssp.encode_sspgraphd(g, cb, basis), ssp.encode_position(delta, basis))
    assert vsa.similarity(moved, expected) >= 1 - 1e-9
    np.testing.assert_allclose(moved, expected, rtol=0, atol=1e-9 * np.linalg.norm(expected) + 1e-12)


def test_centering_removes_translation(small, synthetic54):
    cb, basis = small
    g = synthetic54[3]
    a = ssp.encode_sspgraphd(g, cb, basis, center=True)
    b = ssp.encode_sspgraphd(g.translated((1.5, -2.0, 0.7)), cb, basis, center=True)
    np.testing.assert_allclose(a, b, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(idx=st.integers(0, 53), random=st.randoms(use_true_random=False))
def test_permutation_invariance(idx, random, synthetic54):
    cb, basis = ssp.make_codebook(seed=4, dim=256), ssp.make_basis(seed=4, dim=256)
    g = synthetic54[idx]
    order = list(range(len(g.atoms)))
    random.shuffle(order)
    np.testing.assert_array_equal(ssp.encode_sspgraphd(g, cb, basis),
                                  ssp.encode_sspgraphd(g.relabeled(order), cb, basis))


def test_objects_unit_norm_positions_unitary_graph_norm_bounded(small, synthetic54):
    cb, basis = small
    for g in synthetic54[:10]:
        for i, atom in enumerate(g.atoms):
            assert abs(np.linalg.norm(ssp.object_vector(g, i, cb)) - 1) < 1e-9
            assert vsa.is_unitary(ssp.encode_position(atom.position, basis), atol=1e-6)
        G = ssp.encode_sspgraphd(g, cb, basis)
        assert np.linalg.norm(G) <= len(g.atoms) / 2 + 1e-6


def test_dimension_mismatch(tiny, small):
    with pytest.raises(vsa.DimensionError):
        ssp.encode_sspgraphd(MoleculeGraph("x", [Atom(1, (0, 0, 0))]), tiny[0], small[1])


def test_empty_graph_rejected(tiny):
    with pytest.raises(ValueError):
        ssp.encode_sspgraphd(MoleculeGraph("e", []), *tiny)
