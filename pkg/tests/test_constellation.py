import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdsse.constellation import (
    KINDS,
    draw_symbols,
    make_constellation,
    omega_set_of,
)
from fdsse.streams import substream


@pytest.mark.parametrize("kind", KINDS)
def test_unit_average_energy(kind):
    c = make_constellation(kind)
    assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) < 1e-12


@pytest.mark.parametrize(
    "kind,peak",
    [("pi2bpsk", 1.0), ("qpsk", 1.0), ("16qam", 1.8), ("64qam", 7.0 / 3.0)],
)
def test_peak_amplitude(kind, peak):
    c = make_constellation(kind)
    assert c.peak_amplitude_sq == pytest.approx(peak, abs=1e-12)
    assert c.peak_amplitude_sq == pytest.approx(np.max(np.abs(c.points) ** 2))


@pytest.mark.parametrize(
    "kind,phi", [("pi2bpsk", np.pi / 2), ("qpsk", 0.0), ("16qam", 0.0), ("64qam", 0.0)]
)
def test_rotation_angle(kind, phi):
    assert make_constellation(kind).phi == pytest.approx(phi)


def test_qpsk_points_and_omega():
    c = make_constellation("qpsk")
    expected = {(1 + 1j), (1 - 1j), (-1 + 1j), (-1 - 1j)}
    got = {complex(np.round(p * np.sqrt(2), 9)) for p in c.points}
    assert got == expected
    assert np.allclose(c.omega_set, [0.0, np.pi / 2], atol=1e-12)


def test_pi2bpsk_points_and_omega():
    c = make_constellation("pi2bpsk")
    assert set(np.round(c.points, 12)) == {1.0, -1.0}
    assert np.allclose(c.omega_set, [0.0])


def test_16qam_grid():
    c = make_constellation("16qam")
    levels = np.unique(np.round(c.points.real * np.sqrt(10), 9))
    assert np.allclose(levels, [-3, -1, 1, 3])


def test_omega_16qam_matches_brute_force():
    # oracle: raw double loop over all 16x16 ordered pairs, mod pi
    c = make_constellation("16qam")
    seen = []
    for p in c.points:
        for q in c.points:
            d = (np.angle(p) - np.angle(q)) % np.pi
            if np.pi - d < 1e-9:
                d = 0.0
            if not any(abs(d - s) <= 1e-9 for s in seen):
                seen.append(d)
    assert len(seen) == 10  # the ten distinct values
    assert len(c.omega_set) == 10
    assert np.allclose(np.sort(seen), c.omega_set, atol=1e-9)


def test_omega_single_point():
    assert np.allclose(omega_set_of(np.array([2.0 + 1.0j])), [0.0])


def test_omega_contains_zero_and_sorted():
    for kind in KINDS:
        om = make_constellation(kind).omega_set
        assert om[0] == 0.0
        assert np.all(np.diff(om) > 0)
        assert np.all((om >= 0) & (om < np.pi))


@given(st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False))
@settings(max_examples=30, deadline=None)
def test_omega_rotation_invariance(angle):
    pts = make_constellation("16qam").points
    base = omega_set_of(pts)
    rotated = omega_set_of(pts * np.exp(1j * angle))
    assert len(base) == len(rotated)
    assert np.allclose(base, rotated, atol=1e-7)


def test_omega_densifies_with_order():
    sizes = [len(make_constellation(k).omega_set) for k in ("qpsk", "16qam", "64qam")]
    assert sizes[0] < sizes[1] < sizes[2]


def test_draw_symbols_deterministic():
    c = make_constellation("qpsk")
    a = draw_symbols(c, 4, substream(7, "symbols"))
    b = draw_symbols(c, 4, substream(7, "symbols"))
    assert np.array_equal(a, b)
    d = draw_symbols(c, 4, substream(8, "symbols"))
    assert not np.array_equal(a, d)


def test_draw_symbols_pi2_rotation():
    c = make_constellation("pi2bpsk")
    x = draw_symbols(c, 2, substream(0, "symbols"))
    # index 1 carries the pi/2 rotation: lands on the imaginary axis
    assert abs(x[1].real) < 1e-12
    assert abs(abs(x[1].imag) - 1.0) < 1e-12


def test_draw_symbols_rejects_empty():
    with pytest.raises(ValueError):
        draw_symbols(make_constellation("qpsk"), 0, substream(0))


@pytest.mark.parametrize("kind", KINDS)
def test_draw_statistics(kind):
    c = make_constellation(kind)
    x = draw_symbols(c, 1_000_000, substream(3, "symbols"))
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=5e-3)
    assert abs(np.mean(x)) < 5e-3


def test_gray_adjacent_levels_differ_in_one_bit():
    c = make_constellation("16qam")
    # labels whose I-halves are Gray neighbors map to adjacent I levels
    by_level = {}
    for label, p in enumerate(c.points):
        if np.isclose(p.imag * np.sqrt(10), -3):
            by_level[round(p.real * np.sqrt(10))] = label >> 2
    levels = sorted(by_level)
    for a, b in zip(levels, levels[1:]):
        assert bin(by_level[a] ^ by_level[b]).count("1") == 1


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        make_constellation("8psk")
