import math
import threading

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from martingale_forecast.errors import ConvergenceError, DomainError
from martingale_forecast.numerics import (
    SeedSpec,
    clamp_share,
    erf,
    erfc,
    erfcinv,
    erfinv,
    gaussian_stream,
    integrate,
)
from oracles import erf_taylor, erfc_asymptotic

finite = st.floats(min_value=-30, max_value=30, allow_nan=False)


def test_erf_zero_and_reference():
    assert erf(0.0) == 0.0
    # frozen from the 50-digit Maclaurin oracle
    assert erf_taylor(1.0) == pytest.approx(0.8427007929497149, rel=1e-16)
    assert erf(1.0) == pytest.approx(0.8427007929497149, rel=1e-15)


@pytest.mark.parametrize("x", [0.01, 0.3, 0.75, 1.0, 1.7, 2.5, 3.2])
def test_erf_against_taylor(x):
    assert erf(x) == pytest.approx(erf_taylor(x), rel=1e-15)


@given(finite)
def test_erf_odd(x):
    assert erf(x) + erf(-x) == 0.0
    assert abs(erf(x)) <= 1.0


def test_erfc_reference_value():
    value, bound = erfc_asymptotic(5.0)
    assert abs(value - 1.5374597944280347e-12) <= bound + 1e-27
    assert erfc(5.0) == pytest.approx(1.5374597944280347e-12, rel=1e-14)
    assert erfc(0.0) == 1.0


@given(st.floats(min_value=-6, max_value=6, allow_nan=False))
def test_erfc_reflection(x):
    assert erfc(-x) == pytest.approx(2.0 - erfc(x), abs=1e-15)


@pytest.mark.parametrize("x", [6.0, 10.0, 20.0, 26.0])
def test_erfc_no_underflow(x):
    got = erfc(x)
    assert got > 0.0
    with mpmath.workdps(30):
        assert got == pytest.approx(float(mpmath.erfc(x)), rel=1e-13)


def test_erfinv_basics():
    assert erfinv(0.0) == 0.0
    for p in (-0.9, -0.5, 0.1, 0.8):
        assert erf(erfinv(p)) == pytest.approx(p, rel=1e-12)
    assert erfinv(0.8427007929497149) == pytest.approx(1.0, abs=1e-12)


def test_erfinv_round_trip_grid():
    p = np.concatenate([
        np.linspace(-1 + 1e-9, 1 - 1e-9, 20001),
        1 - np.logspace(-9, -1, 50),
        -1 + np.logspace(-9, -1, 50),
    ])
    back = erf(erfinv(p))
    assert np.max(np.abs(back - p) / np.abs(p).clip(1e-300)) < 1e-12


@given(st.floats(min_value=-1 + 1e-9, max_value=1 - 1e-9, allow_nan=False))
def test_erfinv_odd_and_inverse(p):
    x = erfinv(p)
    assert erfinv(-p) == -x
    if p != 0.0:
        assert abs(erf(x) - p) <= 1e-12 * abs(p)


def test_erfcinv_tail_precision():
    for q in (1e-300, 1e-20, 1e-12, 0.3):
        assert erfc(erfcinv(q)) == pytest.approx(q, rel=1e-12)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_nonfinite_rejected(bad):
    for fn in (erf, erfc, erfinv):
        with pytest.raises(DomainError):
            fn(bad)


@pytest.mark.parametrize("p", [1.0, -1.0, 1.5])
def test_erfinv_domain(p):
    with pytest.raises(DomainError):
        erfinv(p)


def test_clamp_share():
    assert clamp_share(0.0) == 1e-12
    assert clamp_share(1.0) == 1 - 1e-12
    assert clamp_share(0.3) == 0.3


def test_integrate_trivial():
    r = integrate(lambda y: 1.0, 0.0, 1.0)
    assert r.value == pytest.approx(1.0, abs=1e-14)
    assert r.abs_error_estimate >= 0 and r.evaluations >= 1
    assert integrate(lambda y: 2 * y, 0.0, 1.0).value == pytest.approx(1.0, abs=1e-14)


def test_integrate_gaussian_matches_erf():
    kernel = lambda t: 2 / math.sqrt(math.pi) * math.exp(-t * t)  # noqa: E731
    half = integrate(kernel, 0.0, 4.0, tol=1e-12)
    assert abs(half.value - erf(4.0)) <= max(1e-12, half.abs_error_estimate)
    # symmetric interval picks up erf(4) - erf(-4)
    full = integrate(kernel, -4.0, 4.0, tol=1e-12)
    assert abs(full.value - 2 * erf(4.0)) <= max(1e-12, full.abs_error_estimate)


def test_integrate_endpoint_singularity():
    # open rule: the integrand is never evaluated at 0
    r = integrate(lambda y: 1 / math.sqrt(y), 0.0, 1.0, tol=1e-10)
    assert r.value == pytest.approx(2.0, abs=1e-9)


def test_integrate_nonconvergence_carries_best():
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: math.sin(1.0 / x), 1e-6, 1.0, tol=1e-14, limit=5)
    assert info.value.best is not None


@pytest.mark.parametrize("a,b", [(1.0, 0.0), (0.0, math.inf)])
def test_integrate_bad_interval(a, b):
    with pytest.raises(DomainError):
        integrate(lambda x: x, a, b)


def test_seed_validation():
    with pytest.raises(DomainError):
        SeedSpec(-1)
    with pytest.raises(DomainError):
        SeedSpec(2**64)


def test_gaussian_stream_deterministic():
    a = gaussian_stream(SeedSpec(42, 7), 1000)
    b = gaussian_stream(SeedSpec(42, 7), 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, gaussian_stream(SeedSpec(43, 7), 1000))


def test_gaussian_stream_statistics():
    n = 10**6
    z0 = gaussian_stream(SeedSpec(2016, 0), n)
    z1 = gaussian_stream(SeedSpec(2016, 1), n)
    assert abs(z0.mean()) < 0.004
    assert abs(z0.var() - 1.0) < 8 / math.sqrt(n)
    assert abs(np.corrcoef(z0, z1)[0, 1]) < 4 / math.sqrt(n)


def test_gaussian_stream_thread_independent():
    seeds = [SeedSpec(9, i) for i in range(8)]
    serial = [gaussian_stream(s, 5000) for s in seeds]
    out = [None] * len(seeds)

    def work(i):
        out[i] = gaussian_stream(seeds[i], 5000)

    threads = [threading.Thread(target=work, args=(i,)) for i in reversed(range(len(seeds)))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(np.array_equal(a, b) for a, b in zip(serial, out))
