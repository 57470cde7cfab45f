import json
import math

import mpmath as mp
import numpy as np
import pytest

from finpart.errors import DomainError, PreconditionError
from finpart.kernels import (REGISTRY, Decay, exp_kernel, j0sq_recip_gamma_kernel, poly_kernel, resolve_kernel,
                             sqrt_ratio_kernel)

mp.mp.dps = 30


def test_registry_ids():
    assert set(REGISTRY) == {"const", "exp", "poly", "sqrt-ratio", "j0sq-recip-gamma"}
    for entry in REGISTRY.values():
        assert entry.doc


@pytest.mark.parametrize("spec,kid", [
    ("const", "const"), ("exp", "exp(1)"), ("exp(2.5)", "exp(2.5)"), ("poly(1,0,3)", "poly(1,0,3)"),
    ("sqrt-ratio(1.5,1)", "sqrt-ratio(1.5,1)"), ("j0sq-recip-gamma", "j0sq-recip-gamma"),
])
def test_resolve(spec, kid):
    assert resolve_kernel(spec).id == kid


def test_resolve_unknown():
    with pytest.raises(KeyError):
        resolve_kernel("cosh")
    with pytest.raises(DomainError):
        resolve_kernel("exp(x)")
    with pytest.raises(DomainError):
        resolve_kernel("sqrt-ratio(1)")


def test_exp_taylor():
    k = exp_kernel(2.0)
    assert k.taylor(3) == pytest.approx(-8 / 6)
    assert k(0.5) == pytest.approx(math.exp(-1))


def test_sqrt_ratio_taylor_vs_mpmath():
    k = sqrt_ratio_kernel(1.5, 1.0)
    ref = mp.taylor(lambda z: mp.sqrt((1.5 + z) / (1 + z)), 0, 12)
    assert np.allclose(k.taylor_coeffs(12), [complex(c) for c in ref], rtol=1e-13, atol=1e-15)
    assert k.rho0 == 1.0


def test_j0sq_taylor_vs_mpmath():
    k = j0sq_recip_gamma_kernel()
    ref = mp.taylor(lambda z: mp.besselj(0, z) ** 2 * mp.rgamma(1 + z), 0, 10)
    assert np.allclose(k.taylor_coeffs(10), [complex(c) for c in ref], rtol=1e-12, atol=1e-15)


def test_j0sq_values():
    k = j0sq_recip_gamma_kernel()
    z = np.array([0.3, 2.0 + 1j, 10.0])
    ref = [complex(mp.besselj(0, complex(v)) ** 2 * mp.rgamma(1 + complex(v))) for v in z]
    assert np.allclose(k(z), ref, rtol=1e-13)


def test_taylor_file(tmp_path):
    p = tmp_path / "k.json"
    p.write_text(json.dumps({"coeffs": [[1, 0], [-1, 0], [0.5, 0]], "radius": "inf",
                             "decay": {"type": "poly", "rate": 2}}))
    k = resolve_kernel(str(p))
    assert k(2.0) == pytest.approx(1.0)
    assert k.decay == Decay("poly", 2.0)


def test_taylor_file_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\"radius\": 1}")
    with pytest.raises(DomainError):
        resolve_kernel(str(p))


def test_zero_origin_rejected():
    with pytest.raises(PreconditionError):
        poly_kernel([0.0, 1.0]).require_nonzero_origin()


def test_decay_validation():
    with pytest.raises(DomainError):
        Decay("exp", 0.0)
    with pytest.raises(DomainError):
        Decay("fast")
