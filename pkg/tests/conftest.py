import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from specbound import AngularGrid, GridDensity, compute_lags

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FINE = AngularGrid(1 << 14)


def ar_density(coeffs, sigma2=1.0):
    """``theta -> sigma2 / |1 - sum a_i e^{-i(i+1)theta}|^2``."""
    a = np.asarray(coeffs, dtype=float)

    def f(theta):
        z = np.exp(-1j * np.asarray(theta))
        den = 1.0 - sum(ai * z ** (i + 1) for i, ai in enumerate(a))
        return sigma2 / np.abs(den) ** 2

    return f


def reflection_to_ar(kappas):
    """Levinson step-up: reflection coefficients to AR coefficients."""
    a = np.zeros(0)
    for k in kappas:
        a = np.r_[a - k * a[::-1], k]
    return a


def random_pd_lags(rng, order, kind=None):
    """Lags of a random strictly positive spectrum (AR or exp-polynomial)."""
    kind = kind or ("ar" if rng.random() < 0.5 else "exp")
    if kind == "ar":
        kappas = rng.uniform(-0.8, 0.8, order)
        f = ar_density(reflection_to_ar(kappas), rng.uniform(0.5, 2.0))
    else:
        c = rng.normal(0, 0.4, order + 1)
        k = np.arange(order + 1)
        f = lambda t: np.exp(c @ np.cos(np.outer(k, t)))  # noqa: E731
    return compute_lags(GridDensity.from_function(f, FINE), order)


@pytest.fixture(scope="session")
def schemas():
    import jsonschema
    from referencing import Registry, Resource

    loaded = {}
    for name in ("report", "summary", "validation", "error"):
        text = resources.files("specbound").joinpath(f"schemas/{name}.schema.json").read_text()
        loaded[name] = json.loads(text)
    registry = Registry().with_resources(
        [(s["$id"], Resource.from_contents(s)) for s in loaded.values()]
    )

    def validate(name, instance):
        jsonschema.Draft202012Validator(loaded[name], registry=registry).validate(instance)

    return validate


# acceptance results, printed once at the end of the session
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


TWO_PI = 2.0 * math.pi
