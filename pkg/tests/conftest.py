from __future__ import annotations

import math

import jax.numpy as jnp
import pytest

import relcont  # noqa: F401  (enables 64-bit jax)
from relcont.config import reset_settings
from relcont.geometry import Chart, MetricField
from relcont.models import Constants, Signature
from relcont.reporting import reset_report_writers
from relcont.solutions import minkowski


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch):
    """Fresh settings per test, no info lines, two worker threads."""
    monkeypatch.setenv("RELCONT_QUIET", "1")
    monkeypatch.setenv("RELCONT_THREADS", "2")
    reset_settings()
    reset_report_writers()
    yield
    reset_settings()
    reset_report_writers()


@pytest.fixture
def constants() -> Constants:
    return Constants()


@pytest.fixture
def box() -> Chart:
    return Chart(name="box", bounds=((-1.0, 1.0),) * 4)


@pytest.fixture
def flat(box) -> MetricField:
    return minkowski(box)


@pytest.fixture
def random_chart() -> Chart:
    return Chart(name="random", bounds=((-0.5, 1.5),) * 4)


@pytest.fixture
def round_sphere() -> MetricField:
    """Intrinsic metric of a round 2-sphere of radius 2 in (theta, phi)."""
    radius = 2.0
    chart = Chart(name="s2", bounds=((0.2, math.pi - 0.2), (0.0, 6.0)))
    return MetricField(lambda x: radius ** 2 * jnp.diag(jnp.array([1.0, jnp.sin(x[0]) ** 2])), chart,
                       Signature.RIEMANNIAN, name="s2")
