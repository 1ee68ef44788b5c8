import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qpsw.embedding import EmbeddingParams, distance_matrix, hausdorff_distance, maxmin_sample, sliding_window
from qpsw.model import FourierTerm, SpectralModel
from qpsw.persistence.rips import rips_persistence

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQRT3 = math.sqrt(3.0)

_ACCEPTANCE_LINES: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    if report.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
    _ACCEPTANCE_LINES.append((f"{number:>2}", "PASS" if report.passed else "FAIL", f"{title}: {detail}"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, text in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{verdict}] criterion {number.strip()}: {text}")


def two_sines_model() -> SpectralModel:
    """2 sin t + 1.8 sin(sqrt(3) t) as four exponentials."""
    return SpectralModel(
        [
            FourierTerm(1.0, -1j),
            FourierTerm(-1.0, 1j),
            FourierTerm(SQRT3, -0.9j),
            FourierTerm(-SQRT3, 0.9j),
        ]
    )


def three_torus_model() -> SpectralModel:
    return SpectralModel.from_lattice(
        (1.0, math.sqrt(2.0), SQRT3), {(1, 0, 0): 1.0, (0, 1, 0): 1.0, (0, 0, 1): 1.0}
    )


TWO_SINES_TIMES = np.arange(10000) * (60 * math.pi / 10000)
TWO_SINES_D, TWO_SINES_TAU = 4, 11.9577
TWO_SINES_LANDMARKS = 800


@pytest.fixture(scope="session")
def two_sines_experiment():
    """The two-sine reproduction: cloud, landmarks, Hausdorff term and diagrams up to H2."""
    model = two_sines_model()
    params = EmbeddingParams(TWO_SINES_D, TWO_SINES_TAU)
    cloud = sliding_window(model, params, TWO_SINES_TIMES)
    idx = maxmin_sample(cloud, TWO_SINES_LANDMARKS, seed=0)
    sub = cloud.subset(idx)
    diagrams = rips_persistence(distance_matrix(sub), max_dimension=2)
    return {
        "model": model,
        "params": params,
        "cloud": cloud,
        "indices": idx,
        "landmarks": sub,
        "hausdorff": hausdorff_distance(sub, cloud),
        "diagrams": diagrams,
    }
