import json
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from mopuc import (  # noqa: E402
    ArcIndicator,
    Conjugated,
    DiagonalScalar,
    IdentityLebesgue,
    MatMeasure,
    ReflectionSequence,
    TrigPoly,
    build_system,
    favard_synthesize,
)
from mopuc.measure import random_trigpoly, random_unitary  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


def pinned():
    return json.loads((DATA / "pinned.json").read_text())


def fejer_measure(**kw):
    return MatMeasure(1, TrigPoly([[[1.0]], [[0.5]]]), **kw)


def arc_measure(**kw):
    return MatMeasure(1, ArcIndicator(0.0, np.pi), **kw)


def positive_control():
    return MatMeasure(2, IdentityLebesgue(2), ((1.0, 0.5 * np.eye(2)),))


def random_trig_measure(seed=1, p=2, K=3):
    return MatMeasure(p, random_trigpoly(np.random.default_rng(seed), p, K))


def seed0_sequence():
    return ReflectionSequence.random(np.random.default_rng(0), 2, 6)


def diag_measure():
    a = TrigPoly([[[1.0]], [[0.5]]])
    b = TrigPoly([[[2.0]], [[0.3 - 0.4j]], [[0.2]]])
    return MatMeasure(2, DiagonalScalar((a, b)))


def conjugated_pair(seed=5):
    rng = np.random.default_rng(seed)
    base = random_trigpoly(rng, 2, 2)
    U = random_unitary(rng, 2)
    return MatMeasure(2, base), MatMeasure(2, Conjugated(base, U))


@lru_cache(maxsize=None)
def named_systems():
    """Every recurrence-normalised system the identity suite runs on."""
    base, conj = conjugated_pair()
    return {
        "lebesgue_p2_N30": build_system(MatMeasure.lebesgue(2), 30),
        "fejer_N20": build_system(fejer_measure(), 20),
        "arc_N20": build_system(arc_measure(), 20),
        "positive_control_N25": build_system(positive_control(), 25),
        "favard_seed0_p2_N6": favard_synthesize(seed0_sequence()),
        "favard_p3_N8": favard_synthesize(ReflectionSequence.random(np.random.default_rng(7), 3, 8)),
        "trigpoly_p2_N10": build_system(random_trig_measure(), 10),
        "trigpoly_p3_N8_moments": build_system(random_trig_measure(3, 3, 4), 8, method="moments"),
        "diagonal_N12": build_system(diag_measure(), 12),
        "conjugated_N12": build_system(conj, 12),
        "conjugated_base_N12": build_system(base, 12),
    }


@pytest.fixture(scope="session")
def systems():
    return named_systems()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def record(request):
    """Store one PASS/FAIL line for an acceptance criterion, shown in the summary."""

    def _record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.acceptance_lines[number] = line
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
