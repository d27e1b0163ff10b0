from pathlib import Path

import pytest

from holoscale.dsl import parse_config

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
CORPUS_FILES = sorted(CORPUS.glob("*.cdl"))


def load(name: str):
    return parse_config((CORPUS / f"{name}.cdl").read_text())


@pytest.fixture(scope="session")
def corpus():
    return {p.stem: parse_config(p.read_text()) for p in CORPUS_FILES}


def make_family(f: str, g: str, alpha: str | tuple = "1 - 2^(-j)", limit: complex = 1.0):
    from holoscale.dsl.config import MAP_NAMES, SCHEDULE_NAMES, MapFamily
    from holoscale.dsl.parser import parse_expr

    sched = parse_expr(alpha, SCHEDULE_NAMES) if isinstance(alpha, str) else tuple(alpha)
    return MapFamily(parse_expr(f, MAP_NAMES), parse_expr(g, MAP_NAMES), sched, limit)


BIDISC_G = "(w - a)/(1 - conj(a)*w)"


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
