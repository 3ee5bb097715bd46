import pytest

from varschouten import Functional, parse_context, parse_density

DEFAULT_CONTEXT = "indep x\nfield q even antifield p\n"


@pytest.fixture
def ctx():
    return parse_context(DEFAULT_CONTEXT)


@pytest.fixture
def golden(ctx):
    """The worked verification triple used throughout the docs and CLI help."""
    F = Functional(parse_density("p * q * q[2]", ctx), "F")
    G = Functional(parse_density("p[1] * exp(q[1])", ctx), "G")
    H = Functional(parse_density("p[2] * cos(q)", ctx), "H")
    return F, G, H
