"""Shared fixtures and hypothesis profiles."""

import os
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import HealthCheck, Verbosity, settings

settings.register_profile(
    "ci", deadline=timedelta(milliseconds=2000),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("dev", max_examples=20)
settings.register_profile("debug", max_examples=10, verbosity=Verbosity.verbose)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def desk_logistic():
    """Small ill-conditioned logistic instance used across solver tests."""
    from scrn.harness import synthetic_classification
    from scrn.problems import logistic_objective

    A, b = synthetic_classification(m=100, n=10, seed=7, condition=100.0)
    return logistic_objective(A, b, reg_lambda=0.001, reg_gamma=10.0)
