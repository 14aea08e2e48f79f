import numpy as np
import pytest
from loguru import logger

from app.config.settings import Settings
from app.optimizers import OptimizerConfig
from tests.factories import concave_convex_model, convex_concave_model, linear_model


@pytest.fixture(autouse=True)
def quiet_logs():
    logger.remove()
    logger.add(lambda _: None, level="WARNING")
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def settings(tmp_path):
    return Settings(output_dir=str(tmp_path / "output"), show_progress=False, max_workers=1,
                    validation_samples=64, _env_file=None)


@pytest.fixture
def cfg():
    return OptimizerConfig(tolerance=1e-6, max_iterations=5000)


@pytest.fixture
def small_linear(rng):
    return linear_model(rng, 4, dim=2)


@pytest.fixture
def small_convex_concave(rng):
    return convex_concave_model(rng, 4, dim=2)


@pytest.fixture(scope="session")
def small_concave_convex():
    return concave_convex_model(seed=3, n=4, dim=2)
